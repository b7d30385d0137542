//! Cross-module invariants exercised on seeded random corpora: algebraic
//! identities of the Cartesian decomposition, agreement between independent
//! verification routes (eigenvalue vs Schur complement vs quadratic forms),
//! order properties of the operator means, scaling covariance of the
//! checks, and the finite-dimensional collapse of the one-sided classes.

use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use opineq_core::block::{
    assemble, block_psd, lemma0_check, lemma16_check, lemma20_spot, lemma4_consequence,
    schur_test, swap_check, tao_check, BlockForm,
};
use opineq_core::checks::{
    check_ab_equiv, check_prop03, check_thm3, FnPair,
};
use opineq_core::classes::{
    alpha_beta_profile, classify, gen_matrix, gen_psd, is_hyponormal, is_normal,
    is_semi_hyponormal, mix_seed, MatrixKind,
};
use opineq_core::matrix::{
    abs_adj, abs_op, direct_sum_h, hermitian_eig, imag_part, op_norm, psd_check, real_part,
    singular_values, ComplexMatrix, HermitianMatrix,
};
use opineq_core::means::{geometric_mean, weighted_geometric_mean, MeanSpec};
use opineq_core::radius::omega;

fn ginibre(n: usize, seed: u64) -> ComplexMatrix {
    gen_matrix(MatrixKind::Ginibre, n, seed).unwrap()
}

fn dims_cycle(i: u64) -> usize {
    [2usize, 3, 4, 5, 6][(i % 5) as usize]
}

#[test]
fn cartesian_square_identity() {
    // (Re T)^2 - Re(T^2) = (Im T)^2 for every square matrix.
    for i in 0..200u64 {
        let t = ginibre(dims_cycle(i), mix_seed(1000, &[i]));
        let re = real_part(&t);
        let im = imag_part(&t);
        let lhs = &(re.base() * re.base()) - real_part(&(&t * &t)).base();
        let rhs = im.base() * im.base();
        let scale = op_norm(&t).unwrap().powi(2).max(1.0);
        assert!(
            lhs.max_abs_diff(&rhs) < 1e-12 * scale,
            "trial {i}: identity drift {}",
            lhs.max_abs_diff(&rhs)
        );
    }
}

#[test]
fn absolute_values_square_to_grams() {
    for i in 0..200u64 {
        let t = ginibre(dims_cycle(i), mix_seed(2000, &[i]));
        let scale = op_norm(&t).unwrap().powi(2).max(1.0);
        let abs = abs_op(&t).unwrap();
        let gram = &t.adjoint() * &t;
        assert!((abs.base() * abs.base()).max_abs_diff(&gram) < 1e-10 * scale);
        let abs_star = abs_adj(&t).unwrap();
        let gram_star = &t * &t.adjoint();
        assert!((abs_star.base() * abs_star.base()).max_abs_diff(&gram_star) < 1e-10 * scale);
    }
}

#[test]
fn direct_sum_singular_values_are_the_merged_multiset() {
    for i in 0..100u64 {
        let a = ginibre(dims_cycle(i), mix_seed(3000, &[i]));
        let b = ginibre(dims_cycle(i + 1), mix_seed(3001, &[i]));
        let ha = HermitianMatrix::new(&(&a + &a.adjoint())).unwrap();
        let hb = HermitianMatrix::new(&(&b + &b.adjoint())).unwrap();
        let mut merged = singular_values(ha.base()).unwrap();
        merged.extend(singular_values(hb.base()).unwrap());
        merged.sort_by(|x, y| y.total_cmp(x));
        let combined = singular_values(direct_sum_h(&ha, &hb).base()).unwrap();
        let scale = merged.first().copied().unwrap_or(1.0).max(1.0);
        for (x, y) in merged.iter().zip(combined.iter()) {
            assert!((x - y).abs() < 1e-10 * scale, "trial {i}: {x} vs {y}");
        }
    }
}

#[test]
fn psd_verdicts_agree_with_quadratic_forms() {
    for i in 0..100u64 {
        let g = ginibre(dims_cycle(i), mix_seed(4000, &[i]));
        let h = real_part(&g);
        let verdict = psd_check(&h, None).unwrap();
        let eig = hermitian_eig(&h).unwrap();
        let n = h.dim();

        // The minimizing eigenvector realizes the minimum eigenvalue as a
        // quadratic form — an oracle independent of the verdict path.
        let v = DVector::from_fn(n, |r, _| eig.vectors.get(r, 0));
        let q = h.quad_form(&v);
        let scale = op_norm(h.base()).unwrap().max(1.0);
        assert!((q - verdict.min_eig).abs() < 1e-9 * scale, "trial {i}");

        // Random unit vectors can only sit above the minimum.
        let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(4500, &[i]));
        for _ in 0..1000 {
            let x = DVector::from_fn(n, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let x = &x / Complex64::new(x.norm(), 0.0);
            assert!(h.quad_form(&x) >= verdict.min_eig - 1e-9 * scale);
        }
    }
}

#[test]
fn schur_and_eigen_routes_agree_away_from_the_boundary() {
    let mut checked = 0;
    for i in 0..500u64 {
        let n = dims_cycle(i);
        let a = gen_psd(n, mix_seed(5000, &[i])).unwrap();
        let b = gen_psd(n, mix_seed(5001, &[i])).unwrap().shift(0.2);
        let c = ginibre(n, mix_seed(5002, &[i]));
        let bf = BlockForm::new(a, b, c).unwrap();
        let direct = block_psd(&bf, None).unwrap();
        let schur = schur_test(&bf, None).unwrap();
        // Near the PSD boundary the two margins may legitimately disagree in
        // sign within tolerance; decide only clear-cut cases.
        let scale = op_norm(assemble(&bf).base()).unwrap();
        if direct.min_eig.abs() > 1e-6 * scale.max(1.0) {
            assert_eq!(direct.is_psd, schur.is_psd, "trial {i}");
            checked += 1;
        }
    }
    assert!(checked > 400, "too many boundary cases: {checked}");
}

#[test]
fn corner_swap_never_changes_the_verdict() {
    for i in 0..500u64 {
        let n = dims_cycle(i);
        let a = gen_psd(n, mix_seed(6000, &[i])).unwrap();
        let b = gen_psd(n, mix_seed(6001, &[i])).unwrap();
        let c = ginibre(n, mix_seed(6002, &[i]));
        let bf = BlockForm::new(a, b, c).unwrap();
        assert!(swap_check(&bf, None).unwrap(), "trial {i}");
    }
}

/// Block with PSD corners lifted enough to dominate a small Hermitian
/// coupling — guaranteed PSD with a self-adjoint off-diagonal block.
fn dominated_block(n: usize, seed: u64) -> BlockForm {
    let a = gen_psd(n, mix_seed(seed, &[0])).unwrap().shift(1.0);
    let b = gen_psd(n, mix_seed(seed, &[1])).unwrap().shift(1.0);
    let raw = real_part(&ginibre(n, mix_seed(seed, &[2])));
    let c = raw.scale(0.3 / op_norm(raw.base()).unwrap().max(1e-9));
    BlockForm::new(a, b, c.base().clone()).unwrap()
}

#[test]
fn block_lemmas_hold_on_dominated_blocks() {
    for i in 0..100u64 {
        let n = dims_cycle(i);
        let bf = dominated_block(n, mix_seed(7000, &[i]));

        let r = lemma4_consequence(&bf, None).unwrap();
        assert!(r.passed, "trial {i} lemma4: {}", r.margin);

        let bf2 = {
            let other = dominated_block(n, mix_seed(7100, &[i]));
            // Share the coupling block so the mixing lemma applies.
            BlockForm::new(other.a.clone(), other.b.clone(), bf.c.clone()).unwrap()
        };
        let r = lemma16_check(&bf, &bf2, None).unwrap();
        assert!(r.passed, "trial {i} lemma16: {}", r.margin);

        let r = lemma0_check(&bf, None).unwrap();
        assert!(r.passed, "trial {i} lemma0: {}", r.margin);
        let r = tao_check(&bf, None).unwrap();
        assert!(r.passed, "trial {i} tao: {}", r.margin);
        let r = lemma20_spot(&bf, 40, mix_seed(7200, &[i])).unwrap();
        assert!(r.passed, "trial {i} lemma20: {}", r.margin);
    }
}

#[test]
fn geometric_mean_is_monotone_and_congruent() {
    for i in 0..100u64 {
        let n = dims_cycle(i);
        let a = gen_psd(n, mix_seed(8000, &[i])).unwrap().shift(0.05);
        let b = gen_psd(n, mix_seed(8001, &[i])).unwrap().shift(0.05);
        let bump = gen_psd(n, mix_seed(8002, &[i])).unwrap();
        let scale = op_norm(a.base()).unwrap().max(op_norm(b.base()).unwrap()).max(1.0);

        // Monotonicity: A <= A + bump implies A # B <= (A + bump) # B.
        let low = geometric_mean(&a, &b).unwrap().value;
        let high = geometric_mean(&a.add(&bump), &b).unwrap().value;
        let gap = hermitian_eig(&high.sub(&low)).unwrap().min_eig();
        assert!(gap > -1e-8 * scale, "trial {i}: monotonicity {gap}");

        // Congruence: X* (A # B) X = (X* A X) # (X* B X) for invertible X.
        let x = gen_matrix(MatrixKind::Invertible, n, mix_seed(8003, &[i])).unwrap();
        let cong =
            HermitianMatrix::new(&(&(&x.adjoint() * low.base()) * &x)).unwrap();
        let xa = HermitianMatrix::new(&(&(&x.adjoint() * a.base()) * &x)).unwrap();
        let xb = HermitianMatrix::new(&(&(&x.adjoint() * b.base()) * &x)).unwrap();
        let direct = geometric_mean(&xa, &xb).unwrap().value;
        let x_scale = op_norm(&x).unwrap().powi(2) * scale;
        assert!(
            cong.base().max_abs_diff(direct.base()) < 1e-7 * x_scale.max(1.0),
            "trial {i}: congruence {}",
            cong.base().max_abs_diff(direct.base())
        );

        // Weight endpoints recover the operands.
        let w0 = weighted_geometric_mean(&a, &b, 0.0).unwrap().value;
        assert!(w0.base().max_abs_diff(a.base()) < 1e-8 * scale);
        let w1 = weighted_geometric_mean(&a, &b, 1.0).unwrap().value;
        assert!(w1.base().max_abs_diff(b.base()) < 1e-8 * scale);
    }
}

#[test]
fn check_margins_scale_covariantly() {
    for i in 0..40u64 {
        let t = ginibre(dims_cycle(i), mix_seed(9000, &[i]));
        let m_base_thm3 = check_thm3(&t, None).unwrap().margin;
        let m_base_prop = check_prop03(&t, None).unwrap().margin;
        for c in [0.5f64, 2.0] {
            let ct = t.scale_re(c);
            let m = check_thm3(&ct, None).unwrap().margin;
            assert!((m - c * m_base_thm3).abs() < 1e-9 * c.max(1.0), "trial {i} c={c}");
            let m = check_prop03(&ct, None).unwrap().margin;
            assert!((m - c * m_base_prop).abs() < 1e-9 * c.max(1.0), "trial {i} c={c}");
        }
    }
    // Degree-two checks scale quadratically.
    for i in 0..20u64 {
        let t = gen_matrix(MatrixKind::Invertible, 3, mix_seed(9100, &[i])).unwrap();
        let base = check_ab_equiv(&t, None).unwrap().margin;
        let m = check_ab_equiv(&t.scale_re(2.0), None).unwrap().margin;
        assert!((m - 4.0 * base).abs() < 1e-7, "trial {i}: {m} vs {}", 4.0 * base);
    }
}

#[test]
fn radius_is_homogeneous_and_rotation_invariant() {
    for i in 0..15u64 {
        let t = ginibre(3, mix_seed(9500, &[i]));
        let base = omega(&t, None).unwrap();
        let doubled = omega(&t.scale_re(2.0), None).unwrap();
        let slack = 2.0 * (base.error_bound + doubled.error_bound) + 1e-10;
        assert!((doubled.value - 2.0 * base.value).abs() < slack, "trial {i}");
        for phi in [0.7f64, 2.1] {
            let rotated = omega(&t.scale(Complex64::from_polar(1.0, phi)), None).unwrap();
            let slack = base.error_bound + rotated.error_bound + 1e-10;
            assert!((rotated.value - base.value).abs() < slack, "trial {i} phi={phi}");
        }
    }
}

#[test]
fn one_sided_classes_collapse_to_normal() {
    // In finite dimension the one-sided order differences are trace-free,
    // so the semi-hyponormal and hyponormal classes coincide with the
    // normal class; generated normal inputs must satisfy all three tests.
    for i in 0..50u64 {
        let t = gen_matrix(MatrixKind::Normal, dims_cycle(i), mix_seed(9900, &[i])).unwrap();
        assert!(is_normal(&t, None).unwrap().holds, "trial {i}");
        assert!(is_semi_hyponormal(&t, None).unwrap().holds, "trial {i}");
        assert!(is_hyponormal(&t, None).unwrap().holds, "trial {i}");
        assert_eq!(classify(&t, None).unwrap().class, "normal", "trial {i}");
    }
}

#[test]
fn spread_profile_certifies_its_two_sided_bounds() {
    for i in 0..100u64 {
        let n = [2usize, 3, 4, 5][(i % 4) as usize];
        let t = gen_matrix(MatrixKind::Invertible, n, mix_seed(10_000, &[i])).unwrap();
        let p = alpha_beta_profile(&t).unwrap();
        assert!(p.alpha <= 1.0 + 1e-12 && p.beta >= 1.0 - 1e-12, "trial {i}");
        let tstar_t = HermitianMatrix::new(&(&t.adjoint() * &t)).unwrap();
        let t_tstar = HermitianMatrix::new(&(&t * &t.adjoint())).unwrap();
        let scale = op_norm(tstar_t.base()).unwrap().max(1.0);
        let low = hermitian_eig(&t_tstar.sub(&tstar_t.scale(p.alpha * p.alpha)))
            .unwrap()
            .min_eig();
        let high = hermitian_eig(&tstar_t.scale(p.beta * p.beta).sub(&t_tstar))
            .unwrap()
            .min_eig();
        assert!(low > -1e-8 * scale, "trial {i}: lower {low}");
        assert!(high > -1e-8 * scale, "trial {i}: upper {high}");
    }
}

#[test]
fn psd_pair_combination_singular_values() {
    // For PSD S and T, the Hermitian sum S + T equals the real part of
    // (1 - i)(S + iT), so each of its singular values is bounded by sqrt(2)
    // times the matching singular value of S + iT.
    for i in 0..100u64 {
        let n = dims_cycle(i);
        let s = gen_psd(n, mix_seed(11_000, &[i])).unwrap();
        let t = gen_psd(n, mix_seed(11_001, &[i])).unwrap();
        let combo = s.base() + &t.base().scale(Complex64::new(0.0, 1.0));
        let sv_combo = singular_values(&combo).unwrap();
        let sv_sum = singular_values(s.add(&t).base()).unwrap();
        let scale = sv_sum.first().copied().unwrap_or(1.0).max(1.0);
        for (b, c) in sv_sum.iter().zip(sv_combo.iter()) {
            assert!(
                *b <= std::f64::consts::SQRT_2 * c + 1e-10 * scale,
                "trial {i}: {b} vs sqrt2*{c}"
            );
        }
    }
}

proptest! {
    #[test]
    fn fn_pair_label_round_trips(t in 0.0f64..=1.0) {
        let pair = FnPair::power(t).unwrap();
        let parsed = FnPair::parse(&pair.label()).unwrap();
        prop_assert_eq!(parsed, pair);
    }

    #[test]
    fn mean_weight_gate_matches_the_interval(w in -10.0f64..10.0) {
        let ok = MeanSpec::weighted(w).is_ok();
        prop_assert_eq!(ok, (0.0..=1.0).contains(&w));
    }

    #[test]
    fn matrix_json_round_trips(entries in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..=16)) {
        let n = (entries.len() as f64).sqrt().floor() as usize;
        prop_assume!(n >= 1);
        let mat = ComplexMatrix::from_fn(n, |i, j| {
            let (re, im) = entries[(i * n + j) % entries.len()];
            Complex64::new(re, im)
        })
        .unwrap();
        let json = serde_json::to_string(&mat).unwrap();
        let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
        prop_assert!(back.max_abs_diff(&mat) == 0.0);
    }
}
