//! Theorem-level inequality checks.
//!
//! Each function verifies one inequality (or a family indexed by a function
//! pair, exponents, or a mean) and returns a [`CheckReport`] whose margin is
//! the minimum slack over every route the statement provides: direct Loewner
//! comparisons, the block forms they come from, Schur complements, and
//! singular-value dominations. Collapsing routes is deliberately avoided —
//! agreement between independent routes is part of what is being tested.
//!
//! Margins are distances to violation: the smallest eigenvalue of
//! `bound - compared` for Loewner statements, the smallest eigenvalue of an
//! assembled block for positivity statements, and `min_j (s_j(big) -
//! s_j(small))` for singular-value statements. Default tolerances are
//! relative to the size of the bound itself: `1e-8` for checks computed by
//! plain functional calculus, `1e-7` for checks that consume an operator
//! mean or a matrix inverse. An explicit `tol` is absolute.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::block::{assemble, block_psd, lemma6_block, schur_test, BlockForm};
use crate::classes::alpha_beta_profile;
use crate::error::{LabError, Result};
use crate::matrix::{
    abs_adj, abs_op, direct_sum_h, hermitian_eig, imag_part, matrix_function, real_part,
    singular_values, ComplexMatrix, HermitianMatrix,
};
use crate::means::{geometric_mean, mean_apply, weighted_geometric_mean, MeanSpec};
use crate::report::{digest, CheckReport};

/// A pair of nonnegative functions with `f(x) g(x) = x`, used by every
/// factored bound. `power(t)` is the family `f = x^t`, `g = x^{1-t}`;
/// `sqrt` is its symmetric point written explicitly. Evaluation clamps tiny
/// negative inputs (eigen-solver noise on a PSD matrix) to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FnPair {
    #[serde(rename = "sqrt")]
    Sqrt,
    #[serde(rename = "power")]
    Power { t: f64 },
}

impl FnPair {
    pub fn sqrt() -> Self {
        FnPair::Sqrt
    }

    pub fn power(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(LabError::ParamRange {
                name: "t",
                value: t,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(FnPair::Power { t })
    }

    /// Parses `"sqrt"` or `"power:<t>"`.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "sqrt" {
            return Ok(FnPair::Sqrt);
        }
        if let Some(t) = s.strip_prefix("power:") {
            let t: f64 = t
                .parse()
                .map_err(|_| LabError::Usage(format!("bad exponent in function pair '{s}'")))?;
            return Self::power(t);
        }
        Err(LabError::Usage(format!(
            "unknown function pair '{s}' (expected 'sqrt' or 'power:<t>')"
        )))
    }

    pub fn label(&self) -> String {
        match self {
            FnPair::Sqrt => "sqrt".into(),
            FnPair::Power { t } => format!("power:{t}"),
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match self {
            FnPair::Sqrt => x.sqrt(),
            FnPair::Power { t } => x.powf(*t),
        }
    }

    pub fn g(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match self {
            FnPair::Sqrt => x.sqrt(),
            FnPair::Power { t } => x.powf(1.0 - *t),
        }
    }

    fn is_sqrt_point(&self) -> bool {
        matches!(self, FnPair::Sqrt) || matches!(self, FnPair::Power { t } if *t == 0.5)
    }
}

/// `h^p` by functional calculus, clamping rounding-level negatives. With
/// `p = 0` this is the identity-on-support-free convention `h^0 = I`.
fn h_pow(h: &HermitianMatrix, p: f64) -> Result<HermitianMatrix> {
    matrix_function(h, |x| x.max(0.0).powf(p))
}

/// Smallest eigenvalue of `bound - mid` and `bound + mid` — the two-sided
/// Loewner margin of `+-mid <= bound`.
fn sandwich(bound: &HermitianMatrix, mid: &HermitianMatrix) -> Result<f64> {
    let up = hermitian_eig(&bound.sub(mid))?.min_eig();
    let dn = hermitian_eig(&bound.add(mid))?.min_eig();
    Ok(up.min(dn))
}

/// `min_j (big_j - small_j)` over the length of `small` (both descending).
fn sv_margin(small: &[f64], big: &[f64]) -> f64 {
    small
        .iter()
        .enumerate()
        .map(|(j, s)| big[j] - s)
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn resolve_tol(tol: Option<f64>, rel: f64, scale: f64) -> Result<f64> {
    match tol {
        Some(t) if t < 0.0 => Err(LabError::ParamRange {
            name: "tol",
            value: t,
            lo: 0.0,
            hi: f64::INFINITY,
        }),
        Some(t) => Ok(t),
        None => Ok(rel * scale.max(1.0)),
    }
}

fn gram_right(x: &ComplexMatrix) -> Result<HermitianMatrix> {
    // |X|^2 = X*X
    HermitianMatrix::new(&(&x.adjoint() * x))
}

fn gram_left(x: &ComplexMatrix) -> Result<HermitianMatrix> {
    // |X*|^2 = XX*
    HermitianMatrix::new(&(x * &x.adjoint()))
}

/// `f(|Y|) |Y|` in one functional-calculus pass.
fn f_abs_times_abs(y: &ComplexMatrix, pair: &FnPair) -> Result<HermitianMatrix> {
    matrix_function(&abs_op(y)?, |x| pair.f(x) * x.max(0.0))
}

/// `+-Re T <= |T|`, the real-part bound that holds under the one-sided
/// order `|T*| <= |T|` (and in particular for normal inputs) but fails for
/// general matrices.
pub fn check_thm3(t: &ComplexMatrix, tol: Option<f64>) -> Result<CheckReport> {
    let abs = abs_op(t)?;
    let margin = sandwich(&abs, &real_part(t))?;
    let tol = resolve_tol(tol, 1e-8, abs.base().norm_fro())?;
    Ok(CheckReport::from_margin("thm3", digest(t), margin, tol, || {
        serde_json::json!({ "t": t })
    }))
}

/// Positivity of `[[|T|, T*],[T, |T|]]`, its corner swap, and the averaged
/// block `[[|T|, Re T],[Re T, |T|]]` — the block route behind the real-part
/// bound. Margin is the smallest eigenvalue over the three assemblies.
pub fn check_prop03(t: &ComplexMatrix, tol: Option<f64>) -> Result<CheckReport> {
    let abs = abs_op(t)?;
    let base = BlockForm::new(abs.clone(), abs.clone(), t.clone())?;
    let averaged = BlockForm::new(abs.clone(), abs.clone(), real_part(t).base().clone())?;
    let relaxed = Some(f64::INFINITY);
    let m1 = block_psd(&base, relaxed)?.min_eig;
    let m2 = block_psd(&base.swapped(), relaxed)?.min_eig;
    let m3 = block_psd(&averaged, relaxed)?.min_eig;
    let margin = m1.min(m2).min(m3);
    let tol = resolve_tol(tol, 1e-8, abs.base().norm_fro())?;
    Ok(CheckReport::from_margin("prop03", digest(t), margin, tol, || {
        serde_json::json!({ "t": t })
    }))
}

/// Singular-value dominations `s_j(T) <= s_j(|T| (+) |T|)` and
/// `s_j(Re T) <= s_j(|T| (+) |T|)` — consequences of the block route that
/// hold for every matrix.
pub fn check_sv_semihypo(t: &ComplexMatrix, tol: Option<f64>) -> Result<CheckReport> {
    let abs = abs_op(t)?;
    let big = singular_values(direct_sum_h(&abs, &abs).base())?;
    let sv_t = singular_values(t)?;
    let sv_r = singular_values(real_part(t).base())?;
    let margin = sv_margin(&sv_t, &big).min(sv_margin(&sv_r, &big));
    let tol = resolve_tol(tol, 1e-8, abs.base().norm_fro())?;
    Ok(CheckReport::from_margin(
        "sv_semihypo",
        digest(t),
        margin,
        tol,
        || serde_json::json!({ "t": t }),
    ))
}

/// The claimed arithmetic-geometric-mean domination
/// `s_j(Re T) <= (1/2) s_j(|T| + |T*|)`, which fails in general (a negative
/// margin here reproduces the known counterexample). The direct-sum reading
/// `(1/2) s_j(|T| (+) |T*|)` — under which the second singular value is
/// larger and the instance survives — is reported in the notes.
pub fn check_counterexample_svamgm(t: &ComplexMatrix, tol: Option<f64>) -> Result<CheckReport> {
    let abs = abs_op(t)?;
    let abs_star = abs_adj(t)?;
    let sv_r = singular_values(real_part(t).base())?;
    let sv_sum: Vec<f64> = singular_values(abs.add(&abs_star).base())?
        .into_iter()
        .map(|s| 0.5 * s)
        .collect();
    let sv_dsum: Vec<f64> = singular_values(direct_sum_h(&abs, &abs_star).base())?
        .into_iter()
        .map(|s| 0.5 * s)
        .collect();
    let tightest = |big: &[f64]| -> (usize, f64) {
        sv_r.iter()
            .zip(big.iter())
            .enumerate()
            .map(|(j, (small, big))| (j, big - small))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one singular value")
    };
    let (j_sum, margin) = tightest(&sv_sum);
    let (j_dsum, dsum_margin) = tightest(&sv_dsum);
    let tol = resolve_tol(tol, 1e-8, abs.base().norm_fro())?;
    let report = CheckReport::from_margin(
        "counterexample_svamgm",
        digest(t),
        margin,
        tol,
        || serde_json::json!({ "t": t }),
    );
    Ok(report.with_notes(format!(
        "sum reading: tightest at s_{}, half value {:.9} vs {:.9}, margin {margin:.9e}; \
         direct-sum reading: tightest at s_{}, half value {:.9} vs {:.9}, margin \
         {dsum_margin:.9e} (the two readings differ, and only the sum reading is refutable)",
        j_sum + 1,
        sv_sum[j_sum],
        sv_r[j_sum],
        j_dsum + 1,
        sv_dsum[j_dsum],
        sv_r[j_dsum],
    )))
}

/// Equivalence between the two-sided spread bound
/// `alpha^2 |T|^2 <= |T*|^2 <= beta^2 |T|^2` and positivity of the blocks
/// `[[(1/alpha^2)|T*|^2, |T|^2],[|T|^2, (1/alpha^2)|T*|^2]]` and
/// `[[beta^2 |T|^2, |T*|^2],[|T*|^2, beta^2 |T|^2]]`. With the constants
/// taken from the spread profile both blocks are tight, so the margin sits
/// at zero up to rounding; the Schur route is folded in when `|T|` is well
/// enough conditioned for the inverse to be meaningful.
pub fn check_ab_equiv(t: &ComplexMatrix, tol: Option<f64>) -> Result<CheckReport> {
    let p = alpha_beta_profile(t)?;
    let tstar_t = gram_right(t)?;
    let t_tstar = gram_left(t)?;
    let b1 = BlockForm::new(
        t_tstar.scale(1.0 / (p.alpha * p.alpha)),
        t_tstar.scale(1.0 / (p.alpha * p.alpha)),
        tstar_t.base().clone(),
    )?;
    let b2 = BlockForm::new(
        tstar_t.scale(p.beta * p.beta),
        tstar_t.scale(p.beta * p.beta),
        t_tstar.base().clone(),
    )?;
    let relaxed = Some(f64::INFINITY);
    let mut margins = vec![
        block_psd(&b1, relaxed)?.min_eig,
        block_psd(&b2, relaxed)?.min_eig,
    ];
    let mut notes = None;
    if p.cond_abs <= 1e4 {
        margins.push(schur_test(&b1, relaxed)?.min_eig);
        margins.push(schur_test(&b2, relaxed)?.min_eig);
    } else {
        notes = Some(format!(
            "Schur route skipped: cond(|T|) = {:.3e} would dominate the complement's error",
            p.cond_abs
        ));
    }
    let margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = tstar_t.base().norm_fro();
    let tol = resolve_tol(tol, 1e-7, scale)?;
    let mut report = CheckReport::from_margin("ab_equiv", digest(t), margin, tol, || {
        serde_json::json!({ "t": t })
    });
    if let Some(n) = notes {
        report = report.with_notes(n);
    }
    Ok(report)
}

/// Real-part bound through the geometric mean for matrices with spread
/// profile `(alpha, beta)`:
/// `+-Re T <= (beta/alpha)^{1/4} (|T| # |T*|)`, together with the blocks it
/// is assembled from: `[[(1/sqrt alpha)|T*|, T*],[T, .]]`,
/// `[[(sqrt beta)|T|, T*],[T, .]]`, and their geometric-mean mixture.
pub fn check_thm28(t: &ComplexMatrix, tol: Option<f64>) -> Result<CheckReport> {
    let p = alpha_beta_profile(t)?;
    let abs = abs_op(t)?;
    let abs_star = abs_adj(t)?;
    let mean = geometric_mean(&abs, &abs_star)?.value;
    let bound = mean.scale((p.beta / p.alpha).powf(0.25));
    let relaxed = Some(f64::INFINITY);
    let direct = sandwich(&bound, &real_part(t))?;
    let b_mixed = BlockForm::new(bound.clone(), bound.clone(), t.clone())?;
    let b_lower = BlockForm::new(
        abs_star.scale(1.0 / p.alpha.sqrt()),
        abs_star.scale(1.0 / p.alpha.sqrt()),
        t.clone(),
    )?;
    let b_upper = BlockForm::new(
        abs.scale(p.beta.sqrt()),
        abs.scale(p.beta.sqrt()),
        t.clone(),
    )?;
    let margin = direct
        .min(block_psd(&b_mixed, relaxed)?.min_eig)
        .min(block_psd(&b_lower, relaxed)?.min_eig)
        .min(block_psd(&b_upper, relaxed)?.min_eig);
    let tol = resolve_tol(tol, 1e-7, bound.base().norm_fro())?;
    Ok(CheckReport::from_margin("thm28", digest(t), margin, tol, || {
        serde_json::json!({ "t": t })
    }))
}

/// Real-part bound through an arbitrary operator mean for matrices with
/// spread profile: `+-Re T <= (sqrt beta |T|) sigma ((1/sqrt alpha)|T*|)`.
/// For the weighted geometric family the scaled closed form
/// `alpha^{-t/2} beta^{(1-t)/2} (|T| #_t |T*|)` is computed as an
/// independent route and must agree.
pub fn check_mean_sigma(t: &ComplexMatrix, spec: &MeanSpec, tol: Option<f64>) -> Result<CheckReport> {
    let p = alpha_beta_profile(t)?;
    let abs = abs_op(t)?;
    let abs_star = abs_adj(t)?;
    let re = real_part(t);
    let bound = mean_apply(
        spec,
        &abs.scale(p.beta.sqrt()),
        &abs_star.scale(1.0 / p.alpha.sqrt()),
    )?
    .value;
    let mut margin = sandwich(&bound, &re)?;
    let mut notes = None;
    if let MeanSpec::WeightedGeometric { t: w } = spec {
        let w = *w;
        let closed = weighted_geometric_mean(&abs, &abs_star, w)?
            .value
            .scale(p.alpha.powf(-w / 2.0) * p.beta.powf((1.0 - w) / 2.0));
        margin = margin.min(sandwich(&closed, &re)?);
        let gap = bound.base().max_abs_diff(closed.base());
        if gap > 1e-8 * bound.base().norm_fro().max(1.0) {
            notes = Some(format!(
                "scaled closed form disagrees with the mean route by {gap:.3e}"
            ));
        }
    }
    let label = match spec {
        MeanSpec::WeightedGeometric { t } => format!("mean_sigma:{t}"),
        MeanSpec::Function { name } => format!("mean_sigma:{name}"),
    };
    let tol = resolve_tol(tol, 1e-7, bound.base().norm_fro())?;
    let mut report = CheckReport::from_margin(&label, digest(&(t, spec)), margin, tol, || {
        serde_json::json!({ "t": t, "mean": spec })
    });
    if let Some(n) = notes {
        report = report.with_notes(n);
    }
    Ok(report)
}

/// Absolute-value-of-real-part bounds for matrices with spread profile:
/// `|Re T| <= sqrt((1+alpha^2)/(2 alpha^2)) |T*|` and
/// `|Re T| <= sqrt((1+beta^2)/2) |T|`.
pub fn check_thm15(t: &ComplexMatrix, tol: Option<f64>) -> Result<CheckReport> {
    let p = alpha_beta_profile(t)?;
    let abs_re = abs_op(real_part(t).base())?;
    let c_star = ((1.0 + p.alpha * p.alpha) / (2.0 * p.alpha * p.alpha)).sqrt();
    let c_abs = ((1.0 + p.beta * p.beta) / 2.0).sqrt();
    let b_star = abs_adj(t)?.scale(c_star);
    let b_abs = abs_op(t)?.scale(c_abs);
    let m1 = hermitian_eig(&b_star.sub(&abs_re))?.min_eig();
    let m2 = hermitian_eig(&b_abs.sub(&abs_re))?.min_eig();
    let margin = m1.min(m2);
    let tol = resolve_tol(tol, 1e-7, b_abs.base().norm_fro().max(b_star.base().norm_fro()))?;
    Ok(CheckReport::from_margin("thm15", digest(t), margin, tol, || {
        serde_json::json!({ "t": t })
    }))
}

/// The product bound `+-Re(ST) <= (S g^2(|T*|) S* # |S*|^2 + f(|T|)|T|)/2`
/// along with the three block forms behind it: the Cauchy-Schwarz block
/// `[[|S*|^2, (ST)*],[ST, |T|^2]]` (in swapped storage), the factored block,
/// and their geometric-mean mixture.
pub fn check_thm23(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    pair: &FnPair,
    tol: Option<f64>,
) -> Result<CheckReport> {
    let st = s * t;
    let c = st.adjoint(); // bottom-left block: (ST)* = T*S*
    let ss_star = gram_left(s)?;
    let tt = gram_right(t)?;
    let g2_abs_star = matrix_function(&abs_adj(t)?, |x| {
        let v = pair.g(x);
        v * v
    })?;
    let s_g2_s = HermitianMatrix::new(&(&(s * g2_abs_star.base()) * &s.adjoint()))?;
    let f_abs_abs = f_abs_times_abs(t, pair)?;

    let mean = geometric_mean(&s_g2_s, &ss_star)?.value;
    let rhs = mean.add(&f_abs_abs).scale(0.5);
    let direct = sandwich(&rhs, &real_part(&st))?;

    let relaxed = Some(f64::INFINITY);
    let cauchy = BlockForm::new(ss_star, tt, c.clone())?;
    let factored = lemma6_block(s, t, &|x| pair.f(x), &|x| pair.g(x))?.swapped();
    let mixed = BlockForm::new(mean, f_abs_abs, c)?;
    let margin = direct
        .min(block_psd(&cauchy, relaxed)?.min_eig)
        .min(block_psd(&factored, relaxed)?.min_eig)
        .min(block_psd(&mixed, relaxed)?.min_eig);

    let label = format!("thm23:{}", pair.label());
    let tol = resolve_tol(tol, 1e-7, rhs.base().norm_fro())?;
    Ok(CheckReport::from_margin(
        &label,
        digest(&(s, t, pair)),
        margin,
        tol,
        || serde_json::json!({ "s": s, "t": t, "pair": pair }),
    ))
}

/// The substitution family around the product bound: the imaginary-part form
/// `+-Im(T*S) <= (S* g^2(|T*|) S # |S|^2 + f(|T|)|T|)/2` for the supplied
/// `S`, its closed `S = I` reduction `+-Im T <= (g(|T*|) + f(|T|)|T|)/2`
/// (the mean against the identity collapses to a square root), and the
/// one-operator mixed form `+-(Re T + Im T) <= g(|T|) + f(|T*|)|T*|`.
pub fn check_remark18(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    pair: &FnPair,
    tol: Option<f64>,
) -> Result<CheckReport> {
    let abs_t = abs_op(t)?;
    let abs_t_star = abs_adj(t)?;
    let f_abs_abs_t = f_abs_times_abs(t, pair)?;

    // Imaginary-part form on T*S.
    let g2_star = matrix_function(&abs_t_star, |x| {
        let v = pair.g(x);
        v * v
    })?;
    let s_adj_g2_s = HermitianMatrix::new(&(&(&s.adjoint() * g2_star.base()) * s))?;
    let ss = gram_right(s)?;
    let mean_im = geometric_mean(&s_adj_g2_s, &ss)?.value;
    let rhs_im = mean_im.add(&f_abs_abs_t).scale(0.5);
    let m_im = sandwich(&rhs_im, &imag_part(&(&t.adjoint() * s)))?;

    // Closed identity reduction of the same form: the mean of `g^2(|T*|)`
    // against the identity is `g(|T*|)` exactly, so no mean evaluation (and
    // no shift policy) enters this route.
    let g_star = matrix_function(&abs_t_star, |x| pair.g(x))?;
    let rhs_id = g_star.add(&f_abs_abs_t).scale(0.5);
    let m_id = sandwich(&rhs_id, &imag_part(t))?;

    // One-operator mixed form combining a real and an imaginary part.
    let g_abs_t = matrix_function(&abs_t, |x| pair.g(x))?;
    let f_abs_abs_star = matrix_function(&abs_t_star, |x| pair.f(x) * x.max(0.0))?;
    let rhs_cart = g_abs_t.add(&f_abs_abs_star);
    let lhs_cart = real_part(t).add(&imag_part(t));
    let m_cart = sandwich(&rhs_cart, &lhs_cart)?;

    let margin = m_im.min(m_id).min(m_cart);
    let scale = rhs_cart.base().norm_fro().max(rhs_im.base().norm_fro());
    let label = format!("remark18:{}", pair.label());
    let tol = resolve_tol(tol, 1e-7, scale)?;
    Ok(CheckReport::from_margin(
        &label,
        digest(&(s, t, pair)),
        margin,
        tol,
        || serde_json::json!({ "s": s, "t": t, "pair": pair }),
    ))
}

/// The four-operator sum bound: for every inner and outer sign,
/// `+-Re(T1 T2 +- T3 T4)` is dominated by half the sum of the two factored
/// geometric-mean terms. At the square-root point the explicit `|.|^{3/2}`
/// form is recomputed as an independent route.
pub fn check_cor_sum(
    t1: &ComplexMatrix,
    t2: &ComplexMatrix,
    t3: &ComplexMatrix,
    t4: &ComplexMatrix,
    pair: &FnPair,
    tol: Option<f64>,
) -> Result<CheckReport> {
    let term = |x: &ComplexMatrix, y: &ComplexMatrix| -> Result<(HermitianMatrix, HermitianMatrix)> {
        let g2 = matrix_function(&abs_adj(y)?, |v| {
            let w = pair.g(v);
            w * w
        })?;
        let xg2x = HermitianMatrix::new(&(&(x * g2.base()) * &x.adjoint()))?;
        let mean = geometric_mean(&xg2x, &gram_left(x)?)?.value;
        Ok((mean, f_abs_times_abs(y, pair)?))
    };
    let (m1, f1) = term(t1, t2)?;
    let (m3, f3) = term(t3, t4)?;
    let rhs = m1.add(&m3).add(&f1).add(&f3).scale(0.5);

    let prod12 = t1 * t2;
    let prod34 = t3 * t4;
    let mut margin = f64::INFINITY;
    for inner in [1.0f64, -1.0] {
        let mid = real_part(&(&prod12 + &prod34.scale(Complex64::new(inner, 0.0))));
        margin = margin.min(sandwich(&rhs, &mid)?);
    }

    if pair.is_sqrt_point() {
        // Explicit square-root form, recomputed from scratch.
        let term5 = |x: &ComplexMatrix, y: &ComplexMatrix| -> Result<(HermitianMatrix, HermitianMatrix)> {
            let x_abs_x = HermitianMatrix::new(&(&(x * abs_adj(y)?.base()) * &x.adjoint()))?;
            let mean = geometric_mean(&x_abs_x, &gram_left(x)?)?.value;
            Ok((mean, h_pow(&abs_op(y)?, 1.5)?))
        };
        let (m1b, f1b) = term5(t1, t2)?;
        let (m3b, f3b) = term5(t3, t4)?;
        let rhs5 = m1b.add(&m3b).add(&f1b).add(&f3b).scale(0.5);
        for inner in [1.0f64, -1.0] {
            let mid = real_part(&(&prod12 + &prod34.scale(Complex64::new(inner, 0.0))));
            margin = margin.min(sandwich(&rhs5, &mid)?);
        }
    }

    let label = format!("cor_sum:{}", pair.label());
    let tol = resolve_tol(tol, 1e-7, rhs.base().norm_fro())?;
    Ok(CheckReport::from_margin(
        &label,
        digest(&(t1, t2, t3, t4, pair)),
        margin,
        tol,
        || serde_json::json!({ "t1": t1, "t2": t2, "t3": t3, "t4": t4, "pair": pair }),
    ))
}

/// Exponent-family bound for a sum:
/// `+-Re(S +- T) <= (|S|^{tp} + |S*|^{2-tp} + |T|^{vp} + |T*|^{2-vp})/2`
/// for `tp, vp` in `[0, 3/2]`, with `|X|^0 = I`.
pub fn check_cor19(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    tp: f64,
    vp: f64,
    tol: Option<f64>,
) -> Result<CheckReport> {
    for (name, v) in [("tp", tp), ("vp", vp)] {
        if !(0.0..=1.5).contains(&v) {
            return Err(LabError::ParamRange {
                name,
                value: v,
                lo: 0.0,
                hi: 1.5,
            });
        }
    }
    let rhs = h_pow(&abs_op(s)?, tp)?
        .add(&h_pow(&abs_adj(s)?, 2.0 - tp)?)
        .add(&h_pow(&abs_op(t)?, vp)?)
        .add(&h_pow(&abs_adj(t)?, 2.0 - vp)?)
        .scale(0.5);
    let mut margin = f64::INFINITY;
    for inner in [1.0f64, -1.0] {
        let mid = real_part(&(s + &t.scale(Complex64::new(inner, 0.0))));
        margin = margin.min(sandwich(&rhs, &mid)?);
    }
    let label = format!("cor19:{tp},{vp}");
    let tol = resolve_tol(tol, 1e-8, rhs.base().norm_fro())?;
    Ok(CheckReport::from_margin(
        &label,
        digest(&(s, t, tp, vp)),
        margin,
        tol,
        || serde_json::json!({ "s": s, "t": t, "tp": tp, "vp": vp }),
    ))
}

/// Cartesian-decomposition case of the exponent family:
/// `+-Re X <= (|Re X|^{tp} + |Re X|^{2-tp} + |Im X|^{vp} + |Im X|^{2-vp})/2`.
pub fn check_cor19_cartesian(
    x: &ComplexMatrix,
    tp: f64,
    vp: f64,
    tol: Option<f64>,
) -> Result<CheckReport> {
    for (name, v) in [("tp", tp), ("vp", vp)] {
        if !(0.0..=1.5).contains(&v) {
            return Err(LabError::ParamRange {
                name,
                value: v,
                lo: 0.0,
                hi: 1.5,
            });
        }
    }
    let re = real_part(x);
    let im = imag_part(x);
    let abs_re = abs_op(re.base())?;
    let abs_im = abs_op(im.base())?;
    let rhs = h_pow(&abs_re, tp)?
        .add(&h_pow(&abs_re, 2.0 - tp)?)
        .add(&h_pow(&abs_im, vp)?)
        .add(&h_pow(&abs_im, 2.0 - vp)?)
        .scale(0.5);
    let margin = sandwich(&rhs, &re)?;
    let label = format!("cor19_cartesian:{tp},{vp}");
    let tol = resolve_tol(tol, 1e-8, rhs.base().norm_fro())?;
    Ok(CheckReport::from_margin(
        &label,
        digest(&(x, tp, vp)),
        margin,
        tol,
        || serde_json::json!({ "x": x, "tp": tp, "vp": vp }),
    ))
}

/// Singular-value consequences: the halved domination
/// `s_j(Re S) <= (1/2) s_j((|S|+|S*|) (+) (|S|+|S*|))` and the doubling
/// bound `2 s_j(ST) <= s_j` of the assembled mixed block.
pub fn check_sing_remarks(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    pair: &FnPair,
    tol: Option<f64>,
) -> Result<CheckReport> {
    let w = abs_op(s)?.add(&abs_adj(s)?);
    let big: Vec<f64> = singular_values(direct_sum_h(&w, &w).base())?
        .into_iter()
        .map(|v| 0.5 * v)
        .collect();
    let sv_re = singular_values(real_part(s).base())?;
    let m1 = sv_margin(&sv_re, &big);

    let g2_star = matrix_function(&abs_adj(t)?, |x| {
        let v = pair.g(x);
        v * v
    })?;
    let s_g2_s = HermitianMatrix::new(&(&(s * g2_star.base()) * &s.adjoint()))?;
    let mean = geometric_mean(&s_g2_s, &gram_left(s)?)?.value;
    let st = s * t;
    let mixed = BlockForm::new(mean, f_abs_times_abs(t, pair)?, st.adjoint())?;
    let sv_block = singular_values(assemble(&mixed).base())?;
    let doubled: Vec<f64> = singular_values(&st)?.into_iter().map(|v| 2.0 * v).collect();
    let m2 = sv_margin(&doubled, &sv_block);

    let margin = m1.min(m2);
    let scale = w.base().norm_fro().max(assemble(&mixed).base().norm_fro());
    let label = format!("sing_remarks:{}", pair.label());
    let tol = resolve_tol(tol, 1e-7, scale)?;
    Ok(CheckReport::from_margin(
        &label,
        digest(&(s, t, pair)),
        margin,
        tol,
        || serde_json::json!({ "s": s, "t": t, "pair": pair }),
    ))
}

/// Positivity of the elementary block `[[|T|, T*],[T, |T|]]` on its own.
pub fn check_eq7_block(t: &ComplexMatrix, tol: Option<f64>) -> Result<CheckReport> {
    let abs = abs_op(t)?;
    let bf = BlockForm::new(abs.clone(), abs.clone(), t.clone())?;
    let margin = block_psd(&bf, Some(f64::INFINITY))?.min_eig;
    let tol = resolve_tol(tol, 1e-8, abs.base().norm_fro())?;
    Ok(CheckReport::from_margin("eq7_block", digest(t), margin, tol, || {
        serde_json::json!({ "t": t })
    }))
}

/// Positivity of the Cauchy-Schwarz block `[[|S*|^2, (ST)*],[ST, |T|^2]]`
/// (stored corner-swapped), which holds for every pair.
pub fn check_eq9_block(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    tol: Option<f64>,
) -> Result<CheckReport> {
    let bf = BlockForm::new(gram_left(s)?, gram_right(t)?, (s * t).adjoint())?;
    let margin = block_psd(&bf, Some(f64::INFINITY))?.min_eig;
    let scale = bf_scale(&bf);
    let tol = resolve_tol(tol, 1e-8, scale)?;
    Ok(CheckReport::from_margin("eq9_block", digest(&(s, t)), margin, tol, || {
        serde_json::json!({ "s": s, "t": t })
    }))
}

/// Positivity of the factored block
/// `[[S g^2(|T*|) S*, (ST)*],[ST, f^2(|T|)]]` for a function pair.
pub fn check_eq8_block(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    pair: &FnPair,
    tol: Option<f64>,
) -> Result<CheckReport> {
    let bf = lemma6_block(s, t, &|x| pair.f(x), &|x| pair.g(x))?.swapped();
    let margin = block_psd(&bf, Some(f64::INFINITY))?.min_eig;
    let scale = bf_scale(&bf);
    let label = format!("eq8_block:{}", pair.label());
    let tol = resolve_tol(tol, 1e-8, scale)?;
    Ok(CheckReport::from_margin(
        &label,
        digest(&(s, t, pair)),
        margin,
        tol,
        || serde_json::json!({ "s": s, "t": t, "pair": pair }),
    ))
}

/// Positivity of the mixed geometric-mean block
/// `[[S g^2(|T*|) S* # |S*|^2, (ST)*],[ST, f(|T|)|T|]]`.
pub fn check_eq13_block(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    pair: &FnPair,
    tol: Option<f64>,
) -> Result<CheckReport> {
    let g2 = matrix_function(&abs_adj(t)?, |x| {
        let v = pair.g(x);
        v * v
    })?;
    let s_g2_s = HermitianMatrix::new(&(&(s * g2.base()) * &s.adjoint()))?;
    let mean = geometric_mean(&s_g2_s, &gram_left(s)?)?.value;
    let bf = BlockForm::new(mean, f_abs_times_abs(t, pair)?, (s * t).adjoint())?;
    let margin = block_psd(&bf, Some(f64::INFINITY))?.min_eig;
    let scale = bf_scale(&bf);
    let label = format!("eq13_block:{}", pair.label());
    let tol = resolve_tol(tol, 1e-7, scale)?;
    Ok(CheckReport::from_margin(
        &label,
        digest(&(s, t, pair)),
        margin,
        tol,
        || serde_json::json!({ "s": s, "t": t, "pair": pair }),
    ))
}

fn bf_scale(bf: &BlockForm) -> f64 {
    assemble(bf).base().norm_fro()
}

/// Singular values of a complex combination:
/// `s_j(S +- iT) <= s_j((g(|S*|) + g(|T*|)) (+) (f(|S|)|S| + f(|T|)|T|))`.
/// At `power:0` (f = 1, g = x) this is the absolute-value particular case.
pub fn check_cor_sing_st(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    pair: &FnPair,
    tol: Option<f64>,
) -> Result<CheckReport> {
    let top = matrix_function(&abs_adj(s)?, |x| pair.g(x))?
        .add(&matrix_function(&abs_adj(t)?, |x| pair.g(x))?);
    let bottom = f_abs_times_abs(s, pair)?.add(&f_abs_times_abs(t, pair)?);
    let big = singular_values(direct_sum_h(&top, &bottom).base())?;
    let mut margin = f64::INFINITY;
    for sign in [1.0f64, -1.0] {
        let combo = s + &t.scale(Complex64::new(0.0, sign));
        margin = margin.min(sv_margin(&singular_values(&combo)?, &big));
    }
    let label = format!("cor_sing_ST:{}", pair.label());
    let scale = top.base().norm_fro().max(bottom.base().norm_fro());
    let tol = resolve_tol(tol, 1e-8, scale)?;
    Ok(CheckReport::from_margin(
        &label,
        digest(&(s, t, pair)),
        margin,
        tol,
        || serde_json::json!({ "s": s, "t": t, "pair": pair }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{gen_matrix, mix_seed, MatrixKind};

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn shift2() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap()
    }

    fn lower2() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(2, &[1.0, 0.0, 1.0, 1.0]).unwrap()
    }

    /// The 2x2 instance whose second singular value defeats the averaged
    /// domination.
    fn ii_matrix() -> ComplexMatrix {
        ComplexMatrix::from_rows(2, &[c64(0.0, 1.0), c64(0.0, 1.0), c64(0.0, 0.0), c64(0.0, 0.0)])
            .unwrap()
    }

    #[test]
    fn thm3_fails_on_the_shift_with_frozen_margin() {
        let r = check_thm3(&shift2(), None).unwrap();
        assert!(!r.passed);
        let expect = (1.0 - 2.0_f64.sqrt()) / 2.0;
        assert!((r.margin - expect).abs() < 1e-12, "margin {}", r.margin);
        assert!(r.witness.is_some());
    }

    #[test]
    fn thm3_holds_on_normal_draws() {
        for seed in 0..10u64 {
            let t = gen_matrix(MatrixKind::Normal, 4, seed).unwrap();
            let r = check_thm3(&t, None).unwrap();
            assert!(r.passed, "seed {seed}: margin {}", r.margin);
        }
    }

    #[test]
    fn prop03_frozen_failure_on_the_shift() {
        let r = check_prop03(&shift2(), None).unwrap();
        assert!(!r.passed);
        let expect = (1.0 - 5.0_f64.sqrt()) / 2.0;
        assert!((r.margin - expect).abs() < 1e-12, "margin {}", r.margin);
    }

    #[test]
    fn sv_semihypo_holds_for_arbitrary_matrices() {
        for seed in 0..10u64 {
            let t = gen_matrix(MatrixKind::Ginibre, 5, seed).unwrap();
            let r = check_sv_semihypo(&t, None).unwrap();
            assert!(r.margin >= -1e-12, "seed {seed}: margin {}", r.margin);
        }
    }

    #[test]
    fn svamgm_counterexample_reproduces() {
        let r = check_counterexample_svamgm(&ii_matrix(), None).unwrap();
        assert!(!r.passed);
        // s_2(Re T) = 1/2 against (sqrt2 - 1)/2: margin (sqrt2 - 2)/2.
        let expect = (2.0_f64.sqrt() - 2.0) / 2.0;
        assert!((r.margin - expect).abs() < 1e-12, "margin {}", r.margin);
        let notes = r.notes.unwrap();
        assert!(notes.contains("direct-sum reading"), "{notes}");
    }

    #[test]
    fn svamgm_direct_sum_reading_survives_the_instance() {
        let t = ii_matrix();
        let abs = abs_op(&t).unwrap();
        let abs_star = abs_adj(&t).unwrap();
        let sv_r = singular_values(real_part(&t).base()).unwrap();
        let sv_dsum = singular_values(direct_sum_h(&abs, &abs_star).base()).unwrap();
        // 1/2 s_2 of the direct sum is sqrt2/2 > 1/2 = s_2(Re T).
        assert!((0.5 * sv_dsum[1] - 2.0_f64.sqrt() / 2.0).abs() < 1e-12);
        assert!(0.5 * sv_dsum[1] > sv_r[1]);
    }

    #[test]
    fn ab_equiv_is_tight_at_the_profile_constants() {
        let r = check_ab_equiv(&lower2(), None).unwrap();
        assert!(r.passed, "margin {}", r.margin);
        assert!(r.margin.abs() < 1e-9, "tightness violated: {}", r.margin);
        for seed in 0..5u64 {
            let t = gen_matrix(MatrixKind::Invertible, 4, seed).unwrap();
            let r = check_ab_equiv(&t, None).unwrap();
            assert!(r.passed, "seed {seed}: margin {}", r.margin);
        }
    }

    #[test]
    fn ab_equiv_rejects_singular_input() {
        assert!(matches!(
            check_ab_equiv(&shift2(), None),
            Err(LabError::IllConditioned { .. })
        ));
    }

    #[test]
    fn thm28_and_mean_sigma_hold_on_spread_instances() {
        let r = check_thm28(&lower2(), None).unwrap();
        assert!(r.passed, "margin {}", r.margin);
        for seed in 0..5u64 {
            let t = gen_matrix(MatrixKind::Invertible, 3, seed).unwrap();
            assert!(check_thm28(&t, None).unwrap().passed, "seed {seed}");
            for w in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let spec = MeanSpec::weighted(w).unwrap();
                let r = check_mean_sigma(&t, &spec, None).unwrap();
                assert!(r.passed, "seed {seed} w {w}: margin {}", r.margin);
                assert!(r.notes.is_none(), "routes disagreed: {:?}", r.notes);
            }
            let arith = MeanSpec::named("arith").unwrap();
            assert!(check_mean_sigma(&t, &arith, None).unwrap().passed);
        }
    }

    #[test]
    fn mean_sigma_id_carries_the_parameter() {
        let t = lower2();
        let spec = MeanSpec::weighted(0.25).unwrap();
        let r = check_mean_sigma(&t, &spec, None).unwrap();
        assert_eq!(r.check_id, "mean_sigma:0.25");
    }

    #[test]
    fn thm15_frozen_example() {
        let t = lower2();
        let r = check_thm15(&t, None).unwrap();
        assert!(r.passed, "margin {}", r.margin);

        // Bound matrices agree with the worked 2x2 instance to the printed
        // precision: sqrt((1+beta^2)/2)|T| has top-left ~ 1.8046.
        let p = alpha_beta_profile(&t).unwrap();
        let c_abs = ((1.0 + p.beta * p.beta) / 2.0).sqrt();
        let b = abs_op(&t).unwrap().scale(c_abs);
        assert!((b.get(0, 0).re - 1.8043).abs() < 5e-4, "{}", b.get(0, 0).re);
        assert!((b.get(0, 1).re - 0.6014).abs() < 5e-4);
        let c_star = ((1.0 + p.alpha * p.alpha) / (2.0 * p.alpha * p.alpha)).sqrt();
        let bs = abs_adj(&t).unwrap().scale(c_star);
        assert!((bs.get(0, 0).re - 1.2028).abs() < 5e-4, "{}", bs.get(0, 0).re);
        assert!((bs.get(1, 1).re - 1.8043).abs() < 5e-4);

        // |Re T| is exactly [[1, .5],[.5, 1]] here.
        let abs_re = abs_op(real_part(&t).base()).unwrap();
        assert!(abs_re.base().max_abs_diff(
            HermitianMatrix::from_real_rows(2, &[1.0, 0.5, 0.5, 1.0]).unwrap().base()
        ) < 1e-12);
    }

    #[test]
    fn thm23_holds_for_arbitrary_pairs() {
        for seed in 0..6u64 {
            let s = gen_matrix(MatrixKind::Ginibre, 3, seed).unwrap();
            let t = gen_matrix(MatrixKind::Ginibre, 3, seed + 100).unwrap();
            for pair in [FnPair::sqrt(), FnPair::power(0.0).unwrap(), FnPair::power(0.7).unwrap()] {
                let r = check_thm23(&s, &t, &pair, None).unwrap();
                assert!(r.passed, "seed {seed} {}: margin {}", pair.label(), r.margin);
            }
        }
    }

    #[test]
    fn remark18_family_holds() {
        for seed in 0..6u64 {
            let s = gen_matrix(MatrixKind::Ginibre, 3, seed).unwrap();
            let t = gen_matrix(MatrixKind::Ginibre, 3, seed + 50).unwrap();
            let r = check_remark18(&s, &t, &FnPair::sqrt(), None).unwrap();
            assert!(r.passed, "seed {seed}: margin {}", r.margin);
            let r = check_remark18(&s, &t, &FnPair::power(0.3).unwrap(), None).unwrap();
            assert!(r.passed, "seed {seed}: margin {}", r.margin);
        }
    }

    // Draws that once drove the family negative through an overstated
    // one-operator route; every surviving route must clear them.
    #[test]
    fn remark18_holds_on_previously_tight_draws() {
        let cases: &[(u64, f64)] = &[
            (70, 0.25),
            (95, 0.5),
            (175, 0.5),
            (198, 0.5),
            (211, 0.5),
            (265, 0.25),
            (270, 0.5),
            (481, 0.5),
        ];
        for &(i, p) in cases {
            let n = 2 + (i as usize % 5);
            let s = gen_matrix(MatrixKind::Ginibre, n, mix_seed(701, &[i, 0])).unwrap();
            let t = gen_matrix(MatrixKind::Ginibre, n, mix_seed(701, &[i, 1])).unwrap();
            let pair = FnPair::power(p).unwrap();
            let r = check_remark18(&s, &t, &pair, None).unwrap();
            assert!(r.passed, "trial {i} {}: margin {}", pair.label(), r.margin);
        }
    }

    // With `S = I` the mean in the imaginary-part route degenerates: the
    // general-`S` evaluation (mean against the identity Gram) must land on
    // the closed square-root reduction up to the mean's shift policy.
    #[test]
    fn remark18_identity_reduction_matches_general_route() {
        for seed in 0..8u64 {
            let n = 2 + (seed as usize % 4);
            let t = gen_matrix(MatrixKind::Ginibre, n, mix_seed(704, &[seed])).unwrap();
            let pair = FnPair::sqrt();
            let abs_t_star = abs_adj(&t).unwrap();
            let g2_star = matrix_function(&abs_t_star, |x| {
                let v = pair.g(x);
                v * v
            })
            .unwrap();
            let eye = HermitianMatrix::identity(n);
            let via_mean = geometric_mean(&g2_star, &eye).unwrap().value;
            let closed = matrix_function(&abs_t_star, |x| pair.g(x)).unwrap();
            let scale = closed.base().norm_fro().max(1.0);
            assert!(
                via_mean.base().max_abs_diff(closed.base()) < 1e-4 * scale,
                "seed {seed}: mean against identity strayed from the square root"
            );
        }
    }

    #[test]
    fn cor_sum_holds_for_quadruples() {
        for seed in 0..4u64 {
            let m: Vec<ComplexMatrix> = (0..4)
                .map(|i| gen_matrix(MatrixKind::Ginibre, 3, seed * 10 + i).unwrap())
                .collect();
            let r = check_cor_sum(&m[0], &m[1], &m[2], &m[3], &FnPair::sqrt(), None).unwrap();
            assert!(r.passed, "seed {seed}: margin {}", r.margin);
            let r = check_cor_sum(&m[0], &m[1], &m[2], &m[3], &FnPair::power(0.25).unwrap(), None)
                .unwrap();
            assert!(r.passed, "seed {seed}: margin {}", r.margin);
        }
    }

    #[test]
    fn cor19_grid_and_range_gate() {
        let s = gen_matrix(MatrixKind::Ginibre, 3, 3).unwrap();
        let t = gen_matrix(MatrixKind::Ginibre, 3, 4).unwrap();
        for tp in [0.0, 0.5, 1.0, 1.5] {
            for vp in [0.0, 1.5] {
                let r = check_cor19(&s, &t, tp, vp, None).unwrap();
                assert!(r.passed, "tp {tp} vp {vp}: margin {}", r.margin);
            }
        }
        assert!(matches!(
            check_cor19(&s, &t, 1.6, 0.0, None),
            Err(LabError::ParamRange { .. })
        ));
        let x = gen_matrix(MatrixKind::Ginibre, 4, 9).unwrap();
        let r = check_cor19_cartesian(&x, 1.0, 0.5, None).unwrap();
        assert!(r.passed, "margin {}", r.margin);
    }

    #[test]
    fn cor19_exponent_zero_uses_identity_convention() {
        // Even for a singular S, |S|^0 is the identity.
        let s = shift2();
        let p = h_pow(&abs_op(&s).unwrap(), 0.0).unwrap();
        assert!(p.base().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        let t = gen_matrix(MatrixKind::Ginibre, 2, 8).unwrap();
        let r = check_cor19(&s, &t, 0.0, 1.0, None).unwrap();
        assert!(r.passed, "margin {}", r.margin);
    }

    #[test]
    fn sing_remarks_and_cor_sing_st_hold() {
        for seed in 0..5u64 {
            let s = gen_matrix(MatrixKind::Ginibre, 3, seed).unwrap();
            let t = gen_matrix(MatrixKind::Ginibre, 3, seed + 70).unwrap();
            let r = check_sing_remarks(&s, &t, &FnPair::sqrt(), None).unwrap();
            assert!(r.passed, "seed {seed}: margin {}", r.margin);
            for pair in [FnPair::power(0.0).unwrap(), FnPair::sqrt(), FnPair::power(1.0).unwrap()] {
                let r = check_cor_sing_st(&s, &t, &pair, None).unwrap();
                assert!(r.passed, "seed {seed} {}: margin {}", pair.label(), r.margin);
            }
        }
    }

    #[test]
    fn fn_pair_parsing_and_labels() {
        assert_eq!(FnPair::parse("sqrt").unwrap(), FnPair::Sqrt);
        assert_eq!(FnPair::parse("power:0.25").unwrap(), FnPair::Power { t: 0.25 });
        assert!(matches!(FnPair::parse("power:1.5"), Err(LabError::ParamRange { .. })));
        assert!(matches!(FnPair::parse("cube"), Err(LabError::Usage(_))));
        assert_eq!(FnPair::Power { t: 0.25 }.label(), "power:0.25");
        // f g = identity on a sample of points, for both families.
        for pair in [FnPair::Sqrt, FnPair::Power { t: 0.3 }] {
            for x in [0.0, 0.5, 1.0, 7.25] {
                assert!((pair.f(x) * pair.g(x) - x).abs() <= 1e-12 * x.max(1.0));
            }
        }
    }
}
