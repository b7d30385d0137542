//! Two-by-two operator block forms and the positivity criteria built on them.
//!
//! A [`BlockForm`] stores the Hermitian corners `A` (top-left) and `B`
//! (bottom-right) together with the bottom-left block `C`; assembly always
//! produces the Hermitian matrix
//!
//! ```text
//! [ A   C* ]
//! [ C   B  ]
//! ```
//!
//! Positivity of that matrix is equivalent to each of several classical
//! criteria (corner swap, Schur complement, the scalar Cauchy-Schwarz test),
//! and the checks here verify those equivalences numerically instead of
//! trusting any single route.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::matrix::{
    abs_adj, abs_op, direct_sum, hermitian_eig, loewner_leq, matrix_function, psd_check,
    singular_values, ComplexMatrix, HermitianMatrix, PsdVerdict,
};
use crate::means::geometric_mean;
use crate::report::{digest, CheckReport};

/// Two-by-two block form with Hermitian diagonal corners.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockForm {
    pub a: HermitianMatrix,
    pub b: HermitianMatrix,
    pub c: ComplexMatrix,
}

impl BlockForm {
    pub fn new(a: HermitianMatrix, b: HermitianMatrix, c: ComplexMatrix) -> Result<Self> {
        if a.dim() != b.dim() || a.dim() != c.dim() {
            return Err(LabError::DimensionMismatch {
                left: a.dim(),
                right: b.dim().max(c.dim()),
            });
        }
        Ok(Self { a, b, c })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// The swapped form `[[B, C],[C*, A]]`, positive iff the original is.
    pub fn swapped(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
            c: self.c.adjoint(),
        }
    }

    fn fro_scale(&self) -> f64 {
        self.a
            .base()
            .norm_fro()
            .max(self.b.base().norm_fro())
            .max(self.c.norm_fro())
            .max(1.0)
    }
}

/// Assembles the 2n x 2n Hermitian matrix `[[A, C*],[C, B]]`.
pub fn assemble(bf: &BlockForm) -> HermitianMatrix {
    let n = bf.dim();
    let m = ComplexMatrix::from_fn(2 * n, |i, j| {
        if i < n && j < n {
            bf.a.get(i, j)
        } else if i >= n && j >= n {
            bf.b.get(i - n, j - n)
        } else if i < n {
            // top-right: C*
            bf.c.get(j - n, i).conj()
        } else {
            bf.c.get(i - n, j)
        }
    })
    .expect("assembled block is well-formed");
    HermitianMatrix::new(&m).expect("assembled block is Hermitian by construction")
}

/// PSD test of the assembled block via full eigendecomposition.
pub fn block_psd(bf: &BlockForm, tol: Option<f64>) -> Result<PsdVerdict> {
    psd_check(&assemble(bf), tol)
}

/// Corner-swap equivalence: the verdicts for `[[A, C*],[C, B]]` and
/// `[[B, C],[C*, A]]` must agree. Returns that agreement.
pub fn swap_check(bf: &BlockForm, tol: Option<f64>) -> Result<bool> {
    let v1 = block_psd(bf, tol)?;
    let v2 = block_psd(&bf.swapped(), tol)?;
    Ok(v1.is_psd == v2.is_psd)
}

/// Schur-complement route: with `B` strictly positive, the block is PSD
/// exactly when `C* B^{-1} C <= A`. Returns the Loewner verdict of that
/// comparison.
///
/// Note the orientation: `C` is the *bottom-left* block here, so the
/// complement reads `C* B^{-1} C`, not `C B^{-1} C*`; the latter belongs to
/// the convention that stores the top-right block.
pub fn schur_test(bf: &BlockForm, tol: Option<f64>) -> Result<PsdVerdict> {
    let eig_b = hermitian_eig(&bf.b)?;
    let norm_b = eig_b.max_eig().abs().max(eig_b.min_eig().abs());
    if eig_b.min_eig() <= 1e-8 * norm_b.max(1.0) {
        return Err(LabError::SingularBlock {
            min_eig: eig_b.min_eig(),
        });
    }
    let b_inv = eig_b.rebuild_with(|x| 1.0 / x)?;
    let prod = &(&bf.c.adjoint() * b_inv.base()) * &bf.c;
    let lhs = HermitianMatrix::new(&prod)?;
    loewner_leq(&lhs, &bf.a, tol)
}

fn hermitian_c(bf: &BlockForm) -> Result<HermitianMatrix> {
    HermitianMatrix::new(&bf.c).map_err(|_| {
        LabError::Precondition("lemma requires a self-adjoint off-diagonal block".into())
    })
}

/// Geometric-mean consequence: a PSD block with self-adjoint `C` forces
/// `+-C <= A # B`. Default tolerance `1e-7 * scale` (a mean was consumed).
pub fn lemma4_consequence(bf: &BlockForm, tol: Option<f64>) -> Result<CheckReport> {
    let c = hermitian_c(bf)?;
    let v = block_psd(bf, None)?;
    if !v.is_psd {
        return Err(LabError::Precondition(format!(
            "block is not PSD (min eig {:.3e})",
            v.min_eig
        )));
    }
    let mean = geometric_mean(&bf.a, &bf.b)?;
    let up = loewner_leq(&c, &mean.value, Some(f64::INFINITY))?;
    let dn = loewner_leq(&c.scale(-1.0), &mean.value, Some(f64::INFINITY))?;
    let margin = up.min_eig.min(dn.min_eig);
    let tol = tol.unwrap_or(1e-7 * bf.fro_scale());
    Ok(CheckReport::from_margin(
        "lemma4",
        digest(bf),
        margin,
        tol,
        || serde_json::json!({ "block": bf }),
    ))
}

/// Mean of two PSD blocks sharing `C`: `[[A1 # A2, C*],[C, B1 # B2]]` stays
/// PSD. Requires both inputs PSD and identical `C`.
pub fn lemma16_check(bf1: &BlockForm, bf2: &BlockForm, tol: Option<f64>) -> Result<CheckReport> {
    if bf1.dim() != bf2.dim() {
        return Err(LabError::DimensionMismatch {
            left: bf1.dim(),
            right: bf2.dim(),
        });
    }
    let c_gap = bf1.c.max_abs_diff(&bf2.c);
    if c_gap > 1e-13 * bf1.c.norm_fro().max(1.0) {
        return Err(LabError::Precondition(format!(
            "blocks must share C (gap {c_gap:.3e})"
        )));
    }
    for (label, bf) in [("first", bf1), ("second", bf2)] {
        let v = block_psd(bf, None)?;
        if !v.is_psd {
            return Err(LabError::Precondition(format!(
                "{label} block is not PSD (min eig {:.3e})",
                v.min_eig
            )));
        }
    }
    let ga = geometric_mean(&bf1.a, &bf2.a)?;
    let gb = geometric_mean(&bf1.b, &bf2.b)?;
    let mixed = BlockForm::new(ga.value, gb.value, bf1.c.clone())?;
    let v = block_psd(&mixed, Some(f64::INFINITY))?;
    let tol = tol.unwrap_or(1e-7 * bf1.fro_scale().max(bf2.fro_scale()));
    Ok(CheckReport::from_margin(
        "lemma16",
        digest(&(bf1, bf2)),
        v.min_eig,
        tol,
        || serde_json::json!({ "first": bf1, "second": bf2 }),
    ))
}

fn random_unit(rng: &mut ChaCha12Rng, n: usize) -> DVector<Complex64> {
    let v = DVector::from_fn(n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

fn vec_json(v: &DVector<Complex64>) -> serde_json::Value {
    serde_json::json!(v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
}

/// Scalar Cauchy-Schwarz test: for PSD `A`, `B`, the block is PSD iff
/// `|<Cx, y>|^2 <= <Ax, x> <By, y>` for all vectors.
///
/// When the assembled block is PSD this samples `trials` seeded unit pairs
/// and reports the smallest slack. When it is not, the most negative
/// eigenvector is split into halves, which provably yields a violating pair;
/// that pair is reported as the witness.
pub fn lemma20_spot(bf: &BlockForm, trials: usize, seed: u64) -> Result<CheckReport> {
    for (label, h) in [("A", &bf.a), ("B", &bf.b)] {
        let v = psd_check(h, None)?;
        if !v.is_psd {
            return Err(LabError::Precondition(format!(
                "{label} must be PSD (min eig {:.3e})",
                v.min_eig
            )));
        }
    }
    let n = bf.dim();
    let scale = (bf.a.base().norm_fro() * bf.b.base().norm_fro())
        .max(bf.c.norm_fro() * bf.c.norm_fro())
        .max(1.0);
    let tol = 1e-9 * scale;

    let slack = |x: &DVector<Complex64>, y: &DVector<Complex64>| -> f64 {
        let ax = bf.a.quad_form(x);
        let by = bf.b.quad_form(y);
        let cxy = y.dotc(&bf.c.mul_vec(x));
        ax * by - cxy.norm_sqr()
    };

    let v = block_psd(bf, None)?;
    let mut best = f64::INFINITY;
    let mut best_pair: Option<(DVector<Complex64>, DVector<Complex64>)> = None;
    let mut push = |x: DVector<Complex64>, y: DVector<Complex64>, s: f64, best: &mut f64| {
        if s < *best {
            *best = s;
            best_pair = Some((x, y));
        }
    };

    if !v.is_psd {
        // Split the failing eigenvector; both halves are nonzero when A and
        // B are PSD, and the normalized pair violates the scalar bound.
        let eig = hermitian_eig(&assemble(bf))?;
        let u = eig.vectors.raw().column(0).into_owned();
        let x = DVector::from_fn(n, |i, _| u[i]);
        let y = DVector::from_fn(n, |i, _| u[n + i]);
        if x.norm() > 1e-12 && y.norm() > 1e-12 {
            let x = &x / Complex64::new(x.norm(), 0.0);
            let y = &y / Complex64::new(y.norm(), 0.0);
            let s = slack(&x, &y);
            push(x, y, s, &mut best);
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let x = random_unit(&mut rng, n);
        let y = random_unit(&mut rng, n);
        let s = slack(&x, &y);
        push(x, y, s, &mut best);
    }

    let mut report = CheckReport::from_margin("lemma20", digest(bf), best, tol, || {
        let (x, y) = best_pair.as_ref().expect("a pair was evaluated");
        serde_json::json!({ "block": bf, "x": vec_json(x), "y": vec_json(y) })
    });
    if !v.is_psd && report.passed {
        // Should be unreachable: a non-PSD block must produce a violation.
        report = report.with_notes(
            "block reported non-PSD but no violating vector pair was found".into(),
        );
    }
    Ok(report)
}

/// Singular-value consequence of block positivity:
/// `s_j(C) <= s_j(A (+) B)` for `j = 1..n`.
pub fn lemma0_check(bf: &BlockForm, tol: Option<f64>) -> Result<CheckReport> {
    let v = block_psd(bf, None)?;
    if !v.is_psd {
        return Err(LabError::Precondition(format!(
            "block is not PSD (min eig {:.3e})",
            v.min_eig
        )));
    }
    let sv_c = singular_values(&bf.c)?;
    let sv_ab = singular_values(&direct_sum(bf.a.base(), bf.b.base()))?;
    let margin = sv_c
        .iter()
        .enumerate()
        .map(|(j, s)| sv_ab[j] - s)
        .fold(f64::INFINITY, f64::min);
    let tol = tol.unwrap_or(1e-8 * bf.fro_scale());
    Ok(CheckReport::from_margin(
        "lemma0",
        digest(bf),
        margin,
        tol,
        || serde_json::json!({ "block": bf }),
    ))
}

/// Sharper singular-value consequence: `2 s_j(C) <= s_j([[A, C*],[C, B]])`.
pub fn tao_check(bf: &BlockForm, tol: Option<f64>) -> Result<CheckReport> {
    let v = block_psd(bf, None)?;
    if !v.is_psd {
        return Err(LabError::Precondition(format!(
            "block is not PSD (min eig {:.3e})",
            v.min_eig
        )));
    }
    let sv_c = singular_values(&bf.c)?;
    let sv_m = singular_values(assemble(bf).base())?;
    let margin = sv_c
        .iter()
        .enumerate()
        .map(|(j, s)| sv_m[j] - 2.0 * s)
        .fold(f64::INFINITY, f64::min);
    let tol = tol.unwrap_or(1e-8 * bf.fro_scale());
    Ok(CheckReport::from_margin(
        "tao",
        digest(bf),
        margin,
        tol,
        || serde_json::json!({ "block": bf }),
    ))
}

/// Builds the positive block `[[f^2(|T|), T*S*],[ST, S g^2(|T*|) S*]]` for a
/// function pair with `f(t) g(t) = t` on the spectrum of `|T|`.
///
/// The pair is validated pointwise on that spectrum: nonnegativity of `f`
/// and `g`, and `|f(t)g(t) - t| <= 1e-10 * max(1, t)`. Violations surface as
/// [`LabError::FgMismatch`].
pub fn lemma6_block(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
) -> Result<BlockForm> {
    if s.dim() != t.dim() {
        return Err(LabError::DimensionMismatch {
            left: s.dim(),
            right: t.dim(),
        });
    }
    let abs_t = abs_op(t)?;
    let eig = hermitian_eig(&abs_t)?;
    for &lam in &eig.eigenvalues {
        let (fv, gv) = (f(lam), g(lam));
        if !fv.is_finite() || !gv.is_finite() || fv < -1e-12 || gv < -1e-12 {
            return Err(LabError::Domain { value: lam });
        }
        let product = fv * gv;
        if (product - lam).abs() > 1e-10 * lam.abs().max(1.0) {
            return Err(LabError::FgMismatch { t: lam, product });
        }
    }

    let a = eig.rebuild_with(|x| f(x) * f(x))?;
    let g2_abs_adj = matrix_function(&abs_adj(t)?, |x| g(x) * g(x))?;
    let b = HermitianMatrix::new(&(&(s * g2_abs_adj.base()) * &s.adjoint()))?;
    let c = s * t;
    BlockForm::new(a, b, c)
}
