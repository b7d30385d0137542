//! Operator-class predicates, the `(alpha, beta)` spread profile, and the
//! seeded random-matrix generators used by every falsification corpus.
//!
//! A word on the "one-sided" classes: in finite dimension both
//! `|T*| <= |T|` and `|T|^2 <= |T*|^2` force `T` to be normal, because the
//! difference of the two sides always has trace zero, and a trace-zero PSD
//! matrix is zero. The predicates are still exposed separately — their
//! margins measure *how far* a matrix is from each one-sided order, and the
//! hypotheses they encode are meaningful for the inequalities downstream —
//! but any corpus of matrices that genuinely satisfies one of them is, up to
//! tolerance, a corpus of normal matrices. Tests that "exercise the
//! semi-hyponormal case" therefore draw from the normal generator by design.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{LabError, Result};
use crate::matrix::{abs_op, hermitian_eig, HermitianMatrix, ComplexMatrix};

/// Condition-number cap on `|T|` beyond which the spread profile is refused.
pub const COND_CAP: f64 = 1e8;

/// Rejection-sampling condition cap for the `invertible` generator.
pub const GEN_COND_CAP: f64 = 1e4;

/// Outcome of a single class predicate: `holds` iff `margin >= -tol`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassTest {
    pub holds: bool,
    pub margin: f64,
    pub tol: f64,
}

impl ClassTest {
    fn from_margin(margin: f64, tol: f64) -> Self {
        Self {
            holds: margin >= -tol,
            margin,
            tol,
        }
    }
}

/// Best constants `alpha <= 1 <= beta` with
/// `alpha^2 T*T <= TT* <= beta^2 T*T`, plus the condition number of `|T|`
/// that was accepted to compute them.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AlphaBetaProfile {
    pub alpha: f64,
    pub beta: f64,
    pub cond_abs: f64,
}

/// Classification verdict: the most specific class that holds, its margin,
/// and the spread constants when `|T|` is well-conditioned enough to give
/// them meaning.
#[derive(Debug, Clone, Serialize)]
pub struct ClassVerdict {
    pub class: String,
    pub margin: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

fn sq_scale(t: &ComplexMatrix) -> f64 {
    let n = t.norm_fro();
    (n * n).max(1.0)
}

/// Normality test: margin is minus the Frobenius defect `||T*T - TT*||`.
pub fn is_normal(t: &ComplexMatrix, tol: Option<f64>) -> Result<ClassTest> {
    let defect = (&(&t.adjoint() * t) - &(t * &t.adjoint())).norm_fro();
    let tol = tol.unwrap_or(1e-8 * sq_scale(t));
    if tol < 0.0 {
        return Err(LabError::ParamRange {
            name: "tol".into(),
            value: tol,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    Ok(ClassTest::from_margin(-defect, tol))
}

/// One-sided order on the absolute values: `|T*| <= |T|`. Margin is the
/// smallest eigenvalue of `|T| - |T*|`. See the module note on collapse.
pub fn is_semi_hyponormal(t: &ComplexMatrix, tol: Option<f64>) -> Result<ClassTest> {
    let diff = abs_op(t)?.sub(&abs_op(&t.adjoint())?);
    let margin = hermitian_eig(&diff)?.min_eig();
    let tol = tol.unwrap_or(1e-8 * t.norm_fro().max(1.0));
    Ok(ClassTest::from_margin(margin, tol))
}

/// One-sided order on the squares: `|T|^2 <= |T*|^2`, i.e. `TT* - T*T` is
/// PSD. Margin is the smallest eigenvalue of that commutator. See the
/// module note on collapse.
pub fn is_hyponormal(t: &ComplexMatrix, tol: Option<f64>) -> Result<ClassTest> {
    let comm = HermitianMatrix::new(&(&(t * &t.adjoint()) - &(&t.adjoint() * t)))?;
    let margin = hermitian_eig(&comm)?.min_eig();
    let tol = tol.unwrap_or(1e-8 * sq_scale(t));
    Ok(ClassTest::from_margin(margin, tol))
}

/// Computes the spread profile from the spectrum of
/// `M = |T|^{-1} (TT*) |T|^{-1}`: `alpha = sqrt(min eig)` clamped to at most
/// one, `beta = sqrt(max eig)` clamped to at least one (the clamps absorb
/// rounding; `det M = 1` puts the true extremes on opposite sides of one).
/// Refused with [`LabError::IllConditioned`] when `|T|` is singular or its
/// condition number exceeds [`COND_CAP`].
pub fn alpha_beta_profile(t: &ComplexMatrix) -> Result<AlphaBetaProfile> {
    let abs_t = abs_op(t)?;
    let eig = hermitian_eig(&abs_t)?;
    let (lo, hi) = (eig.min_eig(), eig.max_eig());
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond <= COND_CAP) {
        return Err(LabError::IllConditioned {
            cond,
            cap: COND_CAP,
        });
    }
    let abs_inv = eig.rebuild_with(|x| 1.0 / x)?;
    let tt = t * &t.adjoint();
    let m = HermitianMatrix::new(&(&(abs_inv.base() * &tt) * abs_inv.base()))?;
    let spec = hermitian_eig(&m)?;
    Ok(AlphaBetaProfile {
        alpha: spec.min_eig().max(0.0).sqrt().min(1.0),
        beta: spec.max_eig().max(0.0).sqrt().max(1.0),
        cond_abs: cond,
    })
}

/// Picks the most specific class in the order
/// normal > semi-hyponormal > hyponormal > alpha-beta-normal > none.
///
/// The verdict's margin is the matched predicate's margin; for
/// `alpha-beta-normal` it is the residual of the two-sided bound at the
/// computed constants (zero up to rounding, by construction); for `none` it
/// is the best margin among the failed predicates.
pub fn classify(t: &ComplexMatrix, tol: Option<f64>) -> Result<ClassVerdict> {
    let profile = match alpha_beta_profile(t) {
        Ok(p) => Some(p),
        Err(LabError::IllConditioned { .. }) => None,
        Err(e) => return Err(e),
    };
    let (alpha, beta) = match &profile {
        Some(p) => (Some(p.alpha), Some(p.beta)),
        None => (None, None),
    };

    let normal = is_normal(t, tol)?;
    if normal.holds {
        return Ok(ClassVerdict {
            class: "normal".into(),
            margin: normal.margin,
            alpha,
            beta,
        });
    }
    let semi = is_semi_hyponormal(t, tol)?;
    if semi.holds {
        return Ok(ClassVerdict {
            class: "semi-hyponormal".into(),
            margin: semi.margin,
            alpha,
            beta,
        });
    }
    let hypo = is_hyponormal(t, tol)?;
    if hypo.holds {
        return Ok(ClassVerdict {
            class: "hyponormal".into(),
            margin: hypo.margin,
            alpha,
            beta,
        });
    }
    if let Some(p) = profile {
        // Residual of alpha^2 T*T <= TT* <= beta^2 T*T at the computed
        // constants; nonnegative up to rounding.
        let tstar_t = HermitianMatrix::new(&(&t.adjoint() * t))?;
        let t_tstar = HermitianMatrix::new(&(t * &t.adjoint()))?;
        let lower = hermitian_eig(&t_tstar.sub(&tstar_t.scale(p.alpha * p.alpha)))?.min_eig();
        let upper = hermitian_eig(&tstar_t.scale(p.beta * p.beta).sub(&t_tstar))?.min_eig();
        return Ok(ClassVerdict {
            class: "alpha-beta-normal".into(),
            margin: lower.min(upper),
            alpha,
            beta,
        });
    }
    Ok(ClassVerdict {
        class: "none".into(),
        margin: normal.margin.max(semi.margin).max(hypo.margin),
        alpha,
        beta,
    })
}

/// Families the corpus generator can draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    /// Independent complex Gaussian entries, unit variance.
    Ginibre,
    /// Haar-rotated complex diagonal: exactly normal up to rounding.
    Normal,
    /// Gram matrix `X*X` plus a small multiple of the identity.
    Psd,
    /// Haar-distributed unitary (QR of a Ginibre draw, phases fixed).
    Unitary,
    /// Ginibre draw rejection-sampled to condition number at most 1e4.
    Invertible,
}

impl MatrixKind {
    pub const ALL: [MatrixKind; 5] = [
        MatrixKind::Ginibre,
        MatrixKind::Normal,
        MatrixKind::Psd,
        MatrixKind::Unitary,
        MatrixKind::Invertible,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MatrixKind::Ginibre => "ginibre",
            MatrixKind::Normal => "normal",
            MatrixKind::Psd => "psd",
            MatrixKind::Unitary => "unitary",
            MatrixKind::Invertible => "invertible",
        }
    }

    fn kind_id(&self) -> u64 {
        match self {
            MatrixKind::Ginibre => 0,
            MatrixKind::Normal => 1,
            MatrixKind::Psd => 2,
            MatrixKind::Unitary => 3,
            MatrixKind::Invertible => 4,
        }
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MatrixKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        MatrixKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                LabError::Usage(format!(
                    "unknown corpus '{s}' (expected one of: ginibre, normal, psd, unitary, invertible)"
                ))
            })
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines a base seed with context values (kind, dimension, trial index)
/// into an independent stream seed. Deterministic across platforms.
pub fn mix_seed(base: u64, parts: &[u64]) -> u64 {
    let mut s = splitmix(base);
    for &p in parts {
        s = splitmix(s ^ p);
    }
    s
}

fn ginibre_from(rng: &mut ChaCha12Rng, n: usize) -> ComplexMatrix {
    let m = ComplexMatrix::from_fn(n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
    .expect("gaussian entries are finite");
    m.scale_re(std::f64::consts::FRAC_1_SQRT_2)
}

fn haar_unitary_from(rng: &mut ChaCha12Rng, n: usize) -> ComplexMatrix {
    let g = ginibre_from(rng, n);
    let qr = g.raw().clone().qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix the phase gauge so the distribution is Haar: scale each column of
    // Q by the unit conjugate phase of the matching diagonal entry of R.
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d.conj() / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_dmatrix(q).expect("unitary factor is square and finite")
}

/// Draws a matrix of the given family. The stream is keyed by
/// `(seed, kind, n)`, so the same triple always reproduces the same matrix
/// and different kinds or dimensions never share draws.
pub fn gen_matrix(kind: MatrixKind, n: usize, seed: u64) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(LabError::ParamRange {
            name: "n".into(),
            value: 0.0,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(seed, &[kind.kind_id(), n as u64]));
    match kind {
        MatrixKind::Ginibre => Ok(ginibre_from(&mut rng, n)),
        MatrixKind::Normal => {
            let u = haar_unitary_from(&mut rng, n);
            let d = ComplexMatrix::from_fn(n, |i, j| {
                if i == j {
                    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .expect("diagonal entries are finite");
            Ok(&(&u * &d) * &u.adjoint())
        }
        MatrixKind::Psd => {
            let x = ginibre_from(&mut rng, n);
            let gram = &x.adjoint() * &x;
            let shifted = HermitianMatrix::new(&gram)?.shift(1e-6 * gram.norm_fro());
            Ok(shifted.base().clone())
        }
        MatrixKind::Unitary => Ok(haar_unitary_from(&mut rng, n)),
        MatrixKind::Invertible => {
            for _ in 0..100 {
                let x = ginibre_from(&mut rng, n);
                let sv = crate::matrix::singular_values(&x)?;
                let (hi, lo) = (sv[0], sv[n - 1]);
                if lo > 0.0 && hi / lo <= GEN_COND_CAP {
                    return Ok(x);
                }
            }
            Err(LabError::NonConvergence(
                "no draw met the condition cap within 100 attempts".into(),
            ))
        }
    }
}

/// Convenience wrapper: a strictly positive Hermitian draw.
pub fn gen_psd(n: usize, seed: u64) -> Result<HermitianMatrix> {
    HermitianMatrix::new(&gen_matrix(MatrixKind::Psd, n, seed)?)
}
