//! Operator means of pairs of positive matrices.
//!
//! A mean is evaluated through its representing function `phi` with
//! `phi(1) = 1`:
//!
//! ```text
//! A sigma B = A^{1/2} phi(A^{-1/2} B A^{-1/2}) A^{1/2}
//! ```
//!
//! The weighted geometric mean corresponds to `phi(x) = x^t`. Singular (or
//! nearly singular) inputs are handled by shifting *both* operands by
//! `eps0 * I` with `eps0 = 1e-10 * max(1, ||A||, ||B||)` before inverting;
//! the shift is reported back to the caller so that downstream checks can
//! widen their tolerances. No pseudo-inverse is ever taken.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::matrix::{hermitian_eig, psd_check, HermitianMatrix};

/// Relative size of the symmetric shift applied to singular inputs.
pub const SHIFT_EPS_REL: f64 = 1e-10;

/// Serializable description of an operator mean.
///
/// Two forms exist: an explicit weighted geometric mean with weight
/// `t` in `[0, 1]`, and a named representing function from the registry
/// (`"sqrt"`, `"arith"`, `"power:<t>"`). Normalization `phi(1) = 1` is
/// spot-checked at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum MeanSpec {
    #[serde(rename = "weighted-geometric")]
    WeightedGeometric { t: f64 },
    #[serde(rename = "function")]
    Function { name: String },
}

impl MeanSpec {
    pub fn weighted(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(LabError::ParamRange {
                name: "t",
                value: t,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(Self::WeightedGeometric { t })
    }

    /// Parses a registry name: `sqrt`, `arith`, or `power:<t>`.
    pub fn named(name: &str) -> Result<Self> {
        let spec = Self::Function {
            name: name.to_string(),
        };
        let _ = spec.phi()?; // validates the name, range, and phi(1) = 1
        Ok(spec)
    }

    /// The representing function, with `phi(1) = 1` verified.
    pub fn phi(&self) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        let f: Box<dyn Fn(f64) -> f64 + Send + Sync> = match self {
            Self::WeightedGeometric { t } => {
                let t = *t;
                if !(0.0..=1.0).contains(&t) {
                    return Err(LabError::ParamRange {
                        name: "t",
                        value: t,
                        lo: 0.0,
                        hi: 1.0,
                    });
                }
                Box::new(move |x| x.powf(t))
            }
            Self::Function { name } => match name.as_str() {
                "sqrt" => Box::new(f64::sqrt),
                "arith" => Box::new(|x| 0.5 * (1.0 + x)),
                other => {
                    if let Some(ts) = other.strip_prefix("power:") {
                        let t: f64 = ts.parse().map_err(|_| {
                            LabError::Usage(format!("cannot parse mean power '{ts}'"))
                        })?;
                        if !(0.0..=1.0).contains(&t) {
                            return Err(LabError::ParamRange {
                                name: "power",
                                value: t,
                                lo: 0.0,
                                hi: 1.0,
                            });
                        }
                        Box::new(move |x| x.powf(t))
                    } else {
                        return Err(LabError::Usage(format!(
                            "unknown mean '{other}' (registry: sqrt, arith, power:<t>)"
                        )));
                    }
                }
            },
        };
        let at_one = f(1.0);
        if (at_one - 1.0).abs() > 1e-12 {
            return Err(LabError::Precondition(format!(
                "representing function not normalized: phi(1) = {at_one}"
            )));
        }
        Ok(f)
    }
}

/// A computed mean together with the shift that was applied (0 when the
/// inputs were comfortably positive).
#[derive(Debug, Clone)]
pub struct MeanResult {
    pub value: HermitianMatrix,
    pub shift: f64,
}

/// Geometric mean `A # B`.
pub fn geometric_mean(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<MeanResult> {
    weighted_geometric_mean(a, b, 0.5)
}

/// Weighted geometric mean `A #_t B = A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}`.
pub fn weighted_geometric_mean(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    t: f64,
) -> Result<MeanResult> {
    apply_phi(a, b, &MeanSpec::weighted(t)?.phi()?)
}

/// Evaluates an arbitrary mean described by `spec`.
pub fn mean_apply(spec: &MeanSpec, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<MeanResult> {
    apply_phi(a, b, &spec.phi()?)
}

fn apply_phi(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    phi: &(dyn Fn(f64) -> f64 + Send + Sync),
) -> Result<MeanResult> {
    if a.dim() != b.dim() {
        return Err(LabError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }

    let va = psd_check(a, None)?;
    let vb = psd_check(b, None)?;
    if !va.is_psd || !vb.is_psd {
        return Err(LabError::Precondition(format!(
            "mean requires PSD operands (min eigs {:.3e}, {:.3e})",
            va.min_eig, vb.min_eig
        )));
    }

    let eig_a = hermitian_eig(a)?;
    let eig_b = hermitian_eig(b)?;
    let norm_a = eig_a.min_eig().abs().max(eig_a.max_eig().abs());
    let norm_b = eig_b.min_eig().abs().max(eig_b.max_eig().abs());
    let eps0 = SHIFT_EPS_REL * norm_a.max(norm_b).max(1.0);

    let shifted = eig_a.min_eig() < eps0 || eig_b.min_eig() < eps0;
    let shift = if shifted { eps0 } else { 0.0 };

    // Shifting by eps0*I moves eigenvalues without touching eigenvectors,
    // so the decompositions are reused directly.
    let a_half = eig_a.rebuild_with(|x| (x + shift).sqrt())?;
    let a_inv_half = eig_a.rebuild_with(|x| 1.0 / (x + shift).sqrt())?;
    let b_sh = if shifted { b.shift(eps0) } else { b.clone() };

    let inner = &(a_inv_half.base() * b_sh.base()) * a_inv_half.base();
    let inner_h = HermitianMatrix::new(&inner)?;
    // The congruence keeps the inner matrix PSD in exact arithmetic, but a
    // near-singular A inflates its norm enough that the eigensolver can
    // report tiny negatives; representing functions live on [0, inf), so
    // clamp before applying.
    let phi_inner = crate::matrix::matrix_function(&inner_h, |x| phi(x.max(0.0)))?;
    let value = HermitianMatrix::new(&(&(a_half.base() * phi_inner.base()) * a_half.base()))?;

    Ok(MeanResult { value, shift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{loewner_leq, ComplexMatrix};

    const SQRT5: f64 = 2.236067977499789696;

    fn h2(entries: &[f64; 4]) -> HermitianMatrix {
        HermitianMatrix::from_real_rows(2, entries).unwrap()
    }

    #[test]
    fn diagonal_weighted_means() {
        let a = h2(&[1.0, 0.0, 0.0, 4.0]);
        let b = h2(&[4.0, 0.0, 0.0, 1.0]);
        let m = weighted_geometric_mean(&a, &b, 0.5).unwrap();
        assert_eq!(m.shift, 0.0);
        assert!(m.value.base().max_abs_diff(h2(&[2.0, 0.0, 0.0, 2.0]).base()) < 1e-12);

        // a^{1-t} b^t entrywise on commuting diagonals, t = 1/4.
        let m = weighted_geometric_mean(&a, &b, 0.25).unwrap();
        let s2 = std::f64::consts::SQRT_2;
        assert!(m.value.base().max_abs_diff(h2(&[s2, 0.0, 0.0, 2.0 * s2]).base()) < 1e-12);
    }

    #[test]
    fn geometric_mean_with_identity_is_sqrt() {
        let a = h2(&[2.0, 1.0, 1.0, 1.0]);
        let m = geometric_mean(&a, &HermitianMatrix::identity(2)).unwrap();
        let expect = h2(&[3.0 / SQRT5, 1.0 / SQRT5, 1.0 / SQRT5, 2.0 / SQRT5]);
        assert!(m.value.base().max_abs_diff(expect.base()) < 1e-12);
    }

    #[test]
    fn endpoints_recover_operands() {
        let a = h2(&[2.0, 1.0, 1.0, 1.0]);
        let b = h2(&[3.0, -1.0, -1.0, 2.0]);
        let m0 = weighted_geometric_mean(&a, &b, 0.0).unwrap();
        assert!(m0.value.base().max_abs_diff(a.base()) < 1e-10);
        let m1 = weighted_geometric_mean(&a, &b, 1.0).unwrap();
        assert!(m1.value.base().max_abs_diff(b.base()) < 1e-10);
    }

    #[test]
    fn symmetry_and_weight_flip() {
        let a = h2(&[2.0, 1.0, 1.0, 1.0]);
        let b = h2(&[3.0, -1.0, -1.0, 2.0]);
        let ab = geometric_mean(&a, &b).unwrap();
        let ba = geometric_mean(&b, &a).unwrap();
        assert!(ab.value.base().max_abs_diff(ba.value.base()) < 1e-10);

        let t = 0.3;
        let x = weighted_geometric_mean(&a, &b, t).unwrap();
        let y = weighted_geometric_mean(&b, &a, 1.0 - t).unwrap();
        assert!(x.value.base().max_abs_diff(y.value.base()) < 1e-10);
    }

    #[test]
    fn am_gm_in_loewner_order() {
        let a = h2(&[2.0, 1.0, 1.0, 1.0]);
        let b = h2(&[3.0, -1.0, -1.0, 2.0]);
        let gm = geometric_mean(&a, &b).unwrap().value;
        let am = a.add(&b).scale(0.5);
        assert!(loewner_leq(&gm, &am, Some(1e-10)).unwrap().is_psd);
    }

    #[test]
    fn arith_spec_matches_direct_average() {
        let a = h2(&[2.0, 1.0, 1.0, 1.0]);
        let b = h2(&[3.0, -1.0, -1.0, 2.0]);
        let spec = MeanSpec::named("arith").unwrap();
        let m = mean_apply(&spec, &a, &b).unwrap();
        let direct = a.add(&b).scale(0.5);
        assert!(m.value.base().max_abs_diff(direct.base()) < 1e-10);
    }

    #[test]
    fn power_spec_matches_weighted() {
        let a = h2(&[2.0, 1.0, 1.0, 1.0]);
        let b = h2(&[3.0, -1.0, -1.0, 2.0]);
        let spec = MeanSpec::named("power:0.25").unwrap();
        let via_spec = mean_apply(&spec, &a, &b).unwrap();
        let direct = weighted_geometric_mean(&a, &b, 0.25).unwrap();
        assert!(via_spec.value.base().max_abs_diff(direct.value.base()) < 1e-12);
    }

    #[test]
    fn singular_input_takes_shift() {
        let a = h2(&[1.0, 0.0, 0.0, 0.0]);
        let b = HermitianMatrix::identity(2);
        let m = geometric_mean(&a, &b).unwrap();
        assert!(m.shift > 0.0 && m.shift <= 1.1e-10);
        // Limit value is diag(1, 0); the shift perturbs by about sqrt(eps0).
        assert!((m.value.get(0, 0).re - 1.0).abs() < 1e-5);
        assert!(m.value.get(1, 1).re.abs() < 2e-5);
        assert!(m.value.get(0, 1).norm() < 2e-5);
    }

    #[test]
    fn non_psd_operand_rejected() {
        let a = h2(&[1.0, 0.0, 0.0, -0.5]);
        let b = HermitianMatrix::identity(2);
        assert!(matches!(
            geometric_mean(&a, &b),
            Err(LabError::Precondition(_))
        ));
    }

    #[test]
    fn registry_validation() {
        assert!(MeanSpec::named("sqrt").is_ok());
        assert!(MeanSpec::named("arith").is_ok());
        assert!(MeanSpec::named("power:0.75").is_ok());
        assert!(MeanSpec::named("power:1.5").is_err());
        assert!(MeanSpec::named("harmonic").is_err());
        assert!(MeanSpec::weighted(-0.1).is_err());
        assert!(MeanSpec::weighted(1.01).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let s = serde_json::to_string(&MeanSpec::weighted(0.5).unwrap()).unwrap();
        assert_eq!(s, r#"{"kind":"weighted-geometric","t":0.5}"#);
        let s = serde_json::to_string(&MeanSpec::named("sqrt").unwrap()).unwrap();
        assert_eq!(s, r#"{"kind":"function","name":"sqrt"}"#);
        let back: MeanSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, MeanSpec::named("sqrt").unwrap());
    }

    #[test]
    fn congruence_invariance() {
        let a = h2(&[2.0, 1.0, 1.0, 1.0]);
        let b = h2(&[3.0, -1.0, -1.0, 2.0]);
        // Well-conditioned invertible congruence.
        let x = ComplexMatrix::from_real_rows(2, &[1.0, 0.5, -0.25, 2.0]).unwrap();
        let conj = |h: &HermitianMatrix| {
            HermitianMatrix::new(&(&(&x * h.base()) * &x.adjoint())).unwrap()
        };
        let lhs = conj(&geometric_mean(&a, &b).unwrap().value);
        let rhs = geometric_mean(&conj(&a), &conj(&b)).unwrap().value;
        let scale = lhs.base().norm_fro().max(1.0);
        assert!(lhs.base().max_abs_diff(rhs.base()) < 1e-10 * scale);
    }

    /// Endpoint weights must recover the operands even when the pair has a
    /// wide joint spread (near-singular first operand, dominant inner
    /// eigenvalue) — the regime where a sloppy inner decomposition silently
    /// corrupts the mean.
    #[test]
    fn endpoint_weights_survive_wide_spreads() {
        use crate::classes::{gen_matrix, mix_seed, MatrixKind};
        use crate::matrix::{abs_adj, abs_op};
        for i in [148u64, 3, 77, 212] {
            let t = gen_matrix(MatrixKind::Invertible, 5, mix_seed(601, &[i])).unwrap();
            let a = abs_op(&t).unwrap();
            let b = abs_adj(&t).unwrap();
            let scale = a.base().norm_fro().max(1.0);
            let m1 = weighted_geometric_mean(&a, &b, 1.0).unwrap().value;
            assert!(
                m1.base().max_abs_diff(b.base()) < 1e-11 * scale,
                "seed {i}: weight-1 endpoint off by {:e}",
                m1.base().max_abs_diff(b.base())
            );
            let m0 = weighted_geometric_mean(&a, &b, 0.0).unwrap().value;
            assert!(
                m0.base().max_abs_diff(a.base()) < 1e-11 * scale,
                "seed {i}: weight-0 endpoint off by {:e}",
                m0.base().max_abs_diff(a.base())
            );
        }
    }
}
