//! Dense complex matrices and the spectral toolbox everything else builds on.
//!
//! All matrices here are square and finite; rectangular data never enters the
//! lab. Hermitian matrices get their own wrapper so that downstream code can
//! rely on real spectra without re-checking. Eigenvalue order is ascending
//! everywhere; singular values are descending (s_1 is the largest).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LabError, Result};

/// Relative drift allowed between `M` and `M*` before a matrix is rejected
/// as "not Hermitian" (measured against `max(1, ||M||_F)`).
pub const HERMITIAN_DRIFT_TOL: f64 = 1e-12;

/// Square matrix over `Complex64`, guaranteed finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    m: DMatrix<Complex64>,
}

impl ComplexMatrix {
    /// Builds an `n x n` matrix from row-major entries.
    pub fn from_rows(n: usize, entries: &[Complex64]) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(LabError::Usage(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        let m = DMatrix::from_row_slice(n, n, entries);
        Self::from_dmatrix(m)
    }

    /// Builds from row-major real entries (imaginary parts zero).
    pub fn from_real_rows(n: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_rows(n, &c)
    }

    /// Wraps an owned nalgebra matrix, enforcing squareness and finiteness.
    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(LabError::Usage(format!(
                "matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(LabError::NonFinite);
        }
        Ok(Self { m })
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        Self::from_dmatrix(DMatrix::from_fn(n, n, f))
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    /// Conjugate transpose `M*`.
    pub fn adjoint(&self) -> Self {
        Self {
            m: self.m.adjoint(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { m: &self.m * c }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Frobenius norm; cheap, used for drift and error measures.
    pub fn norm_fro(&self) -> f64 {
        self.m.norm()
    }

    /// Largest absolute entry difference against `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff: dimension mismatch");
        (&self.m - &other.m)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.m * v
    }

    pub(crate) fn raw(&self) -> &DMatrix<Complex64> {
        &self.m
    }
}

// Arithmetic on references; dimension mismatches are programmer errors and
// panic, mirroring the backing library.
impl std::ops::Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "add: dimension mismatch");
        ComplexMatrix {
            m: &self.m + &rhs.m,
        }
    }
}

impl std::ops::Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "sub: dimension mismatch");
        ComplexMatrix {
            m: &self.m - &rhs.m,
        }
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "mul: dimension mismatch");
        ComplexMatrix {
            m: &self.m * &rhs.m,
        }
    }
}

impl std::ops::Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix { m: -&self.m }
    }
}

/// Matrix known to be self-adjoint.
///
/// Construction symmetrizes `(M + M*)/2` after verifying that the drift
/// `||M - M*||` stays below [`HERMITIAN_DRIFT_TOL`] relative to
/// `max(1, ||M||)`; inputs further away are rejected rather than silently
/// repaired.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn new(m: &ComplexMatrix) -> Result<Self> {
        let drift = (&m.m - m.m.adjoint()).norm();
        let scale = m.norm_fro().max(1.0);
        if drift > HERMITIAN_DRIFT_TOL * scale {
            return Err(LabError::Precondition(format!(
                "matrix is not Hermitian: ||M - M*|| = {drift:.3e} exceeds {:.3e}",
                HERMITIAN_DRIFT_TOL * scale
            )));
        }
        let sym = (&m.m + m.m.adjoint()).scale(0.5);
        Ok(Self {
            m: ComplexMatrix::from_dmatrix(sym)?,
        })
    }

    /// Builds from row-major entries, enforcing the Hermitian gate.
    pub fn from_rows(n: usize, entries: &[Complex64]) -> Result<Self> {
        Self::new(&ComplexMatrix::from_rows(n, entries)?)
    }

    pub fn from_real_rows(n: usize, entries: &[f64]) -> Result<Self> {
        Self::new(&ComplexMatrix::from_real_rows(n, entries)?)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: ComplexMatrix::zeros(n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: ComplexMatrix::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn base(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m.get(i, j)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            m: &self.m + &other.m,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            m: &self.m - &other.m,
        }
    }

    /// Scaling by a real number preserves self-adjointness.
    pub fn scale(&self, c: f64) -> Self {
        Self {
            m: self.m.scale_re(c),
        }
    }

    /// `H + c I` for real `c`.
    pub fn shift(&self, c: f64) -> Self {
        self.add(&Self::identity(self.dim()).scale(c))
    }

    /// Real quadratic form `<H x, x>`.
    pub fn quad_form(&self, x: &DVector<Complex64>) -> f64 {
        let hx = self.m.mul_vec(x);
        x.dotc(&hx).re
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// `eigenvalues` ascend; column `j` of `vectors` is a unit eigenvector for
/// `eigenvalues[j]`, and `vectors` is unitary up to solver round-off.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn min_eig(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eig(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// Rebuilds `V diag(f(lambda)) V*`; errors if `f` leaves the real line.
    pub fn rebuild_with(&self, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
        let mapped: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        if let Some(idx) = mapped.iter().position(|v| !v.is_finite()) {
            return Err(LabError::Domain {
                value: self.eigenvalues[idx],
            });
        }
        let v = self.vectors.raw();
        let diag = DMatrix::from_diagonal(&DVector::from_iterator(
            mapped.len(),
            mapped.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        let rebuilt = v * diag * v.adjoint();
        HermitianMatrix::new(&ComplexMatrix::from_dmatrix(rebuilt)?)
    }
}

/// Verdict of a positive-semidefiniteness test.
///
/// `is_psd` holds exactly when `min_eig >= -tol`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsdVerdict {
    pub is_psd: bool,
    pub min_eig: f64,
    pub tol: f64,
}

impl PsdVerdict {
    fn from_parts(min_eig: f64, tol: f64) -> Self {
        Self {
            is_psd: min_eig >= -tol,
            min_eig,
            tol,
        }
    }
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Unitary plane rotations annihilate the off-diagonal mass until it drops
/// below machine precision relative to the input norm. Plane rotations are
/// slower than tridiagonal methods but backward stable with intrinsically
/// paired eigenvalues and eigenvectors — every downstream order check rests
/// on that pairing, so reliability wins over speed at these dimensions.
fn jacobi_hermitian(m: &DMatrix<Complex64>) -> Option<(Vec<f64>, DMatrix<Complex64>)> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let fro = a.norm();
    if fro == 0.0 {
        return Some((vec![0.0; n], v));
    }
    let tol = f64::EPSILON * fro;
    // Entries this small cannot lift the off-diagonal norm above `tol`
    // even if every slot held one, so rotations on them are skipped.
    let skip = 0.5 * tol / n as f64;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off2 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off2 += 2.0 * a[(p, q)].norm_sqr();
            }
        }
        if off2.sqrt() <= tol {
            let vals = (0..n).map(|i| a[(i, i)].re).collect();
            return Some((vals, v));
        }

        for p in 0..n {
            for q in (p + 1)..n {
                let beta = a[(p, q)];
                let ab = beta.norm();
                if ab <= skip {
                    continue;
                }
                let alpha = a[(p, p)].re;
                let delta = a[(q, q)].re;
                let phase = beta / Complex64::new(ab, 0.0);
                let tau = (delta - alpha) / (2.0 * ab);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let se = phase.scale(s);
                let se_conj = se.conj();

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * se_conj;
                    a[(k, q)] = akp * se + akq * c;
                    a[(p, k)] = a[(k, p)].conj();
                    a[(q, k)] = a[(k, q)].conj();
                }
                a[(p, p)] = Complex64::new(alpha - t * ab, 0.0);
                a[(q, q)] = Complex64::new(delta + t * ab, 0.0);
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * se_conj;
                    v[(k, q)] = vkp * se + vkq * c;
                }
            }
        }
    }
    None
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(h: &HermitianMatrix) -> Result<EigenSystem> {
    let n = h.dim();
    let (vals, vecs) = jacobi_hermitian(h.base().raw()).ok_or(LabError::EigFailed { n })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    if !eigenvalues.iter().all(|x| x.is_finite()) {
        return Err(LabError::EigFailed { n });
    }
    let vectors = DMatrix::from_fn(n, n, |r, c| vecs[(r, order[c])]);
    Ok(EigenSystem {
        eigenvalues,
        vectors: ComplexMatrix::from_dmatrix(vectors)?,
    })
}

/// Functional calculus `f(H) = V diag(f(lambda)) V*`.
///
/// `f` must be real and finite on every eigenvalue of `H`; a NaN or infinity
/// surfaces as [`LabError::Domain`] naming the offending eigenvalue.
pub fn matrix_function(h: &HermitianMatrix, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    hermitian_eig(h)?.rebuild_with(f)
}

/// `|T| = (T* T)^{1/2}`.
///
/// Eigenvalues of `T* T` that dip below zero by round-off are clamped to
/// zero before the square root; `|T|` is positive semidefinite by fiat.
pub fn abs_op(t: &ComplexMatrix) -> Result<HermitianMatrix> {
    let tt = &t.adjoint() * t;
    let h = HermitianMatrix::new(&tt)?;
    matrix_function(&h, |x| x.max(0.0).sqrt())
}

/// `|T*| = (T T*)^{1/2}`, the absolute value of the adjoint.
pub fn abs_adj(t: &ComplexMatrix) -> Result<HermitianMatrix> {
    abs_op(&t.adjoint())
}

/// Real (Hermitian) part `(T + T*)/2`.
pub fn real_part(t: &ComplexMatrix) -> HermitianMatrix {
    let m = (&(t + &t.adjoint())).scale_re(0.5);
    HermitianMatrix::new(&m).expect("(T+T*)/2 is Hermitian by construction")
}

/// Imaginary (Hermitian) part `(T - T*)/(2i)`.
pub fn imag_part(t: &ComplexMatrix) -> HermitianMatrix {
    // 1/(2i) = -i/2
    let m = (&(t - &t.adjoint())).scale(Complex64::new(0.0, -0.5));
    HermitianMatrix::new(&m).expect("(T-T*)/2i is Hermitian by construction")
}

/// Default PSD tolerance: `1e-9 * max(1, ||H||)` with the spectral norm.
fn default_psd_tol(max_abs_eig: f64) -> f64 {
    1e-9 * max_abs_eig.max(1.0)
}

/// Tests positive semidefiniteness by full eigendecomposition.
///
/// With `tol = None` the default `1e-9 * max(1, ||H||)` applies; `Some(t)`
/// uses the absolute tolerance `t` as given.
pub fn psd_check(h: &HermitianMatrix, tol: Option<f64>) -> Result<PsdVerdict> {
    if let Some(t) = tol {
        if !(t >= 0.0) {
            return Err(LabError::ParamRange {
                name: "tol",
                value: t,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
    }
    let eig = hermitian_eig(h)?;
    let max_abs = eig.min_eig().abs().max(eig.max_eig().abs());
    let tol = tol.unwrap_or_else(|| default_psd_tol(max_abs));
    Ok(PsdVerdict::from_parts(eig.min_eig(), tol))
}

/// Loewner order test `A <= B`, i.e. PSD check of `B - A`.
pub fn loewner_leq(a: &HermitianMatrix, b: &HermitianMatrix, tol: Option<f64>) -> Result<PsdVerdict> {
    if a.dim() != b.dim() {
        return Err(LabError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    psd_check(&b.sub(a), tol)
}

/// Singular values in descending order (`s_1` largest), via the spectrum of
/// `T* T`. Tiny negative round-off is clamped to zero; accuracy near zero is
/// limited by the squaring.
pub fn singular_values(t: &ComplexMatrix) -> Result<Vec<f64>> {
    let tt = HermitianMatrix::new(&(&t.adjoint() * t))?;
    let eig = hermitian_eig(&tt)?;
    let mut sv: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&x| x.max(0.0).sqrt())
        .collect();
    sv.reverse();
    Ok(sv)
}

/// Operator (spectral) norm = largest singular value.
pub fn op_norm(t: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(t)?[0])
}

/// Block-diagonal direct sum `A (+) B`.
pub fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim(), b.dim());
    let n = na + nb;
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i < na && j < na {
            a.get(i, j)
        } else if i >= na && j >= na {
            b.get(i - na, j - na)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    ComplexMatrix { m }
}

/// Direct sum of two Hermitian matrices stays Hermitian.
pub fn direct_sum_h(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix::new(&direct_sum(a.base(), b.base()))
        .expect("direct sum of Hermitian matrices is Hermitian")
}

// --- JSON schema ------------------------------------------------------------
//
// {"n": 2, "data": [[re, im], [re, im], ...]}   (row-major, n*n pairs)
//
// Finite doubles round-trip bit-exactly through this encoding.

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.get(i, j);
                data.push([z.re, z.im]);
            }
        }
        MatrixJson { n, data }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        if raw.n == 0 || raw.data.len() != raw.n * raw.n {
            return Err(D::Error::custom(format!(
                "matrix data length {} does not match n = {}",
                raw.data.len(),
                raw.n
            )));
        }
        let entries: Vec<Complex64> = raw
            .data
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        ComplexMatrix::from_rows(raw.n, &entries).map_err(D::Error::custom)
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.m.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(deserializer)?;
        HermitianMatrix::new(&m).map_err(D::Error::custom)
    }
}
