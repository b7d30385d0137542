use thiserror::Error;

/// Everything that can go wrong inside the lab.
///
/// Numerical routines never panic on bad input; they return one of these
/// variants so the CLI can map them onto exit codes.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("eigensolver did not converge for a {n}x{n} matrix")]
    EigFailed { n: usize },

    #[error("scalar function undefined or non-finite at eigenvalue {value}")]
    Domain { value: f64 },

    #[error("f(t)*g(t) = t violated at t = {t}: got {product}")]
    FgMismatch { t: f64, product: f64 },

    #[error("lower-right block is not strictly positive (min eigenvalue {min_eig:.3e})")]
    SingularBlock { min_eig: f64 },

    #[error("matrix is singular or ill-conditioned (cond {cond:.3e} exceeds {cap:.1e})")]
    IllConditioned { cond: f64, cap: f64 },

    #[error("parameter {name} = {value} outside [{lo}, {hi}]")]
    ParamRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("unknown check id '{0}'")]
    UnknownCheck(String),

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
