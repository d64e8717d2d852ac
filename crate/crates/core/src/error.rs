use thiserror::Error;

/// Errors raised by the lattice, kernel, transform and solver layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("q-gamma has a pole at x = {0}")]
    GammaPole(f64),

    #[error("infinite product does not converge: |a| = {0} >= 1")]
    NonConvergentProduct(f64),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error(
        "tolerance {requested:e} unreachable in working precision (rounding bound {achievable:e}); \
         escalate to at least {needed_digits} digits"
    )]
    PrecisionEscalation {
        requested: f64,
        achievable: f64,
        needed_digits: u32,
    },

    #[error("kernel table covers m in [{have_lo}, {have_hi}] but m in [{need_lo}, {need_hi}] is required")]
    KernelCoverage {
        need_lo: i64,
        need_hi: i64,
        have_lo: i64,
        have_hi: i64,
    },

    #[error("lattice range too small: need at least {needed} points, have {have}")]
    RangeTooSmall { needed: usize, have: usize },

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("zero input: {0}")]
    ZeroInput(String),

    #[error("time grid unsuitable: {0}")]
    Grid(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("malformed data file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
