use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {name} must satisfy {requirement} (got {value})")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("truncation did not converge: last change {change:e} exceeds tol {tol:e} at half-width {half_width}")]
    TruncationNotConverged {
        change: f64,
        tol: f64,
        half_width: usize,
    },

    #[error("point {z} lies within the pole-exclusion radius of {pole}")]
    DomainPole { z: Complex64, pole: f64 },

    #[error("need at least {needed} annuli beyond the fit radius, found {found}")]
    InsufficientAnnuli { needed: usize, found: usize },

    #[error("need at least {needed} radii for extrapolation, found {found}")]
    InsufficientRadii { needed: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require(ok: bool, name: &'static str, requirement: &'static str, value: f64) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            requirement,
            value,
        })
    }
}
