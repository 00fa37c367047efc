use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: achieved {achieved:e}, target {target:e}")]
    NonConvergence { achieved: f64, target: f64 },

    #[error("path set is empty")]
    EmptyPathSet,

    #[error("strike grid [{grid_lo}, {grid_hi}] is outside the interval [{lower}, {upper}]")]
    GridOutsideInterval {
        grid_lo: f64,
        grid_hi: f64,
        lower: f64,
        upper: f64,
    },

    #[error(
        "unhedgeable interval [{lower}, {upper}]: no usable {kind} strikes inside \
         (nearest below: {below}, nearest above: {above})"
    )]
    Unhedgeable {
        lower: f64,
        upper: f64,
        kind: &'static str,
        below: String,
        above: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn ensure_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive and finite, got {v}")))
    }
}

pub(crate) fn ensure_non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be non-negative and finite, got {v}")))
    }
}
