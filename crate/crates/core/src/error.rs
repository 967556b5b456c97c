use thiserror::Error;

/// Errors reported by the reconstruction, prolongation and solver routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("order {order} outside supported range {min}..={max}")]
    InvalidOrder { order: usize, min: usize, max: usize },

    #[error("moment `{name}` is nonzero but order {order} does not carry it")]
    MomentAboveOrder { name: &'static str, order: usize },

    #[error("reference coordinate {coord} outside [-1/2, 1/2]")]
    OutOfZone { coord: f64 },

    #[error("index {index:?} outside mesh of size {dims:?}")]
    OutOfMesh { index: Vec<isize>, dims: Vec<usize> },

    #[error("divergence constraint on the curl moments violated (residual {residual:e})")]
    DivergenceConstraint { residual: f64 },

    #[error("curl-free mode requires zero curl moments, found `{name}` = {value:e}")]
    NotCurlFree { name: &'static str, value: f64 },

    #[error("inconsistent circulation targets (residual {residual:e})")]
    InconsistentTargets { residual: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("nonpositive density {value:e} at {location}")]
    NonPositiveDensity { value: f64, location: String },

    #[error("step failed at t = {time:e}: {reason}")]
    StepFailure { time: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_order(order: usize, min: usize, max: usize) -> Result<()> {
    if order < min || order > max {
        return Err(Error::InvalidOrder { order, min, max });
    }
    Ok(())
}

pub(crate) fn check_ref(coord: f64) -> Result<()> {
    // small slack so that quadrature points generated as +-1/2 survive rounding
    if !(coord.abs() <= 0.5 + 1e-14) {
        return Err(Error::OutOfZone { coord });
    }
    Ok(())
}
