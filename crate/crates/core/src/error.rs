use alloc::string::String;

fn at_cell(cell: &Option<usize>) -> String {
    cell.map_or_else(String::new, |i| alloc::format!(" in cell {i}"))
}

/// Errors raised by the core numerics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("density must be positive, got {rho}")]
    NonpositiveDensity { rho: f64 },

    #[error("sound speed squared p'({rho}) = {dp} is not positive")]
    NonpositiveSoundSpeed { rho: f64, dp: f64 },

    #[error("pressure curvature p''({rho}) vanishes")]
    ZeroCurvature { rho: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("value {value} outside the range of the map: {reason}")]
    OutOfRange { value: f64, reason: &'static str },

    #[error("state is superluminal: |v|^2 = {v2} >= limit {limit}")]
    SuperluminalState { v2: f64, limit: f64 },

    #[error("symmetrized state is invalid: {0}")]
    InvalidSymState(&'static str),

    #[error("target {target} is not bracketed on [{lo}, {hi}]")]
    RootNotBracketed { target: f64, lo: f64, hi: f64 },

    #[error("quadrature failed to reach tolerance on [{a}, {b}] (error estimate {estimate:e})")]
    QuadratureFailure { a: f64, b: f64, estimate: f64 },

    #[error("grid has {cells} cells, need at least {min}")]
    GridTooSmall { cells: usize, min: usize },

    #[error("gradient blow-up detected at t = {t}: max |u_x| = {max_grad} > {threshold}")]
    BlowupDetected { t: f64, max_grad: f64, threshold: f64 },

    #[error("time step {dt} violates the stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("conservative-to-primitive recovery failed{} for (D, S) = ({d}, {s}); last bracket [{lo}, {hi}]", at_cell(.cell))]
    RecoveryFailure {
        cell: Option<usize>,
        d: f64,
        s: f64,
        lo: f64,
        hi: f64,
    },

    #[error("recovered state is inadmissible{}: rho = {rho}, v = {v}", at_cell(.cell))]
    InadmissibleTarget { cell: Option<usize>, rho: f64, v: f64 },
}

impl Error {
    /// Attach a cell index to recovery errors raised deep in the solver.
    pub fn in_cell(self, index: usize) -> Self {
        match self {
            Error::RecoveryFailure { d, s, lo, hi, .. } => Error::RecoveryFailure {
                cell: Some(index),
                d,
                s,
                lo,
                hi,
            },
            Error::InadmissibleTarget { rho, v, .. } => Error::InadmissibleTarget {
                cell: Some(index),
                rho,
                v,
            },
            other => other,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
