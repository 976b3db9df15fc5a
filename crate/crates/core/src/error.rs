use thiserror::Error;

pub type Result<T, E = GeoError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("invalid surface specification: {0}")]
    InvalidSurface(String),

    #[error("point (u={u}, v={v}) is off the chart: {reason}")]
    OffChart { u: f64, v: f64, reason: String },

    #[error("zero tangent vector has no heading")]
    ZeroTangent,

    #[error("geodesic left the chart at arc length {s}")]
    ChartExit { s: f64 },

    #[error("integrator step size underflow at arc length {s}")]
    StepUnderflow { s: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unreachable within search budget: {0}")]
    Unreachable(String),

    #[error("vertex regime: weight b{dominant} is not smaller than the sum of the other two")]
    VertexRegime { dominant: usize },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("line search exhausted {halvings} halvings at iteration {iteration}")]
    BacktrackingExhausted { iteration: usize, halvings: usize },

    #[error("iteration cap of {0} exceeded")]
    IterationCap(usize),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
}

impl GeoError {
    /// Numerical failures (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            GeoError::ChartExit { .. }
                | GeoError::StepUnderflow { .. }
                | GeoError::Unreachable(_)
                | GeoError::BacktrackingExhausted { .. }
                | GeoError::IterationCap(_)
        )
    }
}
