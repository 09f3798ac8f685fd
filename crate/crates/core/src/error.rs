use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The exponent table does not cover the interval a count needs.
    #[error("exponent window [{have_lo}, {have_hi}] does not cover required range [{need_lo}, {need_hi}]")]
    WindowTooSmall { need_lo: f64, need_hi: f64, have_lo: f64, have_hi: f64 },

    /// One or more weights sit on an exceptional exponent.
    /// Entries are (component index, weight, nearest exceptional value).
    #[error("exceptional weight(s): {components:?}")]
    ExceptionalWeight { components: Vec<(usize, f64, f64)> },

    #[error("weight {gamma} at component {index} is outside ({lower}, inf)")]
    WeightOutOfRange { index: usize, gamma: f64, lower: f64 },

    #[error("no pure homogeneity order fits: {0}")]
    MixedHomogeneity(String),

    #[error("linear solve failed at time step {step} (t = {time})")]
    LinearSolve { step: usize, time: f64 },

    #[error("graph condition violated at {} node(s), min det(I + Hess u) = {min_det:e}", nodes.len())]
    GraphCondition { nodes: Vec<usize>, min_det: f64 },

    #[error("step rejected (graph condition); retry with dt = {suggested_dt:e}")]
    StepRejected { suggested_dt: f64, nodes: Vec<usize> },

    #[error("missing derivative samples of order {0}")]
    MissingDerivative(usize),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("eigen solver did not converge: {0}")]
    NoConvergence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numerical failures map to CLI exit code 1, everything else to 2.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::LinearSolve { .. }
                | Error::GraphCondition { .. }
                | Error::StepRejected { .. }
                | Error::NoConvergence(_)
                | Error::DegenerateData(_)
                | Error::MixedHomogeneity(_)
        )
    }
}
