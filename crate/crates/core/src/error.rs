use thiserror::Error;

use crate::operator::HilbertLayout;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("layout mismatch: {left} vs {right}")]
    LayoutMismatch {
        left: HilbertLayout,
        right: HilbertLayout,
    },

    #[error("{what} index {index} out of range (bound {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    /// Top Fock level of a mode became populated beyond the monitor threshold.
    #[error("truncation monitor tripped at t = {time}: mode {mode} top-level population {population:.3e} > {threshold:.1e}")]
    Truncation {
        time: f64,
        mode: usize,
        population: f64,
        threshold: f64,
    },

    #[error("step size underflow at t = {time} (integrator refined {refinements} times)")]
    StepUnderflow { time: f64, refinements: u32 },

    #[error("norm underflow at t = {time}: {reason}")]
    NormUnderflow { time: f64, reason: String },

    #[error("trajectory with seed {seed} failed: {source}")]
    Trajectory {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("Liouvillian kernel is degenerate (numerical rank deficit {deficit}); steady state is not unique")]
    DegenerateKernel { deficit: usize },

    #[error("steady state did not converge within {windows} windows (last change {change:.3e})")]
    SteadyStateNotConverged { windows: usize, change: f64 },

    #[error("dimension {dim} exceeds the configured budget {budget}")]
    DimensionBudget { dim: usize, budget: usize },

    #[error("singular denominator in rate coefficient")]
    SingularDenominator,

    #[error("no cooling: A- = {a_minus:.6e} <= A+ = {a_plus:.6e}")]
    HeatingRegime { a_minus: f64, a_plus: f64 },

    #[error("threshold {threshold} never reached by the series")]
    ThresholdNotReached { threshold: f64 },

    #[error("rate-equation boundary occupation {occupation:.3e} exceeds 1e-6; raise N_max")]
    BoundaryOccupation { occupation: f64 },

    #[error("unsupported ion number {0}")]
    UnsupportedIonNumber(usize),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True when this error (or the trajectory error it wraps) is a truncation trip.
    pub fn is_truncation(&self) -> bool {
        match self {
            Error::Truncation { .. } => true,
            Error::Trajectory { source, .. } => source.is_truncation(),
            _ => false,
        }
    }
}
