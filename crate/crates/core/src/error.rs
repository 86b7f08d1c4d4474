use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid phase space: {0}")]
    InvalidSpace(String),

    #[error("fields live on different phase spaces")]
    SpaceMismatch,

    #[error("point {actions:?} lies outside the action box")]
    OutOfDomain { actions: Vec<f64> },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("1-form is not closed: defect {defect:.3e} exceeds {tol:.1e}")]
    NotClosed { defect: f64, tol: f64 },

    #[error("1-form has non-vanishing vertical average: {norm:.3e} exceeds {tol:.1e}")]
    NonzeroAverage { norm: f64, tol: f64 },

    #[error("primitive does not reproduce the form (defect {defect:.3e} > {tol:.1e}); the form is not closed")]
    Inconsistent { defect: f64, tol: f64 },

    #[error("cycle periods {reference:?} vary across base points by {deviation:.3e}")]
    InconsistentPeriods { reference: Vec<f64>, deviation: f64 },

    #[error("vector field is not symplectic: closedness defect {defect:.3e} exceeds {tol:.1e}")]
    NotSymplectic { defect: f64, tol: f64 },

    #[error("trajectory from {start:?} left the action box at time {time} (point {at:?})")]
    DomainEscape { start: Vec<f64>, at: Vec<f64>, time: f64 },

    #[error("step size fell below the floor while integrating from {start:?} (error estimate {estimate:.3e})")]
    StepFloor { start: Vec<f64>, estimate: f64 },

    #[error("time {eps} outside [0, {eps_max}]")]
    TimeOutOfRange { eps: f64, eps_max: f64 },

    #[error("invalid cycle: {0}")]
    InvalidCycle(String),

    #[error("winding number {value} is not within the guard band of an integer")]
    NonIntegralWinding { value: f64 },

    #[error("malformed field data: {0}")]
    Format(String),
}
