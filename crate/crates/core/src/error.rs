use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entries in {0}")]
    NonFinite(String),

    #[error("matrix is singular or nearly so (condition estimate {cond:e})")]
    Singular { cond: f64 },

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    Asymmetric { asymmetry: f64 },

    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },

    #[error("invalid parameter `{field}`: {reason}")]
    Parameter { field: String, reason: String },

    #[error("disturbance decoupling impossible for area {area}: {reason}")]
    Decoupling { area: usize, reason: String },

    #[error("LMI infeasible within budget: margin {margin:e}, blocking constraint `{blocking}`")]
    Infeasible { margin: f64, blocking: String },

    #[error("solver breakdown at iteration {iteration}: {detail}")]
    SolverBreakdown { iteration: usize, detail: String },

    #[error("H-infinity norm undefined: {0}")]
    UnstableRealization(String),

    #[error("simulation diverged at t = {time} s")]
    Diverged { time: f64 },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("format error: {0}")]
    Format(String),
}
