use crate::dynamics::FlowState;
use crate::integrator::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("unknown problem id `{0}`")]
    UnknownProblem(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    /// The objective returned a non-finite gradient while evaluating the flow.
    #[error("non-finite gradient at t = {t}")]
    NonFiniteGradient { t: f64 },

    /// The integrated state left the finite range. `last_good` is the last
    /// accepted state.
    #[error("non-finite state after t = {}", last_good.t)]
    NonFiniteState { last_good: Box<FlowState> },

    /// The right-hand-side evaluation budget ran out before `t_end`.
    #[error("rhs evaluation budget of {budget} exhausted at t = {reached}")]
    BudgetExhausted {
        budget: u64,
        reached: f64,
        partial: Box<Trajectory>,
    },

    #[error("newton solver did not converge after {iterations} iterations (best residual {residual:e})")]
    NewtonFailed { iterations: usize, residual: f64 },

    #[error("rate fit: {0}")]
    Fit(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
