use thiserror::Error;

/// Errors surfaced by classification, chain analysis, LP synthesis, and the
/// environment generators.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// No terminal strongly connected component is reachable from the support
    /// of the initial distribution; synthesis over such a model is vacuous.
    #[error("no TSCC is reachable from the support of the initial distribution")]
    NoReachableTscc,

    /// A policy row is not a distribution over the state's action set.
    #[error("invalid policy at state {state}: {reason}")]
    InvalidPolicy { state: usize, reason: String },

    /// A block passed off as a single recurrent class failed the stationary
    /// distribution solve (rank-deficient beyond normalization).
    #[error("block is not a single recurrent class (residual {residual:.3e})")]
    NotUnichain { residual: f64 },

    /// (I - Z) is singular: the designated transient block contains a closed
    /// recurrent component.
    #[error("transient block is not substochastic toward absorption: {0}")]
    NonTransientBlock(String),

    /// A specification is malformed relative to the model, e.g. a transient
    /// specification whose label touches a TSCC.
    #[error("invalid specification '{label}': {reason}")]
    InvalidSpec { label: String, reason: String },

    /// An environment generator was called with out-of-range parameters.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The model failed validation; the report lists every violation.
    #[error("model validation failed:\n{0}")]
    Validation(String),

    /// The linear program has no feasible point.
    #[error("{lp} is infeasible")]
    Infeasible { lp: String },

    /// The linear program is unbounded above.
    #[error("{lp} is unbounded")]
    Unbounded { lp: String },

    /// The cut-generation loop exhausted its iteration budget.
    #[error("cut generation exhausted its iteration budget ({iterations} iterations)")]
    BudgetExhausted { iterations: usize },

    /// Numerical failure inside the LP solver.
    #[error("solver error: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
