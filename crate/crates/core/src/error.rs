use crate::trajectory::Pair;

/// Structural problems with an MDP, game or policy.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("{table} row {row} sums to {sum} (deviation {deviation:e})")]
    RowSum { table: &'static str, row: String, sum: f64, deviation: f64 },
    #[error("{table} has negative entry {value} at {at}")]
    NegativeProbability { table: &'static str, at: String, value: f64 },
    #[error("goal set is empty")]
    EmptyGoal,
    #[error("horizon must be at least 1, got {0}")]
    Horizon(usize),
    #[error("goal state {goal} out of range for {num_states} states")]
    GoalOutOfRange { goal: usize, num_states: usize },
    #[error("goal state {goal} is not absorbing under action {action}")]
    NotAbsorbing { goal: usize, action: usize },
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("{0} must be positive")]
    EmptyDimension(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumerationError {
    #[error("success enumeration exceeded the node budget of {budget} DFS nodes")]
    ExplosionGuard { budget: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MiningError {
    #[error("core is undefined over an empty success set")]
    EmptySuccessSet,
    #[error("common-subsequence search exceeded the budget of {budget}")]
    BudgetExceeded { budget: usize },
    #[error("abstraction has no image for {0}")]
    UnmappedSymbol(Pair),
    #[error("brute-force oracle limited to {max_sequences} sequences of length <= {max_len}; got {sequences} sequences, longest {longest}")]
    OracleScale { max_sequences: usize, max_len: usize, sequences: usize, longest: usize },
    #[error("existence witness needs a unique goal, found {0} goal states")]
    NotUniqueGoal(usize),
    #[error("no common symbol shared by every success")]
    NoCommonSymbol,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid environment config: {0}")]
pub struct ConfigError(pub String);

/// Any failure surfaced by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error(transparent)]
    Mining(#[from] MiningError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}
