use crate::model::AgentId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("assignment does not cover variable {0}")]
    IncompleteAssignment(AgentId),

    #[error("instance too large: {entries} entries exceeds the cap of {cap}")]
    InstanceTooLarge { entries: u128, cap: u128 },

    #[error("density too low: {requested} edges requested but a connected graph needs {minimum}")]
    DensityTooLow { requested: usize, minimum: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid configuration: {0}")]
    BadConfig(String),

    #[error("constraint graph is not connected")]
    NotConnected,

    #[error("cardinality mismatch on shared dimension {0}")]
    DimensionConflict(AgentId),

    #[error("cannot project out {0}: not a dimension of the table")]
    BadProjection(AgentId),

    #[error("value {value} out of range for {var}")]
    BadContext { var: AgentId, value: usize },

    #[error("protocol error at {agent}: {reason}")]
    Protocol { agent: AgentId, reason: String },

    #[error("no quiescence after {ticks} ticks")]
    Livelock { ticks: u64, trace: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
