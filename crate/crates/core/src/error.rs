use thiserror::Error;

use crate::engine::AgentId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {needed} objects do not fit in {available} cells")]
    Capacity { needed: usize, available: usize },

    #[error("unknown agent id {0}")]
    UnknownAgent(AgentId),

    #[error("agent {0} is dead")]
    DeadAgent(AgentId),

    #[error("agent {agent}: action index {index} is not legal (group has {available} actions)")]
    IllegalAction {
        agent: AgentId,
        index: usize,
        available: usize,
    },

    #[error("alive agent {0} has no action in the joint action")]
    MissingAction(AgentId),

    #[error("agent {0} has more than one action in the joint action")]
    DuplicateAction(AgentId),

    #[error("invalid group index {0}")]
    InvalidGroup(usize),

    #[error("action id {index} out of range for {count} actions")]
    InvalidActionId { index: usize, count: usize },

    #[error("{what}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("type assignments cover different agent sets")]
    MismatchedAgents,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("incompatible model: {0}")]
    IncompatibleModel(String),

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
