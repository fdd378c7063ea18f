use thiserror::Error;

use crate::model::TargetId;
use crate::tree::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown scenario label `{0}`")]
    UnknownScenario(String),

    #[error("compression level {0} outside 1..=100")]
    LevelOutOfRange(i64),

    #[error("scenario `{0}` has no samples")]
    EmptyScenario(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("profile parse error at line {line}: {message}")]
    ProfileParse { line: u64, message: String },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("node {0} is not connected to the requested endpoint")]
    DisconnectedNode(NodeId),

    #[error("coverage tree covers no target")]
    EmptyCoverage,

    #[error("no energy-feasible assignment of UAVs to formation nodes")]
    NoFeasibleAssignment,

    #[error("instance too large for exact search: {targets} targets / {uavs} UAVs (limits {max_targets} / {max_uavs})")]
    InstanceTooLarge {
        targets: usize,
        uavs: usize,
        max_targets: usize,
        max_uavs: usize,
    },

    #[error("plan is infeasible: {0}")]
    InfeasiblePlan(String),

    #[error("target {0} is not part of the scenario")]
    UnknownTarget(TargetId),

    #[error("sweep axis `{0}` changes the scenario and needs re-planning")]
    AxisNeedsReplanning(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
