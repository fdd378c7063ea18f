//! Joint placement, compression and offload planning for UAV relay networks
//! that stream sensing tasks to an edge server, plus an exact small-instance
//! oracle, coverage-only baselines and a store-and-forward simulator.

pub mod analyzer;
pub mod baselines;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod model;
pub mod par;
pub mod plan;
pub mod planner;
pub mod rng;
pub mod sim;
pub mod steiner;
pub mod tree;

pub use analyzer::{Level, Quality, QualityProfile};
pub use error::{Error, Result};
pub use geometry::{distance, Point2D};
pub use model::{
    energy_feasible, uav_energy_spent, ObjectiveWeights, ScenarioConfig, Target, TargetId, UavId,
    UavSpec,
};
pub use par::Execution;
pub use plan::{CompressionAssignment, Plan};
pub use planner::{greedy_a2tpp, GreedyParams};
pub use sim::{simulate, SimParams, SimReport};
pub use tree::{validate_tree, CoverageTree, NodeId, Role};
