//! Experiment driver for `uav-offload`: scenario templates, planner
//! dispatch, simulation sweeps and result files.

pub mod error;
pub mod experiment;
pub mod templates;

pub use error::CliError;
pub use experiment::{
    make_plan, run, sweep_planners, ExperimentSpec, PlannerKind, PlannerOptions, PlotData,
    RunSummary, SweepSpec,
};
pub use templates::{gen_scenario, ScenarioKnobs, Template};
