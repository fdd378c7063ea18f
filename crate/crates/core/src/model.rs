//! Scenario description: fleet, targets, edge server and mission parameters.
//!
//! A [`ScenarioConfig`] round-trips through JSON with positions written as
//! `[x, y]` pairs in meters. Unknown fields are rejected.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, Point2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UavId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TargetId(pub u32);

impl fmt::Display for UavId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}", self.0)
    }
}

impl fmt::Display for TargetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavSpec {
    pub id: UavId,
    pub start: Point2D,
    /// meters
    pub comm_radius: f64,
    /// meters
    pub sense_radius: f64,
    /// meters / second
    pub speed: f64,
    /// joules
    pub energy: f64,
    /// joules per meter traveled
    pub move_cost: f64,
    /// joules per second of hovering
    pub hover_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub id: TargetId,
    pub position: Point2D,
    pub scenario: String,
    /// tasks per second
    pub task_rate: f64,
}

/// Weights of the reported objective: accuracy delivered at the edge,
/// number of covered targets, and total distance flown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveWeights {
    pub accuracy: f64,
    pub coverage: f64,
    pub travel: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            accuracy: 1.0,
            coverage: 1000.0,
            travel: 0.001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// (width, height) in meters; the area spans `[0, w] x [0, h]`.
    pub area: [f64; 2],
    pub edge: Point2D,
    pub uavs: Vec<UavSpec>,
    pub targets: Vec<Target>,
    /// task deadline, seconds
    pub deadline: f64,
    /// per-hop channel error probability
    pub channel_error: f64,
    /// nominal per-link capacity, bytes / second
    pub link_rate: f64,
    /// hover time budget once on station, seconds
    pub mission_horizon: f64,
    #[serde(default)]
    pub objective_weights: ObjectiveWeights,
}

impl ScenarioConfig {
    pub fn contains(&self, p: Point2D) -> bool {
        const TOL: f64 = 1e-9;
        p.is_finite()
            && p.x >= -TOL
            && p.y >= -TOL
            && p.x <= self.area[0] + TOL
            && p.y <= self.area[1] + TOL
    }

    pub fn target(&self, id: TargetId) -> Option<&Target> {
        self.targets.iter().find(|t| t.id == id)
    }

    pub fn uav(&self, id: UavId) -> Option<&UavSpec> {
        self.uavs.iter().find(|u| u.id == id)
    }

    /// Smallest communication radius in the fleet; formations are built
    /// against this so any UAV can take any node.
    pub fn min_comm_radius(&self) -> f64 {
        self.uavs
            .iter()
            .map(|u| u.comm_radius)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_sense_radius(&self) -> f64 {
        self.uavs
            .iter()
            .map(|u| u.sense_radius)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if !(self.area[0] > 0.0 && self.area[1] > 0.0) {
            return bad(format!("area {:?} must be positive", self.area));
        }
        if !self.contains(self.edge) {
            return bad("edge server outside area".into());
        }
        if !(self.deadline > 0.0) {
            return bad("deadline must be > 0".into());
        }
        if !(0.0..=1.0).contains(&self.channel_error) {
            return bad("channel_error must be in [0, 1]".into());
        }
        if !(self.link_rate > 0.0) {
            return bad("link_rate must be > 0".into());
        }
        if !(self.mission_horizon > 0.0) {
            return bad("mission_horizon must be > 0".into());
        }
        let w = self.objective_weights;
        if !(w.accuracy >= 0.0 && w.coverage >= 0.0 && w.travel >= 0.0) {
            return bad("objective weights must be nonnegative".into());
        }
        let mut seen = BTreeSet::new();
        for u in &self.uavs {
            if !seen.insert(u.id) {
                return bad(format!("duplicate UAV id {}", u.id));
            }
            if !self.contains(u.start) {
                return bad(format!("UAV {} starts outside area", u.id));
            }
            if !(u.comm_radius > 0.0 && u.sense_radius > 0.0 && u.speed > 0.0) {
                return bad(format!("UAV {} radii and speed must be > 0", u.id));
            }
            if !(u.energy >= 0.0 && u.move_cost >= 0.0 && u.hover_cost >= 0.0) {
                return bad(format!("UAV {} energy parameters must be >= 0", u.id));
            }
        }
        let mut seen = BTreeSet::new();
        for t in &self.targets {
            if !seen.insert(t.id) {
                return bad(format!("duplicate target id {}", t.id));
            }
            if !self.contains(t.position) {
                return bad(format!("target {} outside area", t.id));
            }
            if !(t.task_rate > 0.0) {
                return bad(format!("target {} task_rate must be > 0", t.id));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// Energy used to fly to `node_pos` and hover there for `horizon` seconds.
pub fn uav_energy_spent(u: &UavSpec, node_pos: Point2D, horizon: f64) -> f64 {
    distance(u.start, node_pos) * u.move_cost + u.hover_cost * horizon
}

/// Whether the UAV can reach `node_pos`, hover for `horizon` and still fly
/// back to the edge server.
pub fn energy_feasible(u: &UavSpec, node_pos: Point2D, edge: Point2D, horizon: f64) -> bool {
    uav_energy_spent(u, node_pos, horizon) + distance(edge, node_pos) * u.move_cost <= u.energy
}
