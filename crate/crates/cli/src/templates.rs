//! Seeded scenario generators.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use uav_offload::{ObjectiveWeights, Point2D, ScenarioConfig, Target, TargetId, UavId, UavSpec};

use crate::error::CliError;

pub const SCENARIO_LABELS: [&str; 6] = ["Maritime", "SaR", "Wildlife", "Tools", "Pets", "Urban"];

pub const MAX_TARGETS: usize = 100;
pub const MAX_UAVS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Template {
    /// one scenario label, targets spread over a block near the edge server
    Urban,
    /// same layout, labels cycling through all six scenarios
    Multi,
    /// large fleet and many targets over a wider area
    Scalability,
}

impl Template {
    fn default_radius(self) -> f64 {
        match self {
            Template::Urban | Template::Multi => 90.0,
            Template::Scalability => 140.0,
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Template::Urban => "urban",
            Template::Multi => "multi",
            Template::Scalability => "scalability",
        })
    }
}

impl FromStr for Template {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "urban" => Ok(Template::Urban),
            "multi" => Ok(Template::Multi),
            "scalability" => Ok(Template::Scalability),
            other => Err(CliError::Usage(format!("unknown template `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioKnobs {
    pub targets: usize,
    pub uavs: usize,
    pub seed: u64,
    /// scenario label for single-label templates
    #[serde(default)]
    pub label: Option<String>,
    /// targets are drawn within this distance of the edge server, meters
    #[serde(default)]
    pub radius: Option<f64>,
    /// bytes / second
    #[serde(default)]
    pub link_rate: Option<f64>,
}

impl ScenarioKnobs {
    pub fn new(targets: usize, uavs: usize, seed: u64) -> Self {
        Self {
            targets,
            uavs,
            seed,
            label: None,
            radius: None,
            link_rate: None,
        }
    }
}

pub const DEFAULT_LINK_RATE: f64 = 1e7;
const AREA: f64 = 500.0;
const COMM_RADIUS: f64 = 16.0;
const SENSE_RADIUS: f64 = 1.0;
const SPEED: f64 = 5.0;

pub fn gen_scenario(template: Template, k: &ScenarioKnobs) -> Result<ScenarioConfig, CliError> {
    if k.targets == 0 || k.targets > MAX_TARGETS {
        return Err(CliError::Usage(format!(
            "targets must be in 1..={MAX_TARGETS}, got {}",
            k.targets
        )));
    }
    if k.uavs == 0 || k.uavs > MAX_UAVS {
        return Err(CliError::Usage(format!(
            "uavs must be in 1..={MAX_UAVS}, got {}",
            k.uavs
        )));
    }
    let radius = k.radius.unwrap_or(template.default_radius());
    if !(radius > 2.0 && radius < AREA / 2.0) {
        return Err(CliError::Usage(format!(
            "radius {radius} outside (2, {})",
            AREA / 2.0
        )));
    }
    let label = match (&k.label, template) {
        (Some(l), Template::Urban) => l.clone(),
        (None, Template::Urban) => "Urban".to_string(),
        (Some(_), _) => {
            return Err(CliError::Usage(format!(
                "template `{template}` mixes labels; drop `label`"
            )))
        }
        (None, _) => String::new(),
    };
    let link_rate = k.link_rate.unwrap_or(DEFAULT_LINK_RATE);
    if !(link_rate > 0.0 && link_rate.is_finite()) {
        return Err(CliError::Usage(format!(
            "link_rate {link_rate} must be positive"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(k.seed);
    let edge = Point2D::new(AREA / 2.0, 0.0);
    let targets = (0..k.targets as u32)
        .map(|i| {
            // uniform over the half disc around the edge server
            let d = radius * rng.gen_range(0.01f64..1.0).sqrt();
            let a = rng.gen_range(0.0..std::f64::consts::PI);
            let scenario = if template == Template::Urban {
                label.clone()
            } else {
                SCENARIO_LABELS[i as usize % SCENARIO_LABELS.len()].to_string()
            };
            Target {
                id: TargetId(i + 1),
                position: Point2D::new(edge.x + d * a.cos(), d * a.sin()),
                scenario,
                task_rate: 24.0,
            }
        })
        .collect();
    let uavs = (0..k.uavs as u32)
        .map(|i| UavSpec {
            id: UavId(i),
            start: Point2D::new(edge.x - 20.0 + (i % 20) as f64 * 2.0, (i / 20) as f64 * 2.0),
            comm_radius: COMM_RADIUS,
            sense_radius: SENSE_RADIUS,
            speed: SPEED,
            energy: 5e5,
            move_cost: 20.0,
            hover_cost: 150.0,
        })
        .collect();
    let cfg = ScenarioConfig {
        area: [AREA, AREA],
        edge,
        uavs,
        targets,
        deadline: 0.1,
        channel_error: 0.0,
        link_rate,
        mission_horizon: 1200.0,
        objective_weights: ObjectiveWeights::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// First `n` targets of `cfg`, for sweeps over the number of targets.
pub fn with_targets(cfg: &ScenarioConfig, n: usize) -> Result<ScenarioConfig, CliError> {
    if n == 0 || n > cfg.targets.len() {
        return Err(CliError::Usage(format!(
            "targets sweep value {n} outside 1..={}",
            cfg.targets.len()
        )));
    }
    let mut c = cfg.clone();
    c.targets.truncate(n);
    Ok(c)
}

/// First `n` UAVs of `cfg`, for sweeps over the fleet size.
pub fn with_uavs(cfg: &ScenarioConfig, n: usize) -> Result<ScenarioConfig, CliError> {
    if n == 0 || n > cfg.uavs.len() {
        return Err(CliError::Usage(format!(
            "uavs sweep value {n} outside 1..={}",
            cfg.uavs.len()
        )));
    }
    let mut c = cfg.clone();
    c.uavs.truncate(n);
    Ok(c)
}
