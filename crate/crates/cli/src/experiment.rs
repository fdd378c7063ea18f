//! Planner dispatch, sweeps and the experiment-spec runner.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use uav_offload::baselines::{stba, stba_variant, StbaVariant};
use uav_offload::exact::{exact_a2tpp, CandidateSet, ExactLimits};
use uav_offload::par;
use uav_offload::sim::{sweep, write_csv, Axis, CsvRow, SweepRow};
use uav_offload::{
    greedy_a2tpp, simulate, Execution, GreedyParams, Plan, QualityProfile, ScenarioConfig,
    SimParams,
};

use crate::error::CliError;
use crate::templates::{with_targets, with_uavs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PlannerKind {
    #[serde(rename = "greedy")]
    Greedy,
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "stba-h")]
    StbaH,
    #[serde(rename = "stba-m")]
    StbaM,
    #[serde(rename = "stba-l")]
    StbaL,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 5] = [
        PlannerKind::Greedy,
        PlannerKind::Exact,
        PlannerKind::StbaH,
        PlannerKind::StbaM,
        PlannerKind::StbaL,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PlannerKind::Greedy => "greedy",
            PlannerKind::Exact => "exact",
            PlannerKind::StbaH => StbaVariant::H.label(),
            PlannerKind::StbaM => StbaVariant::M.label(),
            PlannerKind::StbaL => StbaVariant::L.label(),
        }
    }

    fn stba_variant(self) -> Option<StbaVariant> {
        match self {
            PlannerKind::StbaH => Some(StbaVariant::H),
            PlannerKind::StbaM => Some(StbaVariant::M),
            PlannerKind::StbaL => Some(StbaVariant::L),
            _ => None,
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PlannerKind {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        PlannerKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown planner `{s}`")))
    }
}

/// Knobs shared by every planner call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerOptions {
    pub greedy: GreedyParams,
    pub exact_time_budget: Duration,
    pub execution: Execution,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        Self {
            greedy: GreedyParams::default(),
            exact_time_budget: uav_offload::exact::DEFAULT_TIME_BUDGET,
            execution: Execution::default(),
        }
    }
}

pub fn make_plan(
    kind: PlannerKind,
    cfg: &ScenarioConfig,
    p: &QualityProfile,
    opts: &PlannerOptions,
) -> Result<Plan, CliError> {
    let plan = match kind {
        PlannerKind::Greedy => greedy_a2tpp(
            cfg,
            p,
            &GreedyParams {
                execution: opts.execution,
                ..opts.greedy
            },
        )?,
        PlannerKind::Exact => {
            let cand = CandidateSet::target_anchored(cfg)?;
            let limits = ExactLimits {
                time_budget: opts.exact_time_budget,
                execution: opts.execution,
                ..ExactLimits::default()
            };
            exact_a2tpp(cfg, p, &cand, &limits)?.plan
        }
        other => {
            let v = other.stba_variant().expect("stba planner kinds");
            stba_variant(&stba(cfg), v, cfg, p)?
        }
    };
    Ok(plan)
}

/// A planner failure reported next to the results of the other planners.
#[derive(Debug)]
pub struct PlannerFailure {
    pub label: String,
    pub value: Option<f64>,
    pub error: CliError,
}

#[derive(Debug, Default)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<PlannerFailure>,
    /// plans made against the unmodified scenario, in planner order
    pub plans: Vec<(String, Plan)>,
}

/// Plans with every listed planner and simulates over `values` of `axis`.
/// Delta and psi reuse one plan per planner; targets and uavs re-plan at
/// each value. Rows come out ordered by planner, then value.
pub fn sweep_planners(
    cfg: &ScenarioConfig,
    p: &QualityProfile,
    planners: &[PlannerKind],
    params: &SimParams,
    axis: Axis,
    values: &[f64],
    opts: &PlannerOptions,
) -> Result<SweepOutcome, CliError> {
    if values.is_empty() {
        return Err(CliError::Usage("sweep needs at least one value".into()));
    }
    params.validate()?;
    let mut out = SweepOutcome::default();
    let made = par::map(opts.execution, planners, |&k| make_plan(k, cfg, p, opts));
    for (k, plan) in planners.iter().zip(made) {
        match plan {
            Ok(plan) => out.plans.push((k.label().to_string(), plan)),
            Err(error) => out.failures.push(PlannerFailure {
                label: k.label().to_string(),
                value: None,
                error,
            }),
        }
    }

    match axis {
        Axis::Delta | Axis::Psi => {
            out.rows = sweep(&out.plans, cfg, p, params, axis, values, opts.execution)?;
        }
        Axis::Targets | Axis::Uavs => {
            let mut scenarios = Vec::with_capacity(values.len());
            for &v in values {
                if v.fract() != 0.0 || v < 1.0 {
                    return Err(CliError::Usage(format!(
                        "{axis} sweep values must be positive integers, got {v}"
                    )));
                }
                let n = v as usize;
                scenarios.push(if axis == Axis::Targets {
                    with_targets(cfg, n)?
                } else {
                    with_uavs(cfg, n)?
                });
            }
            let labels: Vec<PlannerKind> = planners
                .iter()
                .copied()
                .filter(|k| out.plans.iter().any(|(l, _)| l == k.label()))
                .collect();
            let jobs: Vec<(usize, usize)> = (0..labels.len())
                .flat_map(|i| (0..values.len()).map(move |j| (i, j)))
                .collect();
            let results = par::map(opts.execution, &jobs, |&(i, j)| -> Result<_, CliError> {
                let plan = make_plan(labels[i], &scenarios[j], p, opts)?;
                Ok(simulate(&plan, &scenarios[j], p, params)?)
            });
            for (&(i, j), r) in jobs.iter().zip(results) {
                match r {
                    Ok(report) => out.rows.push(SweepRow {
                        label: labels[i].label().to_string(),
                        axis,
                        value: values[j],
                        report,
                    }),
                    Err(error) => out.failures.push(PlannerFailure {
                        label: labels[i].label().to_string(),
                        value: Some(values[j]),
                        error,
                    }),
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
}

/// Everything one experiment needs; relative paths resolve against the
/// directory of the spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: PathBuf,
    pub profile: PathBuf,
    pub planners: Vec<PlannerKind>,
    /// without a sweep, each planner is simulated once at the scenario's
    /// own deadline
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub sim: SimParams,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_exact_budget")]
    pub exact_time_budget_s: f64,
    pub output: PathBuf,
    /// directory for per-planner plan dumps; defaults to the output's
    #[serde(default)]
    pub plan_dir: Option<PathBuf>,
}

fn default_alpha() -> f64 {
    GreedyParams::default().alpha
}

fn default_exact_budget() -> f64 {
    uav_offload::exact::DEFAULT_TIME_BUDGET.as_secs_f64()
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut spec: ExperimentSpec = serde_json::from_str(&text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        spec.resolve(dir);
        Ok(spec)
    }

    /// Makes every relative path relative to `dir` instead.
    pub fn resolve(&mut self, dir: &Path) {
        for p in [&mut self.scenario, &mut self.profile, &mut self.output] {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        if let Some(d) = &mut self.plan_dir {
            if d.is_relative() {
                *d = dir.join(&*d);
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.planners.is_empty() {
            return Err(CliError::Usage("spec lists no planners".into()));
        }
        for (i, k) in self.planners.iter().enumerate() {
            if self.planners[..i].contains(k) {
                return Err(CliError::Usage(format!("planner `{k}` listed twice")));
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(CliError::Usage("sweep lists no values".into()));
            }
        }
        if !(self.exact_time_budget_s > 0.0 && self.exact_time_budget_s.is_finite()) {
            return Err(CliError::Usage(
                "exact_time_budget_s must be positive".into(),
            ));
        }
        for p in [&self.scenario, &self.profile] {
            if !p.is_file() {
                return Err(CliError::Io(format!("{}: no such file", p.display())));
            }
        }
        self.sim.validate()?;
        GreedyParams {
            alpha: self.alpha,
            ..GreedyParams::default()
        }
        .validate()?;
        Ok(())
    }

    pub fn planner_options(&self, execution: Execution) -> PlannerOptions {
        PlannerOptions {
            greedy: GreedyParams {
                alpha: self.alpha,
                ..GreedyParams::default()
            },
            exact_time_budget: Duration::from_secs_f64(self.exact_time_budget_s),
            execution,
        }
    }
}

/// Plan layout written next to the results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanDump<'a> {
    pub label: &'a str,
    pub uav_count: usize,
    pub covered_count: usize,
    pub travel_distance_m: f64,
    pub plan: &'a Plan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Accomplished percentage per planner along the swept axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub axis: Axis,
    pub metric: String,
    pub series: Vec<PlotSeries>,
}

impl PlotData {
    pub fn from_rows(axis: Axis, rows: &[SweepRow]) -> Self {
        let mut series: Vec<PlotSeries> = Vec::new();
        for r in rows {
            if series.last().map_or(true, |s| s.label != r.label) {
                series.push(PlotSeries {
                    label: r.label.clone(),
                    x: Vec::new(),
                    y: Vec::new(),
                });
            }
            let s = series.last_mut().expect("series pushed above");
            s.x.push(r.value);
            s.y.push(r.report.accomplished_pct);
        }
        PlotData {
            axis,
            metric: "accomplished_pct".into(),
            series,
        }
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<PlannerFailure>,
    pub written: Vec<PathBuf>,
}

impl RunSummary {
    /// 0 when every planner succeeded, otherwise the code of the first
    /// failure.
    pub fn exit_code(&self) -> i32 {
        self.failures.first().map_or(0, |f| f.error.exit_code())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn csv_bytes(rows: &[SweepRow]) -> Result<Vec<u8>, CliError> {
    let csv_rows: Vec<CsvRow> = rows.iter().map(CsvRow::from).collect();
    let mut buf = Vec::new();
    write_csv(&csv_rows, &mut buf)?;
    Ok(buf)
}

pub fn plan_json(label: &str, plan: &Plan, cfg: &ScenarioConfig) -> Result<String, CliError> {
    let dump = PlanDump {
        label,
        uav_count: plan.uav_count(),
        covered_count: plan.covered_count(),
        travel_distance_m: plan.travel_distance(cfg),
        plan,
    };
    Ok(serde_json::to_string_pretty(&dump)? + "\n")
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Plans, simulates and writes the results CSV, a plot-data file and one
/// plan dump per planner. Planner failures are collected, not fatal.
pub fn run(spec: &ExperimentSpec, execution: Execution) -> Result<RunSummary, CliError> {
    spec.validate()?;
    let cfg = ScenarioConfig::load(&spec.scenario)
        .map_err(|e| CliError::Io(format!("{}: {e}", spec.scenario.display())))?;
    let p = QualityProfile::load(&spec.profile)
        .map_err(|e| CliError::Io(format!("{}: {e}", spec.profile.display())))?;
    let (axis, values) = match &spec.sweep {
        Some(s) => (s.axis, s.values.clone()),
        None => (Axis::Delta, vec![cfg.deadline]),
    };
    let opts = spec.planner_options(execution);
    let outcome = sweep_planners(&cfg, &p, &spec.planners, &spec.sim, axis, &values, &opts)?;

    let mut written = Vec::new();
    write_file(&spec.output, &csv_bytes(&outcome.rows)?)?;
    written.push(spec.output.clone());
    let plot = sibling(&spec.output, ".plot.json");
    write_file(
        &plot,
        (serde_json::to_string_pretty(&PlotData::from_rows(axis, &outcome.rows))? + "\n")
            .as_bytes(),
    )?;
    written.push(plot);
    let plan_dir = spec.plan_dir.clone().unwrap_or_else(|| {
        spec.output
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default()
    });
    let stem = spec
        .output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    for (label, plan) in &outcome.plans {
        let path = plan_dir.join(format!("{stem}.{label}.plan.json"));
        write_file(&path, plan_json(label, plan, &cfg)?.as_bytes())?;
        written.push(path);
    }
    Ok(RunSummary {
        rows: outcome.rows,
        failures: outcome.failures,
        written,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::templates::{gen_scenario, ScenarioKnobs, Template};
    use uav_offload::analyzer::fixture_profile;

    fn quick() -> SimParams {
        SimParams {
            duration: 2.0,
            ..SimParams::default()
        }
    }

    #[test]
    fn planner_names_round_trip() {
        for k in PlannerKind::ALL {
            assert_eq!(k.label().parse::<PlannerKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.label()));
        }
        assert!("stba".parse::<PlannerKind>().is_err());
    }

    #[test]
    fn delta_sweep_rows_are_ordered() {
        let cfg = gen_scenario(Template::Urban, &ScenarioKnobs::new(6, 10, 3)).unwrap();
        let planners = [PlannerKind::StbaM, PlannerKind::Greedy];
        let values = [0.06, 0.08, 0.1];
        let out = sweep_planners(
            &cfg,
            &fixture_profile(),
            &planners,
            &quick(),
            Axis::Delta,
            &values,
            &PlannerOptions::default(),
        )
        .unwrap();
        assert!(out.failures.is_empty());
        let keys: Vec<_> = out
            .rows
            .iter()
            .map(|r| (r.label.as_str(), r.value))
            .collect();
        assert_eq!(
            keys,
            vec![
                ("stba-m", 0.06),
                ("stba-m", 0.08),
                ("stba-m", 0.1),
                ("greedy", 0.06),
                ("greedy", 0.08),
                ("greedy", 0.1)
            ]
        );
        let plot = PlotData::from_rows(Axis::Delta, &out.rows);
        assert_eq!(plot.series.len(), 2);
        assert_eq!(plot.series[1].x, values);
    }

    #[test]
    fn targets_sweep_replans() {
        let cfg = gen_scenario(Template::Multi, &ScenarioKnobs::new(8, 10, 3)).unwrap();
        let out = sweep_planners(
            &cfg,
            &fixture_profile(),
            &[PlannerKind::Greedy],
            &quick(),
            Axis::Targets,
            &[2.0, 8.0],
            &PlannerOptions::default(),
        )
        .unwrap();
        assert_eq!(out.rows.len(), 2);
        assert!(out.rows[0].report.generated < out.rows[1].report.generated);
        assert!(sweep_planners(
            &cfg,
            &fixture_profile(),
            &[PlannerKind::Greedy],
            &quick(),
            Axis::Targets,
            &[2.5],
            &PlannerOptions::default()
        )
        .is_err());
    }

    #[test]
    fn exact_failure_does_not_abort_others() {
        let cfg = gen_scenario(Template::Urban, &ScenarioKnobs::new(4, 6, 3)).unwrap();
        let out = sweep_planners(
            &cfg,
            &fixture_profile(),
            &[PlannerKind::Exact, PlannerKind::Greedy],
            &quick(),
            Axis::Delta,
            &[0.1],
            &PlannerOptions::default(),
        )
        .unwrap();
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].label, "exact");
        assert_eq!(out.failures[0].error.exit_code(), 2);
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out.rows[0].label, "greedy");
    }
}
