//! Store-and-forward simulation of task offloading over a plan.
//!
//! Each covered target emits one task (an image) every `1 / task_rate`
//! seconds. A task moves hop by hop along its route; a hop occupies both
//! endpoints' radios for `size / link_rate` seconds, since a UAV cannot send
//! and receive at once. The edge server has dedicated transceivers and is
//! never busy. Every attempt fails independently with the channel error
//! probability and is retried up to `retry_limit` times before the task is
//! dropped. After each successful hop the receiver spends `per_hop_overhead`
//! seconds before the task can move on.
//!
//! Late tasks are delivered and counted as late, never discarded, so the
//! event trajectory does not depend on the deadline. All randomness is keyed
//! by task identity, giving common random numbers across plans.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analyzer::{Level, QualityProfile};
use crate::error::{Error, Result};
use crate::model::{ScenarioConfig, TargetId};
use crate::par::{self, Execution};
use crate::plan::{validate_plan, Plan};
use crate::rng::keyed_uniform;
use crate::tree::CoverageTree;

const KEY_PHASE: u64 = 1;
const KEY_HOP: u64 = 2;
const KEY_CLASSIFY: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    /// seconds of task generation
    pub duration: f64,
    pub seed: u64,
    /// retransmissions allowed per hop after the first attempt
    pub retry_limit: u32,
    /// seconds
    pub per_hop_overhead: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            duration: 20.0,
            seed: 1,
            retry_limit: 7,
            per_hop_overhead: 0.002,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidParameter("duration must be > 0".into()));
        }
        if !(self.per_hop_overhead >= 0.0 && self.per_hop_overhead.is_finite()) {
            return Err(Error::InvalidParameter(
                "per_hop_overhead must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TargetStats {
    pub generated: u64,
    pub on_time: u64,
    pub correct: u64,
    pub late: u64,
    pub dropped: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimReport {
    pub generated: u64,
    pub delivered_on_time: u64,
    pub correctly_classified: u64,
    pub accomplished_pct: f64,
    pub late: u64,
    pub dropped: u64,
    /// tasks of targets the plan does not cover
    pub uncovered: u64,
    pub per_target: BTreeMap<TargetId, TargetStats>,
    /// mean delivery latency over all delivered tasks, seconds
    pub mean_latency: f64,
}

impl SimReport {
    pub fn misclassified(&self) -> u64 {
        self.delivered_on_time - self.correctly_classified
    }
}

/// Total-ordered event time.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Time(f64);

impl Eq for Time {}

impl PartialOrd for Time {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Time {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Task {
    flow: usize,
    seq: u64,
    created: f64,
    /// index into the route of the node currently holding the task
    hop: usize,
    attempt: u32,
    ready: f64,
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Generate { flow: usize, seq: u64 },
    Ready(Task),
    TxEnd { from: usize, to: usize, task: Task },
}

struct Flow {
    target: TargetId,
    route: Vec<usize>,
    size: f64,
    accuracy: f64,
    phase: f64,
    period: f64,
    count: u64,
}

fn task_count(phase: f64, period: f64, duration: f64) -> u64 {
    let mut n = ((duration - phase) / period).ceil().max(0.0) as u64;
    // guard the boundary against rounding in either direction
    while n > 0 && phase + (n - 1) as f64 * period >= duration {
        n -= 1;
    }
    while phase + n as f64 * period < duration {
        n += 1;
    }
    n
}

struct Engine<'a> {
    cfg: &'a ScenarioConfig,
    flows: Vec<Flow>,
    queue: BinaryHeap<std::cmp::Reverse<(Time, usize)>>,
    events: Vec<Event>,
    waiting: Vec<VecDeque<Task>>,
    busy: Vec<bool>,
    backlog: BTreeSet<usize>,
}

impl<'a> Engine<'a> {
    fn push(&mut self, at: f64, ev: Event) {
        let id = self.events.len();
        self.events.push(ev);
        self.queue.push(std::cmp::Reverse((Time(at), id)));
    }

    fn enqueue(&mut self, node: usize, task: Task) {
        self.waiting[node].push_back(task);
        self.backlog.insert(node);
    }

    /// Starts every transmission whose sender and receiver are both free,
    /// oldest head-of-line task first, ties by node id.
    fn dispatch(&mut self, now: f64) {
        let mut ready: Vec<(Time, usize)> = self
            .backlog
            .iter()
            .filter(|&&n| !self.busy[n])
            .map(|&n| (Time(self.waiting[n][0].ready), n))
            .collect();
        ready.sort();
        for (_, node) in ready {
            if self.busy[node] {
                continue;
            }
            let task = self.waiting[node][0];
            let flow = &self.flows[task.flow];
            let to = flow.route[task.hop + 1];
            if to != CoverageTree::BASE.0 && self.busy[to] {
                continue;
            }
            self.waiting[node].pop_front();
            if self.waiting[node].is_empty() {
                self.backlog.remove(&node);
            }
            self.busy[node] = true;
            if to != CoverageTree::BASE.0 {
                self.busy[to] = true;
            }
            let end = now + flow.size / self.cfg.link_rate;
            self.push(
                end,
                Event::TxEnd {
                    from: node,
                    to,
                    task,
                },
            );
        }
    }
}

/// Runs one simulation of `plan` under `cfg`.
pub fn simulate(
    plan: &Plan,
    cfg: &ScenarioConfig,
    p: &QualityProfile,
    params: &SimParams,
) -> Result<SimReport> {
    params.validate()?;
    let violations = validate_plan(plan, cfg);
    if let Some(v) = violations.first() {
        return Err(Error::InfeasiblePlan(format!("{v:?}")));
    }
    let tree = &plan.formation;
    let mut report = SimReport::default();
    let mut flows = Vec::new();
    for t in &cfg.targets {
        let period = 1.0 / t.task_rate;
        let phase = keyed_uniform(params.seed, &[KEY_PHASE, t.id.0 as u64]) * period;
        let count = task_count(phase, period, params.duration);
        report.generated += count;
        let stats = report.per_target.entry(t.id).or_default();
        stats.generated = count;
        let Some(route) = plan.routes.get(&t.id) else {
            report.uncovered += count;
            continue;
        };
        let level = plan
            .compression
            .levels
            .get(&t.id)
            .copied()
            .ok_or_else(|| Error::InfeasiblePlan(format!("no level for target {}", t.id)))?;
        let q = p.query(&t.scenario, level)?;
        flows.push(Flow {
            target: t.id,
            route: route.iter().map(|n| n.0).collect(),
            size: q.size,
            accuracy: q.accuracy,
            phase,
            period,
            count,
        });
    }

    let n = tree.nodes.len();
    let mut eng = Engine {
        cfg,
        flows,
        queue: BinaryHeap::new(),
        events: Vec::new(),
        waiting: vec![VecDeque::new(); n],
        busy: vec![false; n],
        backlog: BTreeSet::new(),
    };
    for f in 0..eng.flows.len() {
        if eng.flows[f].count > 0 {
            let at = eng.flows[f].phase;
            eng.push(at, Event::Generate { flow: f, seq: 0 });
        }
    }

    let mut latency_sum = 0.0;
    let mut delivered = 0u64;
    while let Some(std::cmp::Reverse((Time(now), first))) = eng.queue.pop() {
        let mut batch = vec![first];
        while let Some(std::cmp::Reverse((Time(t), id))) = eng.queue.peek().copied() {
            if t != now {
                break;
            }
            eng.queue.pop();
            batch.push(id);
        }
        for id in batch {
            match eng.events[id] {
                Event::Generate { flow, seq } => {
                    let f = &eng.flows[flow];
                    let created = f.phase + seq as f64 * f.period;
                    let next = (seq + 1 < f.count).then(|| f.phase + (seq + 1) as f64 * f.period);
                    let node = f.route[0];
                    let direct = f.route.len() == 1;
                    if let Some(next) = next {
                        eng.push(next, Event::Generate { flow, seq: seq + 1 });
                    }
                    let task = Task {
                        flow,
                        seq,
                        created,
                        hop: 0,
                        attempt: 0,
                        ready: now,
                    };
                    if direct {
                        eng.push(now, Event::Ready(task));
                    } else {
                        eng.enqueue(node, task);
                    }
                }
                Event::Ready(task) => {
                    let f = &eng.flows[task.flow];
                    if task.hop + 1 == f.route.len() {
                        let latency = now - task.created;
                        latency_sum += latency;
                        delivered += 1;
                        let stats = report.per_target.get_mut(&f.target).expect("target stats");
                        if latency <= cfg.deadline {
                            stats.on_time += 1;
                            let u = keyed_uniform(
                                params.seed,
                                &[KEY_CLASSIFY, f.target.0 as u64, task.seq],
                            );
                            if u < f.accuracy {
                                stats.correct += 1;
                            }
                        } else {
                            stats.late += 1;
                        }
                    } else {
                        let node = f.route[task.hop];
                        eng.enqueue(node, Task { ready: now, ..task });
                    }
                }
                Event::TxEnd { from, to, task } => {
                    eng.busy[from] = false;
                    if to != CoverageTree::BASE.0 {
                        eng.busy[to] = false;
                    }
                    let f = &eng.flows[task.flow];
                    let u = keyed_uniform(
                        params.seed,
                        &[
                            KEY_HOP,
                            f.target.0 as u64,
                            task.seq,
                            task.hop as u64,
                            task.attempt as u64,
                        ],
                    );
                    if u >= cfg.channel_error {
                        let moved = Task {
                            hop: task.hop + 1,
                            attempt: 0,
                            ..task
                        };
                        eng.push(now + params.per_hop_overhead, Event::Ready(moved));
                    } else if task.attempt < params.retry_limit {
                        let retry = Task {
                            attempt: task.attempt + 1,
                            ..task
                        };
                        eng.waiting[from].push_front(retry);
                        eng.backlog.insert(from);
                    } else {
                        let target = f.target;
                        report
                            .per_target
                            .get_mut(&target)
                            .expect("target stats")
                            .dropped += 1;
                    }
                }
            }
        }
        eng.dispatch(now);
    }

    for s in report.per_target.values() {
        report.delivered_on_time += s.on_time;
        report.correctly_classified += s.correct;
        report.late += s.late;
        report.dropped += s.dropped;
    }
    report.accomplished_pct = if report.generated == 0 {
        0.0
    } else {
        100.0 * report.correctly_classified as f64 / report.generated as f64
    };
    report.mean_latency = if delivered == 0 {
        0.0
    } else {
        latency_sum / delivered as f64
    };
    Ok(report)
}

/// Copy of `plan` with every covered target at `level`.
pub fn with_uniform_level(plan: &Plan, level: Level) -> Plan {
    let mut out = plan.clone();
    for l in out.compression.levels.values_mut() {
        *l = level;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Delta,
    Psi,
    Targets,
    Uavs,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Delta => "delta",
            Axis::Psi => "psi",
            Axis::Targets => "targets",
            Axis::Uavs => "uavs",
        }
    }

    /// `cfg` with this axis set to `value`, for axes that keep the plan valid.
    pub fn apply(self, cfg: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut c = cfg.clone();
        match self {
            Axis::Delta => c.deadline = value,
            Axis::Psi => c.channel_error = value,
            Axis::Targets | Axis::Uavs => return Err(Error::AxisNeedsReplanning(self.name())),
        }
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta" => Ok(Axis::Delta),
            "psi" => Ok(Axis::Psi),
            "targets" => Ok(Axis::Targets),
            "uavs" => Ok(Axis::Uavs),
            other => Err(Error::InvalidParameter(format!(
                "unknown sweep axis `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub label: String,
    pub axis: Axis,
    pub value: f64,
    pub report: SimReport,
}

/// One simulation per (plan, value), rows ordered by plan then value. All
/// plans see the same seed, hence the same random draws per task.
pub fn sweep(
    plans: &[(String, Plan)],
    cfg: &ScenarioConfig,
    p: &QualityProfile,
    params: &SimParams,
    axis: Axis,
    values: &[f64],
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(
            "sweep needs at least one value".into(),
        ));
    }
    let configs: Vec<ScenarioConfig> = values
        .iter()
        .map(|&v| axis.apply(cfg, v))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..plans.len())
        .flat_map(|i| (0..values.len()).map(move |j| (i, j)))
        .collect();
    let reports = par::map(exec, &jobs, |&(i, j)| {
        simulate(&plans[i].1, &configs[j], p, params)
    });
    jobs.iter()
        .zip(reports)
        .map(|(&(i, j), r)| {
            Ok(SweepRow {
                label: plans[i].0.clone(),
                axis,
                value: values[j],
                report: r?,
            })
        })
        .collect()
}

/// One results-file row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub label: String,
    pub axis: Axis,
    pub value: f64,
    pub generated: u64,
    pub on_time: u64,
    pub correct: u64,
    pub accomplished_pct: f64,
    pub mean_latency_s: f64,
}

impl From<&SweepRow> for CsvRow {
    fn from(r: &SweepRow) -> Self {
        CsvRow {
            label: r.label.clone(),
            axis: r.axis,
            value: r.value,
            generated: r.report.generated,
            on_time: r.report.delivered_on_time,
            correct: r.report.correctly_classified,
            accomplished_pct: r.report.accomplished_pct,
            mean_latency_s: r.report.mean_latency,
        }
    }
}

pub fn write_csv<W: Write>(rows: &[CsvRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<CsvRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in rd.deserialize() {
        out.push(row?);
    }
    Ok(out)
}
