use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uav_offload::sim::Axis;
use uav_offload::{Execution, QualityProfile, ScenarioConfig, SimParams};
use uav_offload_cli::experiment::{csv_bytes, plan_json, PlotData};
use uav_offload_cli::{
    gen_scenario, make_plan, run, sweep_planners, CliError, ExperimentSpec, PlannerKind,
    PlannerOptions, ScenarioKnobs, Template,
};

#[derive(Parser)]
#[command(
    name = "uav-offload",
    version,
    about = "Plan, simulate and compare UAV relay formations for edge offloading"
)]
struct Cli {
    /// run planners and simulations on one thread
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one plan and write its dump as JSON
    Plan {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value = "greedy")]
        planner: PlannerKind,
        #[arg(long)]
        alpha: Option<f64>,
        /// defaults to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan and simulate once at the scenario's own deadline
    Simulate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_delimiter = ',', default_value = "greedy")]
        planners: Vec<PlannerKind>,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan and simulate over the values of one axis
    Sweep {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "greedy,stba-h,stba-m,stba-l"
        )]
        planners: Vec<PlannerKind>,
        /// delta, psi, targets or uavs
        #[arg(long)]
        axis: Axis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded scenario file from a template
    GenScenario {
        /// urban, multi or scalability
        #[arg(long)]
        template: Template,
        #[arg(long)]
        targets: usize,
        #[arg(long)]
        uavs: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        link_rate: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a profile and print a per-scenario summary
    ProfileCheck {
        #[arg(long)]
        profile: PathBuf,
    },
    /// Run an experiment spec file
    Run {
        spec: PathBuf,
        /// overrides the spec's output path
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        sim: SimArgs,
    },
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "data/profiles/fixture.csv")]
    profile: PathBuf,
}

impl Inputs {
    fn load(&self) -> Result<(ScenarioConfig, QualityProfile), CliError> {
        let cfg = ScenarioConfig::load(&self.scenario)
            .map_err(|e| CliError::Io(format!("{}: {e}", self.scenario.display())))?;
        let p = QualityProfile::load(&self.profile)
            .map_err(|e| CliError::Io(format!("{}: {e}", self.profile.display())))?;
        Ok((cfg, p))
    }
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    retry_limit: Option<u32>,
    #[arg(long)]
    per_hop_overhead: Option<f64>,
}

impl SimArgs {
    fn over(&self, base: SimParams) -> SimParams {
        SimParams {
            seed: self.seed.unwrap_or(base.seed),
            duration: self.duration.unwrap_or(base.duration),
            retry_limit: self.retry_limit.unwrap_or(base.retry_limit),
            per_hop_overhead: self.per_hop_overhead.unwrap_or(base.per_hop_overhead),
        }
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(path, bytes)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn simulate_cmd(
    inputs: &Inputs,
    planners: &[PlannerKind],
    sweep: Option<(Axis, &[f64])>,
    sim: &SimArgs,
    out: Option<&Path>,
    exec: Execution,
) -> Result<i32, CliError> {
    let (cfg, p) = inputs.load()?;
    let params = sim.over(SimParams::default());
    let (axis, values) = sweep.unwrap_or((Axis::Delta, std::slice::from_ref(&cfg.deadline)));
    let opts = PlannerOptions {
        execution: exec,
        ..PlannerOptions::default()
    };
    let outcome = sweep_planners(&cfg, &p, planners, &params, axis, values, &opts)?;
    emit(out, &csv_bytes(&outcome.rows)?)?;
    if let Some(path) = out {
        let plot = path.with_extension("plot.json");
        emit(
            Some(&plot),
            (serde_json::to_string_pretty(&PlotData::from_rows(axis, &outcome.rows))? + "\n")
                .as_bytes(),
        )?;
    }
    report_failures(&outcome.failures);
    Ok(outcome.failures.first().map_or(0, |f| f.error.exit_code()))
}

fn report_failures(failures: &[uav_offload_cli::experiment::PlannerFailure]) {
    for f in failures {
        match f.value {
            Some(v) => eprintln!("error: planner {} at {v}: {}", f.label, f.error),
            None => eprintln!("error: planner {}: {}", f.label, f.error),
        }
    }
}

fn profile_check(path: &Path) -> Result<i32, CliError> {
    let p =
        QualityProfile::load(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    println!("scenario,peak_accuracy,accuracy_l1,accuracy_l50,accuracy_l100,size_l1,size_l100,pareto_levels");
    for s in p.scenarios() {
        let q = |l| p.query_raw(s, l);
        println!(
            "{s},{},{},{},{},{},{},{}",
            p.peak_accuracy(s)?,
            q(1)?.accuracy,
            q(50)?.accuracy,
            q(100)?.accuracy,
            q(1)?.size,
            q(100)?.size,
            p.pareto_levels(s)?.len()
        );
    }
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match cli.command {
        Command::Plan {
            inputs,
            planner,
            alpha,
            out,
        } => {
            let (cfg, p) = inputs.load()?;
            let mut opts = PlannerOptions {
                execution: exec,
                ..PlannerOptions::default()
            };
            if let Some(a) = alpha {
                opts.greedy.alpha = a;
            }
            let plan = make_plan(planner, &cfg, &p, &opts)?;
            emit(
                out.as_deref(),
                plan_json(planner.label(), &plan, &cfg)?.as_bytes(),
            )?;
            Ok(0)
        }
        Command::Simulate {
            inputs,
            planners,
            sim,
            out,
        } => simulate_cmd(&inputs, &planners, None, &sim, out.as_deref(), exec),
        Command::Sweep {
            inputs,
            planners,
            axis,
            values,
            sim,
            out,
        } => simulate_cmd(
            &inputs,
            &planners,
            Some((axis, &values)),
            &sim,
            out.as_deref(),
            exec,
        ),
        Command::GenScenario {
            template,
            targets,
            uavs,
            seed,
            label,
            radius,
            link_rate,
            out,
        } => {
            let knobs = ScenarioKnobs {
                targets,
                uavs,
                seed,
                label,
                radius,
                link_rate,
            };
            let cfg = gen_scenario(template, &knobs)?;
            emit(out.as_deref(), (cfg.to_json()? + "\n").as_bytes())?;
            Ok(0)
        }
        Command::ProfileCheck { profile } => profile_check(&profile),
        Command::Run { spec, out, sim } => {
            let mut spec = ExperimentSpec::load(&spec)?;
            if let Some(o) = out {
                spec.output = o;
            }
            spec.sim = sim.over(spec.sim);
            let summary = run(&spec, exec)?;
            report_failures(&summary.failures);
            for w in &summary.written {
                eprintln!("wrote {}", w.display());
            }
            Ok(summary.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
