//! `chemclock` command-line tool.
//!
//! Exit codes: 0 success, 1 I/O, parse or usage error, 2 system not
//! mass-action realizable, 3 integration failure, 4 verification checks failed.

mod checks;
mod params;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chemclock::oscillator::{build_core, build_stack, initial_state, OSCILLATOR_START};
use chemclock::{
    compile, estimate_period, integrate, measure_period, CompileError, IntegrateError, IntegrationSpec, PeriodOptions,
    PeriodStats, PolyOde, Schedule, Trajectory,
};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Realizability(#[from] CompileError),
    #[error("integration failed{}: {source}", .source.time().map(|t| format!(" at t = {t}")).unwrap_or_default())]
    Integration { source: IntegrateError },
    #[error("verification failed")]
    ChecksFailed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Parse(_) | CliError::Usage(_) => 1,
            CliError::Realizability(_) => 2,
            CliError::Integration { .. } => 3,
            CliError::ChecksFailed => 4,
        }
    }
}

impl From<IntegrateError> for CliError {
    fn from(source: IntegrateError) -> Self {
        match source {
            IntegrateError::InvalidSpec(_)
            | IntegrateError::DimensionMismatch { .. }
            | IntegrateError::InvalidInitial { .. } => CliError::Usage(source.to_string()),
            _ => CliError::Integration { source },
        }
    }
}

fn parse_err(e: impl std::fmt::Display) -> CliError {
    CliError::Parse(e.to_string())
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Parser)]
#[command(
    name = "chemclock",
    version,
    about = "Relaxation-oscillator chemical clocks: build, simulate, compile, verify"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a polynomial ODE (JSON) to a mass-action reaction network.
    Compile {
        input: PathBuf,
        /// Output file for the network text (stdout if omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Integrate a built-in system (core, stack2, counter3) or a JSON system.
    Simulate(SimulateArgs),
    /// Emit the composed system, network and clock wiring for m oscillators.
    Schedule {
        /// Number of oscillators (regulating m + 1 modules).
        #[arg(required_unless_present = "from", value_parser = clap::value_parser!(u32).range(2..))]
        m: Option<u32>,
        /// Read the schedule description from a JSON file instead.
        #[arg(long, conflicts_with_all = ["m", "params"])]
        from: Option<PathBuf>,
        #[arg(long)]
        params: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a JSON check suite against a trajectory CSV.
    Verify { trajectory: PathBuf, checks: PathBuf },
    /// Singular-limit period T1 + T2 by adaptive quadrature.
    Period {
        #[arg(long)]
        eta1: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// `core`, `stack2`, `counter3` or a path to a system JSON file.
    system: String,
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 200.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    abs_tol: f64,
    #[arg(long, default_value_t = 0.01)]
    sample_dt: f64,
    /// Initial state, comma separated in species order (required for JSON systems).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    init: Option<Vec<f64>>,
    /// Species whose periods are reported (defaults depend on the system).
    #[arg(long, value_delimiter = ',')]
    period: Option<Vec<String>>,
    /// Samples before this time are ignored when measuring periods.
    #[arg(long)]
    transient: Option<f64>,
    /// Trajectory CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the built-in system once per eta1 value, in parallel, and report periods only.
    #[arg(long, value_delimiter = ',', conflicts_with = "out")]
    sweep_eta1: Option<Vec<f64>>,
}

fn cmd_compile(input: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let sys = PolyOde::from_json(&read(input)?).map_err(|e| CliError::Parse(format!("{}: {e}", input.display())))?;
    let text = compile(&sys)?.format();
    match out {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

struct Prepared {
    system: PolyOde,
    init: Vec<f64>,
    periods: Vec<String>,
}

fn prepare(args: &SimulateArgs, eta1: Option<f64>) -> Result<Prepared, CliError> {
    let (mut osc, counter) = params::load(args.params.as_deref())?;
    if let Some(e) = eta1 {
        osc.eta1 = e;
    }
    let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let mut prepared = match args.system.as_str() {
        "core" => Prepared {
            system: build_core(&osc, "").map_err(parse_err)?,
            init: OSCILLATOR_START.to_vec(),
            periods: names(&["x", "u", "v"]),
        },
        "stack2" => Prepared {
            system: build_stack(2, &osc).map_err(parse_err)?,
            init: initial_state(2, None),
            periods: names(&["x1", "x2"]),
        },
        "counter3" => {
            let schedule = Schedule::new(2, &osc, &counter).map_err(parse_err)?;
            Prepared {
                system: schedule.system().map_err(parse_err)?,
                init: schedule.initial_state(),
                periods: names(&["x1", "x2"]),
            }
        }
        path => {
            if eta1.is_some() {
                return Err(CliError::Usage("--sweep-eta1 needs a built-in system".into()));
            }
            let system =
                PolyOde::from_json(&read(Path::new(path))?).map_err(|e| CliError::Parse(format!("{path}: {e}")))?;
            let init = args
                .init
                .clone()
                .ok_or_else(|| CliError::Usage("--init is required for a system read from a file".into()))?;
            Prepared {
                system,
                init,
                periods: Vec::new(),
            }
        }
    };
    if let Some(init) = &args.init {
        prepared.init = init.clone();
    }
    if let Some(p) = &args.period {
        prepared.periods = p.clone();
    }
    Ok(prepared)
}

#[derive(Serialize)]
#[serde(untagged)]
enum PeriodEntry {
    Stats(PeriodStats),
    Missing { error: String },
}

#[derive(Serialize)]
struct SimulationSummary {
    system: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta1: Option<f64>,
    t_end: f64,
    samples: usize,
    periods: BTreeMap<String, PeriodEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    period_ratio: Option<f64>,
    #[serde(rename = "final")]
    final_state: BTreeMap<String, f64>,
}

/// Upward crossings of the midpoint between the post-transient extremes.
fn period_of(traj: &Trajectory, species: &str, transient: f64) -> PeriodEntry {
    let Some(i) = traj.index_of(species) else {
        return PeriodEntry::Missing {
            error: format!("unknown species {species:?}"),
        };
    };
    let (lo, hi) = traj
        .after(transient)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, s)| {
            (lo.min(s[i]), hi.max(s[i]))
        });
    let opts = PeriodOptions {
        transient,
        skip_crossings: 1,
    };
    match measure_period(traj, species, 0.5 * (lo + hi), &opts) {
        Ok(stats) => PeriodEntry::Stats(stats),
        Err(e) => PeriodEntry::Missing { error: e.to_string() },
    }
}

fn summarize(args: &SimulateArgs, eta1: Option<f64>, prepared: &Prepared, traj: &Trajectory) -> SimulationSummary {
    let transient = args.transient.unwrap_or((0.2 * args.t_end).min(40.0));
    let periods: BTreeMap<String, PeriodEntry> = prepared
        .periods
        .iter()
        .map(|s| (s.clone(), period_of(traj, s, transient)))
        .collect();
    let period_ratio = match (periods.get("x1"), periods.get("x2")) {
        (Some(PeriodEntry::Stats(a)), Some(PeriodEntry::Stats(b))) => Some(a.mean / b.mean),
        _ => None,
    };
    let final_state = traj
        .species()
        .iter()
        .cloned()
        .zip(traj.final_state().unwrap_or(&[]).iter().copied())
        .collect();
    SimulationSummary {
        system: args.system.clone(),
        eta1,
        t_end: args.t_end,
        samples: traj.len(),
        periods,
        period_ratio,
        final_state,
    }
}

fn run_once(args: &SimulateArgs, eta1: Option<f64>) -> Result<(Trajectory, SimulationSummary), CliError> {
    let prepared = prepare(args, eta1)?;
    let spec = IntegrationSpec::new(args.t_end)
        .with_tolerances(args.rel_tol, args.abs_tol)
        .with_sample_dt(args.sample_dt);
    let traj = integrate(&prepared.system, &prepared.init, &spec)?;
    let summary = summarize(args, eta1, &prepared, &traj);
    Ok((traj, summary))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("summaries are always serializable")
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    if let Some(values) = &args.sweep_eta1 {
        let summaries = values
            .par_iter()
            .map(|&e| run_once(args, Some(e)).map(|(_, s)| s))
            .collect::<Result<Vec<_>, _>>()?;
        println!("{}", to_json(&summaries));
        return Ok(());
    }
    let (traj, summary) = run_once(args, None)?;
    if let Some(path) = &args.out {
        let file = fs::File::create(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        traj.write_csv(std::io::BufWriter::new(file)).map_err(parse_err)?;
    }
    println!("{}", to_json(&summary));
    Ok(())
}

fn cmd_schedule(m: Option<u32>, from: Option<&Path>, params: Option<&Path>, out: &Path) -> Result<(), CliError> {
    let schedule = match from {
        Some(path) => {
            Schedule::from_json(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
        }
        None => {
            let (osc, counter) = params::load(params)?;
            let m = m.expect("clap requires m without --from") as usize;
            Schedule::new(m, &osc, &counter).map_err(parse_err)?
        }
    };
    let system = schedule.system().map_err(parse_err)?;
    let crn = compile(&system)?;
    fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    write(&out.join("system.json"), &(system.to_json() + "\n"))?;
    write(&out.join("network.crn"), &crn.format())?;
    write(
        &out.join("assignment.json"),
        &(to_json(&schedule.clock_assignment()) + "\n"),
    )?;
    write(&out.join("schedule.json"), &(schedule.to_json() + "\n"))?;
    println!(
        "{} oscillators, {} modules, {} species, {} reactions -> {}",
        schedule.oscillator_count(),
        schedule.modules,
        system.dim(),
        crn.reactions.len(),
        out.display()
    );
    Ok(())
}

fn cmd_verify(trajectory: &Path, checks: &Path) -> Result<(), CliError> {
    let traj = Trajectory::from_csv(&read(trajectory)?)
        .map_err(|e| CliError::Parse(format!("{}: {e}", trajectory.display())))?;
    let suite: checks::CheckSuite =
        serde_json::from_str(&read(checks)?).map_err(|e| CliError::Parse(format!("{}: {e}", checks.display())))?;
    let report = checks::run_suite(&suite, &traj).map_err(parse_err)?;
    println!("{}", to_json(&report));
    if report.passed {
        Ok(())
    } else {
        Err(CliError::ChecksFailed)
    }
}

fn cmd_period(eta1: f64, rho: f64, tol: f64) -> Result<(), CliError> {
    let est = estimate_period(eta1, rho, tol).map_err(parse_err)?;
    println!("{}", to_json(&est));
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compile { input, out } => cmd_compile(&input, out.as_deref()),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Schedule { m, from, params, out } => cmd_schedule(m, from.as_deref(), params.as_deref(), &out),
        Command::Verify { trajectory, checks } => cmd_verify(&trajectory, &checks),
        Command::Period { eta1, rho, tol } => cmd_period(eta1, rho, tol),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::ChecksFailed) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
