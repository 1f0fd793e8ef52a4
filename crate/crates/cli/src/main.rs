use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hetnet_core::channel_metrics::build_matrices;
use hetnet_core::equilibrium::{build_system, fixed_point, mixed_population_system, spectral_radius};
use hetnet_core::linalg::inf_dist;
use hetnet_core::scenario_gen::{generate, worked_example};
use hetnet_core::sim_engine::{monte_carlo, run_with_matrices, summarize, write_csv, write_trace_csv};
use hetnet_core::{presets, Error, GenParams, Metrics, PolicyKind, RunConfig, Scenario, Verdict, WorkedCase};
use serde::Serialize;

const USAGE: u8 = 2;
const VALIDATION: u8 = 3;
const NUMERICAL: u8 = 4;
const IO: u8 = 1;

/// Uplink dual-connectivity power control simulator.
#[derive(Parser, Debug)]
#[command(name = "hetnet", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one scenario and write trace.csv, metrics.json and, when the
    /// iteration is contractive, equilibrium.json
    Run(RunArgs),
    /// Monte Carlo sweep for a preset; writes trials.csv and summary.csv
    Experiment(ExperimentArgs),
    /// Draw a random scenario and print it as JSON
    Generate(GenerateArgs),
    /// Print the two-UE worked scenario as JSON
    Example(ExampleArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    Bdt,
    Wf,
    Greedy,
    /// BDT for dual-link UEs; single-link UEs track their SINR target
    MixedFm,
}

impl PolicyArg {
    fn kind(self) -> PolicyKind {
        match self {
            PolicyArg::Bdt | PolicyArg::MixedFm => PolicyKind::Bdt,
            PolicyArg::Wf => PolicyKind::Waterfilling,
            PolicyArg::Greedy => PolicyKind::Greedy,
        }
    }
}

#[derive(Args, Debug)]
struct OutDir {
    /// Output directory
    #[arg(long, env = "HETNET_OUT_DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Scenario JSON file
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, default_value = "bdt")]
    policy: PolicyArg,
    /// Maximum number of power control iterations
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    iters: u64,
    /// Convergence tolerance on powers, watts
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Iterations the powers must stay within eps to count as converged
    #[arg(long, default_value_t = 5)]
    window: usize,
    /// Override the rate differential threshold, bits/s
    #[arg(long)]
    tau: Option<f64>,
    /// Override the power scaling factor
    #[arg(long)]
    z: Option<f64>,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(
        ["fig2b", "fig3", "fig4", "fig5", "fig5-picos", "fig5-relays"]
    ))]
    preset: String,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the preset's iteration count
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    iters: Option<u64>,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Generator parameters as JSON; flags below override it
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    n_ues: Option<usize>,
    #[arg(long)]
    n_fixed_sinr: Option<usize>,
    #[arg(long)]
    relays: Option<usize>,
    #[arg(long)]
    picos: Option<usize>,
    /// Multiplier on every backhaul capacity
    #[arg(long)]
    backhaul_scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write to this file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CaseArg {
    High,
    Limited,
}

#[derive(Args, Debug)]
struct ExampleArgs {
    #[arg(long, value_enum, default_value = "high")]
    case: CaseArg,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Invalid(_)
            | Error::InvalidParams(_)
            | Error::InfeasibleChannels(_)
            | Error::NonPositive { .. }
            | Error::UnknownUe(_)
            | Error::UnknownLink { .. }
            | Error::MissingGain { .. }
            | Error::DimensionMismatch { .. }
            | Error::Json(_) => VALIDATION,
            Error::Singular | Error::NotContractive(_) | Error::EigenNoConvergence | Error::Infeasible { .. } => {
                NUMERICAL
            }
            Error::Csv(_) | Error::Io(_) => IO,
        };
        let mut message = e.to_string();
        if let Error::Invalid(list) = &e {
            for v in list {
                message += &format!("\n  {v}");
            }
        }
        Failure::new(code, message)
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::new(IO, format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &[u8]) -> Outcome {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn create_dir(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn to_json<T: Serialize>(value: &T) -> Outcome<Vec<u8>> {
    let mut text = serde_json::to_vec_pretty(value).map_err(|e| Failure::new(IO, e.to_string()))?;
    text.push(b'\n');
    Ok(text)
}

fn emit(output: Option<&Path>, text: &str) -> Outcome {
    match output {
        Some(path) => write_file(path, text.as_bytes()),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct RunSummary<'a> {
    policy: &'a str,
    verdict: &'a Verdict,
    #[serde(flatten)]
    metrics: &'a Metrics,
}

#[derive(Serialize)]
struct EquilibriumReport<'a> {
    /// Policy of the simulated run; the prediction is the unconstrained
    /// waterfilling fixed point.
    policy: &'a str,
    spectral_radius: f64,
    predicted_p1: Vec<f64>,
    predicted_p2: Vec<f64>,
    simulated_p1: Vec<f64>,
    simulated_p2: Vec<f64>,
    max_abs_error: f64,
}

fn load_scenario(path: &Path) -> Outcome<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let s = Scenario::from_json(&text).map_err(|e| Failure::new(VALIDATION, format!("{}: {e}", path.display())))?;
    Ok(s)
}

fn cmd_run(args: RunArgs) -> Outcome {
    let mut s = load_scenario(&args.scenario)?;
    if let Some(tau) = args.tau {
        s.tau = tau;
    }
    if let Some(z) = args.z {
        s.z_factor = z;
    }
    let violations = s.validate();
    if !violations.is_empty() {
        return Err(Error::Invalid(violations).into());
    }
    if args.eps.is_nan() || args.eps < 0.0 || args.window == 0 {
        return Err(Failure::new(USAGE, "--eps must be >= 0 and --window >= 1"));
    }
    let has_fm = s.ues.iter().any(|u| !u.is_dual());
    if has_fm && !matches!(args.policy, PolicyArg::MixedFm | PolicyArg::Bdt) {
        eprintln!("note: single-link UEs track their SINR target regardless of --policy");
    }

    let m = build_matrices(&s)?;
    let cfg = RunConfig {
        eps: args.eps,
        window: args.window,
        ..RunConfig::new(args.policy.kind()).with_max_iter(args.iters as usize)
    };
    let trace = run_with_matrices(&s, &m, &cfg)?;

    let dir = &args.out.out;
    create_dir(dir)?;
    let mut csv = Vec::new();
    write_trace_csv(&s, &trace, &mut csv)?;
    write_file(&dir.join("trace.csv"), &csv)?;
    let label = args.policy.to_possible_value().expect("named variant");
    let summary = RunSummary { policy: label.get_name(), verdict: &trace.verdict, metrics: &trace.metrics };
    write_file(&dir.join("metrics.json"), &to_json(&summary)?)?;

    let sys = build_system(&m, &s.p_max())?;
    let q: Vec<bool> = s.ues.iter().map(|u| !u.is_dual()).collect();
    let beta: Vec<f64> = s.ues.iter().map(|u| u.fixed_sinr_target.unwrap_or(0.0)).collect();
    let (mat, offset) = mixed_population_system(&m, &sys, &q, &beta)?;
    let rho = spectral_radius(&mat)?;
    if rho < 1.0 {
        let p1 = fixed_point(&mat, &offset)?;
        let p2: Vec<f64> = s
            .ues
            .iter()
            .zip(&p1)
            .map(|(u, p)| if u.is_dual() { u.p_max - p } else { 0.0 })
            .collect();
        let last = trace.last();
        let report = EquilibriumReport {
            policy: label.get_name(),
            spectral_radius: rho,
            max_abs_error: inf_dist(&p1, &last.p1).max(inf_dist(&p2, &last.p2)),
            predicted_p1: p1,
            predicted_p2: p2,
            simulated_p1: last.p1.clone(),
            simulated_p2: last.p2.clone(),
        };
        write_file(&dir.join("equilibrium.json"), &to_json(&report)?)?;
    }
    eprintln!(
        "{}: {:?}, eta_n = {:.4} bits/s/Hz, avg power = {:.4} W -> {}",
        label.get_name(),
        trace.verdict,
        trace.metrics.eta_n_normalized,
        trace.metrics.avg_total_power,
        dir.display()
    );
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Outcome {
    let mut exp = presets::preset(&args.preset)?;
    if let Some(iters) = args.iters {
        exp.max_iter = iters as usize;
    }
    let records = monte_carlo(&exp, args.trials as usize, args.seed)?;
    let summary = summarize(&records);
    let dir = &args.out.out;
    create_dir(dir)?;
    let mut buf = Vec::new();
    write_csv(&records, &mut buf)?;
    write_file(&dir.join("trials.csv"), &buf)?;
    let mut buf = Vec::new();
    write_csv(&summary, &mut buf)?;
    write_file(&dir.join("summary.csv"), &buf)?;
    eprintln!("{}: {} trial records -> {}", exp.preset, records.len(), dir.display());
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Outcome {
    let mut params = match &args.params {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            serde_json::from_str(&text).map_err(|e| Failure::new(VALIDATION, format!("{}: {e}", path.display())))?
        }
        None => GenParams::default(),
    };
    if let Some(v) = args.n_ues {
        params.n_ues = v;
    }
    if let Some(v) = args.n_fixed_sinr {
        params.n_fixed_sinr = v;
    }
    if let Some(v) = args.relays {
        params.n_relays = v;
    }
    if let Some(v) = args.picos {
        params.n_picos = v;
    }
    if let Some(v) = args.backhaul_scale {
        params.backhaul_scale = v;
    }
    if let Some(v) = args.seed {
        params.seed = v;
    }
    let s: Scenario = generate(&params)?;
    emit(args.output.as_deref(), &s.to_json()?)
}

fn cmd_example(args: ExampleArgs) -> Outcome {
    let case = match args.case {
        CaseArg::High => WorkedCase::HighBackhaul,
        CaseArg::Limited => WorkedCase::LimitedBackhaul,
    };
    let s: Scenario = worked_example(case);
    emit(args.output.as_deref(), &s.to_json()?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Example(a) => cmd_example(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
