use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;

use erl_core::io::{load_document, load_state};
use erl_core::protocols::{
    equivalence_suite, run_appendix_a, run_concentration_check, run_entanglement_swap, run_epr, run_no_cloning,
    run_noncommutativity, run_teleportation, run_von_neumann, write_checks_csv, AppendixAParams, Scenario,
    ScenarioReport, DEFAULT_R,
};
use erl_core::random::{random_valid_channel, rng};
use erl_core::state::quadrature_state;
use erl_core::{Error, GaussianState};

/// Exit codes: 0 pass / valid, 1 fail / invalid, 2 usage or parse error.
#[derive(Parser, Debug)]
#[command(name = "erl", version, about = "Phase-space engines for epistemically restricted Liouville mechanics")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct RunConfig {
    /// Action scale λ (positive).
    #[arg(long, global = true, default_value_t = 1.0, value_parser = positive)]
    lambda: f64,
    /// Regularization squeezing r for delta/uniform limits.
    #[arg(long = "r", global = true, default_value_t = DEFAULT_R)]
    r: f64,
    /// Sample count for sampled legs.
    #[arg(long = "N", global = true, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Tolerance for uncertainty-constraint checks.
    #[arg(long, global = true, default_value_t = 1e-9, value_parser = positive)]
    tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a state, indicator or channel file against the uncertainty constraint.
    Validate { path: PathBuf },
    /// Run one scenario and report its checks.
    Scenario(ScenarioArgs),
    /// Compare the analytic and sampled engines across scenarios and seeds.
    Equivalence(EquivalenceArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ScenarioName {
    Epr,
    Teleport,
    EntanglementSwap,
    NoCloning,
    Noncommutativity,
    VonNeumann,
    AppendixA,
    Concentration,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    #[arg(value_enum)]
    name: ScenarioName,
    /// State file: teleportation input, swap target, first no-cloning state
    /// or non-commutativity initial state.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Second no-cloning state.
    #[arg(long)]
    input2: Option<PathBuf>,
    /// Measured quadrature angle (epr).
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Coupling strength χt (von-neumann).
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Probe squeezing (von-neumann).
    #[arg(long, default_value_t = 6.0)]
    probe_r: f64,
    /// Conjugate variance after a readout, in units of λ (noncommutativity).
    #[arg(long, default_value_t = 1e6)]
    cap: f64,
    /// Initial-state squeezing (noncommutativity).
    #[arg(long, default_value_t = 6.0)]
    squeeze: f64,
    /// Maximum covariance deviation accepted (entanglement-swap).
    #[arg(long, default_value_t = 1e-3)]
    deviation_tol: f64,
    /// Random valid channels for the monotonicity sweep (no-cloning).
    #[arg(long, default_value_t = 200)]
    random_channels: usize,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 2)]
    modes: usize,
    #[arg(long, default_value_t = 100.0)]
    q0: f64,
    #[arg(long, default_value_t = 100.0)]
    p0: f64,
    #[arg(long, default_value_t = 0.01)]
    dq: f64,
    #[arg(long, default_value_t = 0.01)]
    dp: f64,
    #[arg(long, default_value_t = 1.0)]
    dq_prime: f64,
    #[arg(long, default_value_t = 1.0)]
    dp_prime: f64,
}

#[derive(Args, Debug)]
struct EquivalenceArgs {
    /// Scenarios to run (default: the full suite).
    #[arg(long, value_delimiter = ',')]
    scenarios: Vec<String>,
    /// Seeds, comma separated; defaults to --seed.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Add the negative control whose sampled channel noise is halved.
    #[arg(long)]
    corrupt_channel: bool,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Config(_) | Error::UnsupportedScenario(_) | Error::Io(_) => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("erl: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    match &cli.command {
        Command::Validate { path } => cmd_validate(&cli.config, path),
        Command::Scenario(args) => {
            let report = cmd_scenario(&cli.config, args)?;
            emit_reports(&cli.config, std::slice::from_ref(&report), &report)?;
            Ok(report.pass)
        }
        Command::Equivalence(args) => cmd_equivalence(&cli.config, args),
    }
}

fn output(config: &RunConfig) -> Result<Box<dyn Write>, Failure> {
    Ok(match &config.out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_reports<T: Serialize>(config: &RunConfig, reports: &[ScenarioReport], json: &T) -> Result<(), Failure> {
    let mut w = output(config)?;
    match config.format {
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(json).map_err(|e| usage(e.to_string()))?)?,
        Format::Csv => write_checks_csv(reports, &mut w, true)?,
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ValidateOutput {
    path: String,
    kind: &'static str,
    #[serde(flatten)]
    report: erl_core::ValidityReport,
}

fn cmd_validate(config: &RunConfig, path: &Path) -> Result<bool, Failure> {
    let doc = load_document(path).map_err(|e| match e {
        Error::Io(io) => usage(format!("{}: {io}", path.display())),
        other => usage(format!("{}: {other}", path.display())),
    })?;
    let report = doc.validate(config.tol);
    let out = ValidateOutput { path: path.display().to_string(), kind: doc.kind(), report };
    let mut w = output(config)?;
    match config.format {
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&out).map_err(|e| usage(e.to_string()))?)?,
        Format::Csv => {
            writeln!(w, "path,kind,cupSatisfied,minEigenvalue,saturating,maxEntSatisfied")?;
            writeln!(
                w,
                "{},{},{},{},{},{}",
                csv_field(&out.path),
                out.kind,
                report.cup_satisfied,
                report.min_eigenvalue,
                report.saturating,
                report.max_ent_satisfied
            )?;
        }
    }
    w.flush()?;
    Ok(report.is_valid())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn state_arg(path: &Option<PathBuf>, default: impl FnOnce() -> erl_core::Result<GaussianState>) -> Result<GaussianState, Failure> {
    match path {
        Some(p) => load_state(p).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => Ok(default()?),
    }
}

fn cmd_scenario(config: &RunConfig, a: &ScenarioArgs) -> Result<ScenarioReport, Failure> {
    let (lambda, r, n, seed) = (config.lambda, config.r, config.n as usize, config.seed);
    let report = match a.name {
        ScenarioName::Epr => run_epr(r, a.theta, lambda, n, seed)?,
        ScenarioName::Teleport => {
            let input = state_arg(&a.input, || GaussianState::vacuum(lambda, 1))?;
            run_teleportation(&input, r, n, seed)?.0
        }
        ScenarioName::EntanglementSwap => {
            let target = state_arg(&a.input, || GaussianState::vacuum(lambda, 2))?;
            run_entanglement_swap(&target, r, a.deviation_tol)?
        }
        ScenarioName::NoCloning => {
            // Default pair: V = (λ)I states two units apart, F = e^{−1/2} at λ = 1.
            let s1 = state_arg(&a.input, || GaussianState::thermal(lambda, 1, 2.0))?;
            let s2 = state_arg(&a.input2, || s1.displaced(&DVector::from_vec(vec![2.0, 0.0])))?;
            let mut g = rng(seed);
            let channels = (0..a.random_channels)
                .map(|_| random_valid_channel(s1.modes(), lambda, 0.05, &mut g))
                .collect::<erl_core::Result<Vec<_>>>()?;
            run_no_cloning(&s1, &s2, &channels)?
        }
        ScenarioName::Noncommutativity => {
            let initial = state_arg(&a.input, || quadrature_state(0.0, 0.0, a.squeeze, lambda))?;
            run_noncommutativity(&initial, a.cap * lambda, n, seed)?
        }
        ScenarioName::VonNeumann => run_von_neumann(a.kappa, a.probe_r, lambda, n, seed)?,
        ScenarioName::AppendixA => run_appendix_a(&AppendixAParams {
            q0: a.q0,
            p0: a.p0,
            dq: a.dq,
            dp: a.dp,
            indicator_dq: a.dq_prime,
            indicator_dp: a.dp_prime,
            lambda,
        })?,
        ScenarioName::Concentration => run_concentration_check(a.trials, a.modes, lambda, seed)?,
    };
    Ok(report)
}

#[derive(Serialize)]
struct EquivalenceOutput<'a> {
    summary: &'a erl_core::protocols::EquivalenceSummary,
    reports: &'a [ScenarioReport],
}

fn cmd_equivalence(config: &RunConfig, a: &EquivalenceArgs) -> Result<bool, Failure> {
    let mut scenarios: Vec<Scenario> = if a.scenarios.is_empty() {
        Scenario::SUITE.to_vec()
    } else {
        a.scenarios
            .iter()
            .map(|s| s.parse::<Scenario>().map_err(|e: Error| usage(e.to_string())))
            .collect::<Result<_, _>>()?
    };
    if a.corrupt_channel && !scenarios.contains(&Scenario::CorruptedChannel) {
        scenarios.push(Scenario::CorruptedChannel);
    }
    let seeds = if a.seeds.is_empty() { vec![config.seed] } else { a.seeds.clone() };
    let (summary, reports) = equivalence_suite(&scenarios, config.n as usize, &seeds)?;
    for row in summary.failing() {
        eprintln!("erl: {} (seed {}) failed: max |z| = {:.3} at {}", row.scenario, row.seed, row.max_abs_z, row.worst_statistic);
    }
    emit_reports(config, &reports, &EquivalenceOutput { summary: &summary, reports: &reports })?;
    Ok(summary.pass)
}
