use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chfrac::experiments::runners::write_failure;
use chfrac::experiments::{run_experiment, ExperimentConfig, Scenario, Status};
use chfrac::Error;

/// Solver and experiment harness for Camassa-Holm-alpha flows with fractional dissipation.
#[derive(Debug, Parser)]
#[command(name = "chfrac", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a datum and write the energy stream and a final checkpoint.
    Simulate(RunArgs),
    /// Fit the energy decay exponent.
    Decay(RunArgs),
    /// Fit the gradient decay exponent.
    GradientDecay(RunArgs),
    /// Rescaled data with equal energy and slower and slower decay.
    ScaledFamily(RunArgs),
    /// Convergence to the Navier-Stokes limit as alpha shrinks.
    AlphaSweep(RunArgs),
    /// Helmholtz filter identities and bounds.
    FilterCheck(RunArgs),
    /// Heat kernel, singular integral and seminorm oracles.
    KernelCheck(RunArgs),
    /// Fast consistency battery.
    Selftest(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML configuration; the bundled default for the subcommand if omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for random data.
    #[arg(long)]
    seed: Option<u64>,
    /// Set a configuration value, e.g. `params.dt=0.01`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BLOW_UP: u8 = 3;

fn bundled(scenario: Scenario) -> &'static str {
    match scenario {
        Scenario::Simulate => include_str!("../../../configs/simulate.toml"),
        Scenario::Decay => include_str!("../../../configs/decay.toml"),
        Scenario::GradientDecay => include_str!("../../../configs/gradient-decay.toml"),
        Scenario::ScaledFamily => include_str!("../../../configs/scaled-family.toml"),
        Scenario::AlphaSweep => include_str!("../../../configs/alpha-sweep.toml"),
        Scenario::FilterCheck => include_str!("../../../configs/filter-check.toml"),
        Scenario::KernelCheck => include_str!("../../../configs/kernel-check.toml"),
        Scenario::Selftest => include_str!("../../../configs/selftest.toml"),
    }
}

fn load_config(scenario: Scenario, args: &RunArgs) -> chfrac::Result<ExperimentConfig> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?,
        None => bundled(scenario).to_string(),
    };
    let mut overrides = args.overrides.clone();
    overrides.push(format!("scenario=\"{}\"", scenario.name()));
    if let Some(out) = &args.out {
        overrides.push(format!("output_dir={:?}", out.display().to_string()));
    }
    let mut config = ExperimentConfig::from_toml(&text, &overrides)?;
    if let Some(seed) = args.seed {
        config.datum = config.datum.with_seed(seed);
    }
    Ok(config)
}

fn exit_code(error: &Error) -> u8 {
    match error {
        Error::BlowUp { .. } => EXIT_BLOW_UP,
        Error::Config(_) | Error::Parameter(_) | Error::Io(_) | Error::Checkpoint(_) | Error::Contract(_) => {
            EXIT_USAGE
        }
        _ => EXIT_FAIL,
    }
}

fn run(scenario: Scenario, args: RunArgs) -> u8 {
    if let Some(threads) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot configure {threads} threads: {e}");
            return EXIT_USAGE;
        }
    }
    let config = match load_config(scenario, &args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match run_experiment(&config) {
        Ok(report) => {
            for check in &report.checks {
                let mark = if check.passed { "PASS" } else { "FAIL" };
                println!("{mark} {}: {:e} ({})", check.name, check.value, check.requirement);
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(f) = &report.failure {
                eprintln!("{f}");
            }
            println!("{}: {:?}, report in {}", scenario.name(), report.status, config.output_dir.display());
            match report.status {
                Status::Pass => 0,
                Status::Fail => EXIT_FAIL,
                Status::BlowUp => EXIT_BLOW_UP,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = exit_code(&e);
            if code != EXIT_USAGE {
                if let Err(w) = write_failure(&config.output_dir, &config, &e) {
                    eprintln!("error: cannot write failure report: {w}");
                }
            }
            code
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, args) = match cli.command {
        Command::Simulate(a) => (Scenario::Simulate, a),
        Command::Decay(a) => (Scenario::Decay, a),
        Command::GradientDecay(a) => (Scenario::GradientDecay, a),
        Command::ScaledFamily(a) => (Scenario::ScaledFamily, a),
        Command::AlphaSweep(a) => (Scenario::AlphaSweep, a),
        Command::FilterCheck(a) => (Scenario::FilterCheck, a),
        Command::KernelCheck(a) => (Scenario::KernelCheck, a),
        Command::Selftest(a) => (Scenario::Selftest, a),
    };
    ExitCode::from(run(scenario, args))
}
