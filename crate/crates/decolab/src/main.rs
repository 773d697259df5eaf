use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use decolab::harness::config::PRESET_NAMES;
use decolab::harness::{ScenarioConfig, run_scenario, validate_suite};
use decolab::Error;

/// Numerical laboratory for system-apparatus decoherence: builds entangled
/// pure-mixed states, evolves them against a random or non-demolition
/// environment coupling, and records entanglement and distance measures.
#[derive(Parser)]
#[command(name = "decolab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario; writes <out>.csv (trajectory) and <out>.json (summary)
    Run(RunArgs),
    /// Run the analytic-vs-numerical validation battery
    Validate {
        /// Seed for the battery's random parameter draws
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print preset configurations in the config-file format
    Presets {
        /// Preset name; omit to list all
        name: Option<String>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Preset scenario name (fig1, fig2, fig3, fig4a, fig4b, fig5)
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// Config file in the flat key = value format
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the coupling-matrix seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the environment-state seed
    #[arg(long)]
    env_seed: Option<u64>,
    /// Override the time step
    #[arg(long)]
    dt: Option<f64>,
    /// Override the number of steps
    #[arg(long)]
    steps: Option<usize>,
    /// Override the recording interval
    #[arg(long)]
    record_every: Option<usize>,
    /// Override the output path prefix
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run(args) => {
            let mut config = match (&args.scenario, &args.config) {
                (_, Some(path)) => ScenarioConfig::from_text(&std::fs::read_to_string(path)?)?,
                (Some(name), None) => ScenarioConfig::preset(name)?,
                (None, None) => {
                    return Err(Error::Config(
                        "pass --scenario <name> or --config <file>".into(),
                    ));
                }
            };
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            if let Some(env_seed) = args.env_seed {
                config.env_seed = env_seed;
            }
            if let Some(dt) = args.dt {
                config.dt = dt;
            }
            if let Some(steps) = args.steps {
                config.n_steps = steps;
            }
            if let Some(every) = args.record_every {
                config.record_every = every;
            }
            if let Some(out) = args.out {
                config.out = out;
            }

            let summary = run_scenario(&config)?;
            println!(
                "{}: {} records in {:.1}s -> {} / {}",
                summary.scenario,
                summary.n_records,
                summary.wall_clock_seconds,
                summary.csv_path.display(),
                summary.json_path.display(),
            );
            println!(
                "  Q_D {:.3e} -> {:.3e} ({:?}), min PT eig {:.3e} -> {:.3e}",
                summary.initial.q_d,
                summary.r#final.q_d,
                summary.q_d_fit.verdict,
                summary.initial.min_pt_eig,
                summary.r#final.min_pt_eig,
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { seed } => {
            let report = validate_suite(seed);
            print!("{}", report.render());
            if report.all_passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Presets { name } => {
            let names: Vec<&str> = match &name {
                Some(n) => vec![n.as_str()],
                None => PRESET_NAMES.to_vec(),
            };
            for (i, n) in names.iter().enumerate() {
                if i > 0 {
                    println!();
                }
                println!("# {n}");
                print!("{}", ScenarioConfig::preset(n)?.to_text());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// 1 for configuration problems, 2 for runtime invariant violations.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Io(_)
        | Error::InvalidWeights(_)
        | Error::InvalidAmplitudes(_)
        | Error::InvalidLayout(_)
        | Error::InvalidStep { .. }
        | Error::InvalidFloor { .. }
        | Error::UnsupportedSectorCount { .. }
        | Error::NotNormalized { .. }
        | Error::DimensionMismatch { .. } => 1,
        Error::DiagnosticsDiverged { .. }
        | Error::NotPositive { .. }
        | Error::NotHermitian { .. }
        | Error::InvalidTrace { .. }
        | Error::NotSquare { .. }
        | Error::Eigen(_) => 2,
    }
}
