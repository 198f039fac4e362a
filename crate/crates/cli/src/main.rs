use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use blindwit::experiment::{
    run, ExperimentConfig, ExperimentKind, PropagatorChoice, RunOptions,
};
use blindwit::io::{parse_config, write_results};
use blindwit::Error;

#[derive(Parser)]
#[command(
    name = "blindwit",
    about = "Simulator of a two-branch interference device with field-coupled two-state witnesses",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PropagatorArg {
    Dense,
    Layered,
    Auto,
}

impl From<PropagatorArg> for PropagatorChoice {
    fn from(p: PropagatorArg) -> Self {
        match p {
            PropagatorArg::Dense => PropagatorChoice::Dense,
            PropagatorArg::Layered => PropagatorChoice::Layered,
            PropagatorArg::Auto => PropagatorChoice::Auto,
        }
    }
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// JSON experiment config; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the CSV table and manifest
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Worker threads for parameter sweeps
    #[arg(long)]
    workers: Option<usize>,
    /// Seed for randomized initial witness phases
    #[arg(long)]
    seed: Option<u64>,
    /// Propagator realization (auto = layered when gamma_w = 0 and n_wit >= 5)
    #[arg(long, value_enum, default_value_t = PropagatorArg::Auto)]
    propagator: PropagatorArg,
}

#[derive(Subcommand)]
enum Command {
    /// Probability snapshots at selected times
    Snapshot(RunArgs),
    /// P_out and dP_norm over a flux grid
    FluxSweep(RunArgs),
    /// Visibility over an E_int grid for several witness counts
    VisibilitySweep(RunArgs),
    /// Witness phase angles and entropies over time
    WitnessDynamics(RunArgs),
    /// Flux sweep with static scatterers instead of witnesses
    ScattererControl(RunArgs),
    /// Extended-time entropy evolution
    LongRun(RunArgs),
    /// Run the numerical invariant suite and print pass/fail per check
    Validate,
    /// Print the device geometry as JSON
    Geometry,
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::Config(_) | Error::InvalidParameter(_) | Error::Io(_) | Error::Json(_) => {
            ExitCode::from(1)
        }
        _ => ExitCode::from(2),
    }
}

fn run_experiment(kind: ExperimentKind, args: &RunArgs) -> Result<(), Error> {
    let cfg = match &args.config {
        Some(path) => {
            let cfg = parse_config(path)?;
            if cfg.kind != kind {
                return Err(Error::Config(format!(
                    "config kind {} does not match verb {}",
                    cfg.kind.name(),
                    kind.name()
                )));
            }
            cfg
        }
        None => ExperimentConfig::new(kind),
    };
    let opts = RunOptions {
        propagator: args.propagator.into(),
        workers: args.workers,
        seed: args.seed,
    };
    let table = run(&cfg, &opts)?;
    let path = write_results(&table, &cfg, &args.out, &cfg.output_stem())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn validate() -> ExitCode {
    let mut failed = 0;
    for outcome in blindwit::validate::run_all() {
        match outcome.result {
            Ok(()) => println!("PASS {}", outcome.name),
            Err(e) => {
                failed += 1;
                println!("FAIL {}: {e}", outcome.name);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Snapshot(a) => run_experiment(ExperimentKind::Snapshot, a),
        Command::FluxSweep(a) => run_experiment(ExperimentKind::FluxSweep, a),
        Command::VisibilitySweep(a) => run_experiment(ExperimentKind::VisibilitySweep, a),
        Command::WitnessDynamics(a) => run_experiment(ExperimentKind::WitnessDynamics, a),
        Command::ScattererControl(a) => run_experiment(ExperimentKind::ScattererControl, a),
        Command::LongRun(a) => run_experiment(ExperimentKind::LongRun, a),
        Command::Validate => return validate(),
        Command::Geometry => {
            let geom = blindwit::device::build_geometry();
            println!(
                "{}",
                serde_json::to_string_pretty(&geom.to_json()).expect("geometry serializes")
            );
            return ExitCode::SUCCESS;
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
