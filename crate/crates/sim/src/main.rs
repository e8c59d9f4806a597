use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scqc_sim::{run, write_csv, Config, Scenario, SimError};

/// Link-budget and key-rate sweeps for simultaneous classical and quantum
/// communication links.
#[derive(Parser)]
#[command(name = "scqc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// DV (decoy BB84) key and QSDC payload rates versus altitude
    DvSweep(Common),
    /// CV (displaced GMCS) key and classical rates versus altitude
    CvSweep(Common),
    /// Slant-path gaseous attenuation versus frequency and slant distance
    AtmosGrid(Common),
    /// Mean thermal photon number versus frequency and temperature
    ThermalGrid(Common),
    /// Highest altitude with a positive key rate, per protocol and block size
    MaxAltitude(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// CSV output file (default: the config's output.path, else stdout)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// worker threads (default: one per core)
    #[arg(long, value_name = "INT")]
    workers: Option<usize>,
    /// section.key=VALUE, applied after the config file; repeatable
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, args) = match cli.command {
        Command::DvSweep(a) => (Scenario::DvSweep, a),
        Command::CvSweep(a) => (Scenario::CvSweep, a),
        Command::AtmosGrid(a) => (Scenario::AtmosGrid, a),
        Command::ThermalGrid(a) => (Scenario::ThermalGrid, a),
        Command::MaxAltitude(a) => (Scenario::MaxAltitude, a),
    };
    match execute(scenario, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(scenario: Scenario, args: &Common) -> Result<(), SimError> {
    if args.workers == Some(0) {
        return Err(SimError::Config("--workers must be at least 1".into()));
    }
    let cfg = Config::load(args.config.as_deref(), &args.overrides)?;
    let table = run(scenario, &cfg, args.workers)?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    match out {
        Some(path) => {
            let io_err = |source| SimError::Io {
                path: path.display().to_string(),
                source,
            };
            let file = File::create(&path).map_err(io_err)?;
            write_csv(BufWriter::new(file), &table, &cfg).map_err(io_err)
        }
        None => write_csv(io::stdout().lock(), &table, &cfg).map_err(|source| SimError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}
