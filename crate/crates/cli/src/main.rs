use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dipolenet::Solver;

mod commands;

use commands::Failure;

#[derive(Debug, Parser)]
#[command(name = "dipolenet", version, about = "Dipole network sweeps, fits and limit-theorem checks")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// JSON experiment config; missing keys take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Master seed; overrides the config value.
    #[arg(long, global = true, env = "DIPOLENET_SEED", value_name = "U64")]
    seed: Option<u64>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0, value_name = "K")]
    workers: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured sweep and write records.csv and summary.json.
    Simulate {
        /// Store measured wall time per record (output is then not byte-stable).
        #[arg(long)]
        record_timing: bool,
    },
    /// Fit mean active counts from a records CSV.
    Fit {
        #[arg(long, value_name = "CSV")]
        records: PathBuf,
        /// Pin the exponent and fit only the constant and scale.
        #[arg(long, value_name = "B")]
        fix_exponent: Option<f64>,
    },
    /// Render an SVG scatter of a records CSV with the fitted curve.
    Plot {
        #[arg(long, value_name = "CSV")]
        records: PathBuf,
        #[arg(long, value_name = "B")]
        fix_exponent: Option<f64>,
        /// Output file; defaults to plot.svg under --out.
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Print P(h > z) for the interference gain.
    TailEval {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        z: f64,
    },
    /// Strong-law check for normalized sums of interference gains.
    SllnTest {
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 3.0)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000,1000000")]
        sizes: Vec<u64>,
        #[arg(long, default_value_t = 100)]
        reps: u64,
        /// Use a Poisson number of summands with the given means.
        #[arg(long)]
        poisson: bool,
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Single-big-jump check for sums of interference gains.
    BigjumpTest {
        #[arg(long, default_value_t = 50)]
        m: u64,
        #[arg(long, default_value_t = 3.0)]
        alpha: f64,
        /// Thresholds; defaults to the x with m * P(X > x) = --mass.
        #[arg(long, value_delimiter = ',')]
        x: Vec<f64>,
        #[arg(long, default_value_t = 0.01)]
        mass: f64,
        #[arg(long, default_value_t = 1_000_000)]
        reps: u64,
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Decay of the interference-violation probability along an n grid.
    FeasibilityTest {
        #[arg(long, default_value_t = 0.2)]
        delta: f64,
        #[arg(long, default_value_t = 0.4)]
        gamma: f64,
        #[arg(long, default_value_t = 0.6)]
        p: f64,
        #[arg(long, default_value_t = 3.0)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
        n_grid: Vec<f64>,
        #[arg(long, default_value_t = 200_000)]
        reps: u64,
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Sample one network and activate links.
    Activate {
        #[arg(long, default_value = "tblas", value_parser = parse_solver)]
        solver: Solver,
        /// Intensity; defaults to the first entry of the config grid.
        #[arg(long)]
        n: Option<f64>,
    },
}

fn parse_solver(s: &str) -> Result<Solver, String> {
    s.parse().map_err(|e: dipolenet::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Failure::USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli.global, cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
