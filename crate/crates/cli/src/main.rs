//! `isokin` command-line front end.
//!
//! Exit codes: 0 success, 1 failed checks or runtime failure, 2 degenerate
//! point, 64 configuration error, 73 unwritable output directory.

mod commands;
mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "isokin", version, about = "Isoline kinematics of unsteady planar fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the scenario output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the nine characteristics, the frame and the identity residuals
    /// at one point.
    Characteristics {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t: f64,
        /// Defaults to the robot's initial position.
        #[arg(long, allow_negative_numbers = true)]
        x: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        y: Option<f64>,
    },
    /// Run verification suites and write report.txt, checks.csv and
    /// rotation_bounds.csv.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Suite to run (repeatable); defaults to the scenario's list, or all.
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
    /// Write trajectory, isoline and characteristic-grid CSV files.
    Export {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Degenerate(String),
    Runtime(String),
    Unwritable(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Degenerate(_) => 2,
            CliError::Config(_) => 64,
            CliError::Unwritable(_) => 73,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Degenerate(m) => write!(f, "{m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
            CliError::Unwritable(m) => write!(f, "cannot write output: {m}"),
        }
    }
}

impl From<isokin::Error> for CliError {
    fn from(e: isokin::Error) -> Self {
        match e {
            isokin::Error::Degenerate { .. } | isokin::Error::DegenerateRegion { .. } => {
                CliError::Degenerate(e.to_string())
            }
            isokin::Error::InvalidField(_)
            | isokin::Error::InvalidSettings(_)
            | isokin::Error::InvalidRegion(_) => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Characteristics { common, t, x, y } => {
            let sc = scenario::Scenario::load(&common.scenario)?;
            let x = x.unwrap_or(sc.robot.x);
            let y = y.unwrap_or(sc.robot.y);
            print!("{}", commands::characteristics(&sc, t, x, y)?);
            Ok(0)
        }
        Command::Verify { common, suites } => {
            let sc = scenario::Scenario::load(&common.scenario)?;
            let suites = if suites.is_empty() {
                sc.suites()?
            } else {
                scenario::parse_suites(&suites)?
            };
            let seed = common.seed.unwrap_or(sc.seed);
            let out = common.out.unwrap_or_else(|| sc.output_dir.clone());
            let outcome = commands::verify(&sc, &suites, seed, &out)?;
            print!("{}", outcome.report);
            Ok(if outcome.passed { 0 } else { 1 })
        }
        Command::Export { common } => {
            let sc = scenario::Scenario::load(&common.scenario)?;
            let out = common.out.unwrap_or_else(|| sc.output_dir.clone());
            for path in commands::export(&sc, &out)? {
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("isokin: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
