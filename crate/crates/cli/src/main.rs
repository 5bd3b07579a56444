mod commands;
mod manifest;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Exit codes (sysexits-style above 64).
pub mod exit {
    pub const OK: u8 = 0;
    pub const INFEASIBLE: u8 = 2;
    pub const VERIFY_FAILED: u8 = 3;
    pub const USAGE: u8 = 64;
    pub const DATA: u8 = 65;
    pub const NO_INPUT: u8 = 66;
    pub const SOFTWARE: u8 = 70;
    pub const CANT_CREATE: u8 = 73;
}

#[derive(Parser, Debug)]
#[command(name = "declfc", version, about = "Decentralized observer-based LFC design, verification and simulation")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Integrated,
    Separated,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the design LMI and write gains, certificate and manifest.
    Design {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "integrated")]
        strategy: StrategyArg,
        /// Override whether the strip constraints of the config are imposed.
        #[arg(long, value_enum)]
        strips: Option<OnOff>,
        /// Write gains from the best point when no certified point exists (exit code stays 2).
        #[arg(long)]
        best_effort: bool,
        /// Also write the assembled problem in the sparse text format.
        #[arg(long)]
        dump_problem: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a gains file against a config; exit 3 when any check fails.
    Verify {
        gains: PathBuf,
        config: PathBuf,
        #[arg(long, value_enum)]
        strips: Option<OnOff>,
        /// Output directory (default: the gains file's directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate load steps; writes trajectory CSV, metrics and a gnuplot script.
    Simulate {
        gains: PathBuf,
        config: PathBuf,
        /// Schedule file (`t_end`, optional `dt`/`stride`, `[[event]]`), overriding the config's.
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Second gains file simulated under the same schedule, reported side by side.
        #[arg(long)]
        compare: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Consolidated report of one run directory, or a comparison of two.
    Report {
        #[arg(required = true, num_args = 1..=2)]
        dirs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();
    let result = match cli.cmd {
        Command::Design { config, strategy, strips, best_effort, dump_problem, out } => {
            commands::design(&config, strategy, strips, best_effort, dump_problem.as_deref(), &out)
        }
        Command::Verify { gains, config, strips, out } => commands::verify(&gains, &config, strips, out.as_deref()),
        Command::Simulate { gains, config, schedule, compare, out } => {
            commands::simulate(&gains, &config, schedule.as_deref(), compare.as_deref(), &out)
        }
        Command::Report { dirs } => commands::report(&dirs),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("declfc: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
