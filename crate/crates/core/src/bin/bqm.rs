use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bqm::scenario::{
    load_config, run_curvature, run_evolve, run_verify, write_curvature, write_report, write_traces, InvariantReport,
};
use bqm::{Result, Tolerance};

#[derive(Parser)]
#[command(name = "bqm", version, about = "Mixed-state evolution in Hilbert-space and bundle form")]
struct Cli {
    /// Tolerance used when validating inputs (Hermiticity, unit trace, weights).
    #[arg(long, global = true, default_value_t = 1e-10)]
    tolerance: f64,
    /// Only report through the exit code.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a scenario and write the trace table and report.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Curvature table and flatness analysis of a scenario.
    Curvature {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Randomized sweep over every invariant.
    Verify {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        trials: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: &Cli) -> Result<InvariantReport> {
    let tol = Tolerance::uniform(cli.tolerance)?;
    match &cli.command {
        Command::Evolve { config, out } => {
            let cfg = load_config(config, &tol)?;
            let (table, report) = run_evolve(&cfg)?;
            write_traces(&table, &report, out, &cfg.outputs)?;
            Ok(report)
        }
        Command::Curvature { config, out } => {
            let cfg = load_config(config, &tol)?;
            let outcome = run_curvature(&cfg)?;
            write_curvature(&outcome, out, &cfg)?;
            Ok(outcome.report)
        }
        Command::Verify { seed, trials, dims, out } => {
            let report = run_verify(*seed, *trials, dims)?;
            if let Some(dir) = out {
                write_report(&report, dir, "report.json")?;
            }
            Ok(report)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if !cli.quiet {
                print!("{}", report.summary());
            }
            if report.overall {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
