//! `chua-sync`: certify, simulate and scan networks of coupled Chua
//! oscillators from JSON scenario files.
//!
//! Exit codes: 0 success or certified, 1 well formed but not certified,
//! 2 input error, 3 numerical or output failure.

mod commands;
mod config;
mod error;
mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::OutputOptions;
use crate::config::{Config, Overrides};
use crate::error::CliResult;
use crate::report::RunReport;

#[derive(Parser)]
#[command(
    name = "chua-sync",
    version,
    about = "Synchronization certificates for networks of Chua oscillators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the comparison matrix and test it for Hurwitz stability.
    Check(CommonArgs),
    /// Integrate the network and write trajectory and error files.
    Simulate(CommonArgs),
    /// Minimal certified linear gain (closed form for two nodes, search otherwise).
    Threshold(CommonArgs),
    /// Sample the sector condition and the shifted-coupling bound.
    VerifyCoupling(CommonArgs),
    /// Sweep the coupling gain or the pivot node.
    Scan(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for data files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Print the run report as JSON.
    #[arg(long)]
    json: bool,
    /// Seed for random initial states.
    #[arg(long)]
    seed: Option<u64>,
    /// Integration step.
    #[arg(long)]
    dt: Option<f64>,
    /// Final simulation time.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Also write errors.svg (simulate only).
    #[arg(long)]
    svg: bool,
}

fn run(command: &Command, args: &CommonArgs) -> CliResult<RunReport> {
    let overrides = Overrides {
        seed: args.seed,
        dt: args.dt,
        t_end: args.t_end,
    };
    let scenario = Config::load(&args.config)?.into_scenario(overrides)?;
    for w in &scenario.warnings {
        eprintln!("warning: {w}");
    }
    let out = OutputOptions {
        dir: &args.out,
        svg: args.svg,
    };
    let report = match command {
        Command::Check(_) => commands::check(&scenario),
        Command::Simulate(_) => commands::simulate(&scenario, &out),
        Command::Threshold(_) => commands::threshold(&scenario),
        Command::VerifyCoupling(_) => commands::verify_coupling(&scenario),
        Command::Scan(_) => commands::scan(&scenario, &out),
    }?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Check(a) => ("check", a),
        Command::Simulate(a) => ("simulate", a),
        Command::Threshold(a) => ("threshold", a),
        Command::VerifyCoupling(a) => ("verify-coupling", a),
        Command::Scan(a) => ("scan", a),
    };
    let report = run(&cli.command, args).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        RunReport {
            exit_code: e.exit_code(),
            verdict: "error".to_string(),
            error: Some(e.to_string()),
            ..RunReport::new(name)
        }
    });
    if args.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_text());
    }
    ExitCode::from(report.exit_code)
}
