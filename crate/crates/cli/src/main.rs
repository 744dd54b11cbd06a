// SPDX-License-Identifier: Apache-2.0

//! `mxepi`: generate multiplex networks, compute thresholds and outbreak
//! sizes, and run Monte Carlo sweeps and coupling studies.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multiplex_epidemic::sim::SimMode;
use multiplex_epidemic::Weighting;

#[derive(Parser, Debug)]
#[command(name = "mxepi", version, about = "Two-route epidemics on two-layer multiplex networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a coupled two-layer network and write it as an edge list.
    #[command(args_override_self = true)]
    Generate(GenerateArgs),
    /// Print degree, overlap and correlation metrics of a graph file.
    #[command(args_override_self = true)]
    Metrics(MetricsArgs),
    /// Compute the critical curve in the (lambda_a, lambda_b) plane.
    #[command(args_override_self = true)]
    Threshold(ThresholdArgs),
    /// Theory and Monte Carlo outbreak sizes over a rate grid.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Diagonal threshold and outbreak size versus an ASN or DDC target.
    #[command(args_override_self = true)]
    Study(StudyArgs),
}

/// Options accepted by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Master seed for every random choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file with defaults for any long option.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NetworkKind {
    ErEr,
    ErSf,
    SfEr,
    SfSf,
}

#[derive(Args, Debug, Clone)]
pub struct NetworkArgs {
    /// Layer types, A first.
    #[arg(long, value_enum, default_value_t = NetworkKind::ErEr)]
    pub kind: NetworkKind,
    /// Number of nodes.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Target mean degree of layer A.
    #[arg(long)]
    pub ka: f64,
    /// Target mean degree of layer B.
    #[arg(long)]
    pub kb: f64,
    /// Allowed deviation from the coupling target (default 0.01 for ASN,
    /// 0.02 for DDC).
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Target average similarity of neighbors.
    #[arg(long, conflicts_with = "ddc")]
    pub asn: Option<f64>,
    /// Target inter-layer degree correlation (Pearson).
    #[arg(long)]
    pub ddc: Option<f64>,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Graph file in multiplex-edgelist v1 format.
    pub graph: PathBuf,
}

#[derive(Args, Debug)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub common: Common,
    pub graph: PathBuf,
    /// Step of the lambda_a grid.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long, default_value_t = Weighting::EdgeClass)]
    pub weighting: Weighting,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    pub graph: PathBuf,
    /// Grid step on both axes.
    #[arg(long, default_value_t = 0.02)]
    pub step: f64,
    #[arg(long, default_value_t = 0.0)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 0.5)]
    pub lambda_max: f64,
    /// Comma-separated lambda_a values; writes one lambda_b section per
    /// value instead of the full grid.
    #[arg(long)]
    pub fix_lambda_a: Option<String>,
    #[arg(long, default_value_t = 500)]
    pub realizations: usize,
    #[arg(long, default_value_t = SimMode::Percolation)]
    pub mode: SimMode,
    /// Skip the Monte Carlo part.
    #[arg(long)]
    pub theory_only: bool,
    #[arg(long, default_value_t = Weighting::EdgeClass)]
    pub weighting: Weighting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StudyKind {
    Asn,
    Ddc,
}

#[derive(Args, Debug)]
pub struct StudyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(value_enum)]
    pub study: StudyKind,
    /// Comma-separated coupling targets; empty gives a header-only file.
    #[arg(long)]
    pub targets: String,
    /// Common rate lambda_a = lambda_b at which outbreak sizes are measured.
    #[arg(long)]
    pub lambda: f64,
    /// Independently generated networks averaged per target.
    #[arg(long, default_value_t = 1)]
    pub instances: usize,
    #[arg(long, default_value_t = 500)]
    pub realizations: usize,
    #[arg(long, default_value_t = SimMode::Percolation)]
    pub mode: SimMode,
    #[arg(long)]
    pub theory_only: bool,
    #[arg(long, default_value_t = Weighting::EdgeClass)]
    pub weighting: Weighting,
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let argv = match config::resolve_argv(raw) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("mxepi: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mxepi: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
