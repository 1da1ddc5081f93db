mod commands;
mod config;
mod error;
mod output;

use std::fs;
use std::process::ExitCode;

use cfkit::moments::MeasureSpec;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use config::{parse_box, parse_degrees, parse_polys, parse_reals, Grid, RunConfig};
use error::CliError;

/// Christoffel functions from moments: grids, orthonormal families,
/// conditional disintegration, max-det Gram solves.
#[derive(Parser, Debug)]
#[command(name = "cfkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Moments up to degree 2t as CSV.
    Moments(Flags),
    /// Christoffel function (and superlevel flags) on a grid, CSV.
    CfGrid(Flags),
    /// Orthonormal coefficient tables from both constructions, JSON.
    Orthonormal(Flags),
    /// Conditional SOS, Hankel matrix and atoms at each --x, JSON.
    Disintegrate(Flags),
    /// Max-det Gram matrix of a univariate SOS given by --poly, JSON.
    Maxdet(Flags),
    /// Decomposition of --poly over SOS multiples of --generators, JSON.
    WeightedMaxdet(Flags),
    /// Conditional CF at (x, y) across degrees with a log-linear fit, CSV.
    DecaySweep(Flags),
    /// t times the CF across degrees, CSV.
    AsymptoticSweep(Flags),
    /// Leading-block distances of conditional moment matrices, JSON.
    ConjectureProbe(Flags),
    /// Scaled CF and inside/outside flag for each point of --input, CSV.
    Score(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// JSON run configuration; flags given here override it.
    #[arg(long)]
    config: Option<String>,
    /// Degree.
    #[arg(long)]
    t: Option<usize>,
    /// Conditioning values, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    /// Conditioned value for sweeps.
    #[arg(long, allow_hyphen_values = true)]
    y: Option<f64>,
    /// min:max:count
    #[arg(long, allow_hyphen_values = true)]
    x_grid: Option<Grid>,
    /// min:max:count
    #[arg(long, allow_hyphen_values = true)]
    y_grid: Option<Grid>,
    /// Degrees, comma-separated or a range a..b.
    #[arg(long)]
    t_list: Option<String>,
    /// Superlevel threshold on the scaled score.
    #[arg(long)]
    gamma: Option<f64>,
    /// Added to the moment-matrix diagonal.
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long)]
    quad_order: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<String>,
    /// Point CSV.
    #[arg(long)]
    input: Option<String>,
    /// Uniform box measure, lo:hi per coordinate, comma-separated.
    #[arg(long = "box", allow_hyphen_values = true)]
    bounds: Option<String>,
    /// Empirical measure from a point CSV.
    #[arg(long)]
    samples: Option<String>,
    /// Ascending polynomial coefficients, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    poly: Option<String>,
    /// Generator polynomials separated by ';'.
    #[arg(long, allow_hyphen_values = true)]
    generators: Option<String>,
    /// Number of trailing coordinates to condition (default 1).
    #[arg(long)]
    conditioned: Option<usize>,
}

impl Command {
    fn split(self) -> (&'static str, Flags) {
        match self {
            Command::Moments(f) => ("moments", f),
            Command::CfGrid(f) => ("cf-grid", f),
            Command::Orthonormal(f) => ("orthonormal", f),
            Command::Disintegrate(f) => ("disintegrate", f),
            Command::Maxdet(f) => ("maxdet", f),
            Command::WeightedMaxdet(f) => ("weighted-maxdet", f),
            Command::DecaySweep(f) => ("decay-sweep", f),
            Command::AsymptoticSweep(f) => ("asymptotic-sweep", f),
            Command::ConjectureProbe(f) => ("conjecture-probe", f),
            Command::Score(f) => ("score", f),
        }
    }
}

fn build_config(flags: Flags) -> Result<RunConfig, CliError> {
    let base = match &flags.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    let measure = match (&flags.bounds, &flags.samples) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("--box and --samples are exclusive".into()))
        }
        (Some(b), None) => Some(MeasureSpec::uniform_box(parse_box(b)?)),
        (None, Some(file)) => Some(MeasureSpec::Samples { file: file.clone() }),
        (None, None) => None,
    };
    let cli = RunConfig {
        measure,
        t: flags.t,
        x: flags.x.as_deref().map(parse_reals).transpose()?,
        y: flags.y,
        x_grid: flags.x_grid,
        y_grid: flags.y_grid,
        t_list: flags.t_list.as_deref().map(parse_degrees).transpose()?,
        gamma: flags.gamma,
        jitter: flags.jitter,
        quad_order: flags.quad_order,
        input: flags.input,
        poly: flags.poly.as_deref().map(parse_reals).transpose()?,
        generators: flags.generators.as_deref().map(parse_polys).transpose()?,
        conditioned: flags.conditioned,
        out: flags.out,
    };
    let cfg = base.overlay(cli);
    if let Some(j) = cfg.jitter {
        if !(j >= 0.0 && j.is_finite()) {
            return Err(CliError::Config(format!(
                "jitter {j} must be finite and non-negative"
            )));
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Config(e.to_string().trim().to_string());
            eprintln!("{}", err.report());
            return ExitCode::from(1);
        }
    };
    let (command, flags) = cli.command.split();
    let result = build_config(flags).and_then(|cfg| commands::run(command, &cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
