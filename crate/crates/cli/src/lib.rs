//! Command-line front end: config parsing, spectrum tables, figure tables and
//! the validation suite.

pub mod config;
pub mod figures;
pub mod output;
pub mod validation;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use pmnoise_core::oracle::{run_oracle, SimulationConfig};
use pmnoise_core::{analytic_spectrum, SpectrumResult};

use config::{ConfigError, RunConfig};
use figures::FigureId;
use output::{Format, Mode, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Compute(#[from] pmnoise_core::Error),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::Compute(_) => EXIT_COMPUTE,
            CliError::Validation(_) => EXIT_VALIDATION,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pmnoise", version, about = "Far-field photocurrent noise spectra of squeezed-light sources")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form spectrum over the configured (q, Omega) grid.
    Spectrum(TableArgs),
    /// Monte-Carlo estimate over the configured grid, with standard errors.
    Oracle(TableArgs),
    /// Tables behind one of the hole-comb figures, one file per curve.
    Figure(FigureArgs),
    /// Run the acceptance suite and write a JSON report.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "INT")]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub id: FigureId,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "INT")]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Report file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "U64", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "INT")]
    pub workers: Option<usize>,
    /// Comma-separated criterion ids.
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<u8>>,
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    RunConfig::parse(&text).map_err(|source| CliError::Config {
        path: path.display().to_string(),
        source,
    })
}

/// Closed-form or Monte-Carlo result for a resolved config.
pub fn compute(cfg: &RunConfig, mode: Mode) -> Result<(SpectrumResult, Option<SimulationConfig>), CliError> {
    match mode {
        Mode::Analytic => Ok((analytic_spectrum(&cfg.query)?, None)),
        Mode::Oracle => {
            let sim = cfg.simulation().map_err(|source| CliError::Config {
                path: "config".into(),
                source,
            })?;
            let run = run_oracle(&sim, &cfg.query.q_grid, &cfg.query.omega_grid)?;
            Ok((run.result, Some(sim)))
        }
    }
}

/// Renders the table for `cfg`; the text depends only on the config.
pub fn render_table(cfg: &RunConfig, mode: Mode, format: Format) -> Result<String, CliError> {
    for note in &cfg.notes {
        log::info!("default applied: {note}");
    }
    let (result, sim) = compute(cfg, mode)?;
    Ok(Table {
        config: cfg,
        result: &result,
        mode,
        simulation: sim.as_ref(),
    }
    .render(format))
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    let io_err = |path: &str| {
        let path = path.to_string();
        move |source| CliError::Io { path, source }
    };
    match out {
        Some(p) => fs::write(p, text).map_err(io_err(&p.display().to_string())),
        None => io::stdout().lock().write_all(text.as_bytes()).map_err(io_err("stdout")),
    }
}

fn apply_overrides(cfg: &mut RunConfig, seed: Option<u64>, workers: Option<usize>) -> Result<(), CliError> {
    if let Some(seed) = seed {
        cfg.set_seed(seed).map_err(|source| CliError::Config {
            path: "--seed".into(),
            source,
        })?;
    }
    if let Some(w) = workers {
        cfg.set_workers(w);
    }
    Ok(())
}

fn table(args: &TableArgs, mode: Mode) -> Result<(), CliError> {
    let mut cfg = load_config(&args.config)?;
    apply_overrides(&mut cfg, args.seed, args.workers)?;
    with_workers(cfg.workers(), || {
        let text = render_table(&cfg, mode, args.format)?;
        write_text(args.out.as_deref(), &text)
    })
}

fn figure(args: &FigureArgs) -> Result<(), CliError> {
    let curves = figures::figure_curves(args.id, args.seed.unwrap_or(0)).map_err(|source| CliError::Config {
        path: args.id.name().into(),
        source,
    })?;
    fs::create_dir_all(&args.out).map_err(|source| CliError::Io {
        path: args.out.display().to_string(),
        source,
    })?;
    let ext = match args.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    with_workers(args.workers.unwrap_or(0), || {
        for curve in &curves {
            let text = render_table(&curve.config, Mode::Analytic, args.format)?;
            let path = args.out.join(format!("{}.{ext}", curve.stem));
            write_text(Some(&path), &text)?;
            eprintln!("wrote {}", path.display());
        }
        Ok(())
    })
}

fn validate(args: &ValidateArgs) -> Result<(), CliError> {
    let opts = validation::Options {
        seed: args.seed,
        only: args.only.clone(),
        ..validation::Options::default()
    };
    let report = with_workers(args.workers.unwrap_or(0), || Ok(validation::run(&opts)))?;
    for c in &report.criteria {
        eprintln!("{}", c.summary_line());
        for check in c.failed_checks() {
            eprintln!("    failed: {} = {:.4e} (limit {:.4e})", check.name, check.measured, check.tolerance);
        }
    }
    let mut text = serde_json::to_string_pretty(&report).expect("report serialises");
    text.push('\n');
    write_text(args.out.as_deref(), &text)?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .criteria
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.id.to_string())
            .collect();
        Err(CliError::Validation(format!("criteria {} failed", failed.join(", "))))
    }
}

/// Runs `f` on a pool of `workers` threads; 0 keeps the global pool.
fn with_workers<T>(workers: usize, f: impl FnOnce() -> Result<T, CliError> + Send) -> Result<T, CliError>
where
    T: Send,
{
    if workers == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(e) => {
            log::warn!("could not start {workers} workers ({e}); using the global pool");
            f()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Spectrum(args) => table(args, Mode::Analytic),
        Command::Oracle(args) => table(args, Mode::Oracle),
        Command::Figure(args) => figure(args),
        Command::Validate(args) => validate(args),
    }
}
