// SPDX-License-Identifier: Apache-2.0

//! Command-line front end for the `qbattery` library.

pub mod commands;
pub mod config;
pub mod figures;
pub mod output;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{bounds_table, critical_table, default_e_axis, run_table, sweep_table};
use crate::config::{jobs_from_raw, AxisName, Origin, RawConfig, RunConfig, SweepConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration file, flag or parameter value.
    Config(String),
    Io(String),
    Core(qbattery::Error),
}

impl CliError {
    /// Process exit status: 2 for invalid input, 3 for numerical failure,
    /// 4 for a structural assumption that does not hold.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(e) if e.is_structural() => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Core(e) => Some(e),
            _ => None,
        }
    }
}

impl From<qbattery::Error> for CliError {
    fn from(e: qbattery::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "qbattery", version, about = "Two-atom quantum battery charged through a shared vacuum field")]
pub struct Cli {
    /// Key = value configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Override one configuration key, e.g. `--set e=0.2`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    /// Output file (directory for `figure`). Defaults to stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Worker threads for sweeps.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    /// Horizon in units of 1/γ.
    #[arg(long, global = true, value_name = "T")]
    pub horizon: Option<f64>,

    /// Number of grid samples.
    #[arg(long, global = true, value_name = "N")]
    pub grid: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time series of ergotropies and energy flows.
    Run,
    /// Figures of merit over one or two parameter axes.
    Sweep,
    /// Regenerate the CSV data behind a figure.
    Figure {
        /// One of fig1, fig2, fig3, fig4, fig4-bounds, fig5, fig6, fig7, fig8.
        name: String,
    },
    /// Blocked μ̂·r̂12 interval per separation and battery excitation.
    Bounds,
    /// Smallest separation beyond which no orientation charges the battery.
    CriticalDistance,
}

fn raw_config(cli: &Cli) -> Result<RawConfig, CliError> {
    let mut raw = match &cli.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    for s in &cli.set {
        raw.set(s)?;
    }
    if let Some(h) = cli.horizon {
        raw.insert("gamma_t_horizon", &h.to_string(), Origin::Flag("--horizon".into()))?;
    }
    if let Some(n) = cli.grid {
        raw.insert("grid_samples", &n.to_string(), Origin::Flag("--grid".into()))?;
    }
    if let Some(p) = &cli.out {
        raw.insert("output_path", &p.to_string_lossy(), Origin::Flag("--out".into()))?;
    }
    if let Some(j) = cli.jobs {
        raw.insert("jobs", &j.to_string(), Origin::Flag("--jobs".into()))?;
    }
    Ok(raw)
}

/// Runs one parsed command line.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let raw = raw_config(cli)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs_from_raw(&raw)? {
        if n == 0 {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&cli.command, &raw))
}

fn dispatch(command: &Command, raw: &RawConfig) -> Result<(), CliError> {
    match command {
        Command::Run => {
            let cfg = RunConfig::from_raw(raw)?;
            run_table(&cfg)?.write(cfg.output_path.as_deref())
        }
        Command::Sweep => {
            let sweep = SweepConfig::from_raw(raw)?;
            sweep_table(&sweep)?.write(sweep.base.output_path.as_deref())
        }
        Command::Bounds => {
            let sweep = SweepConfig::from_raw(raw)?;
            let axis_values = |name| sweep.axes.iter().find(|a| a.name == name).map(|a| a.values.clone());
            let separations =
                axis_values(AxisName::Separation).unwrap_or_else(|| vec![sweep.base.model.separation]);
            let e_values = axis_values(AxisName::E).unwrap_or_else(|| default_e_axis().values);
            bounds_table(&sweep.base, &separations, &e_values)?.write(sweep.base.output_path.as_deref())
        }
        Command::CriticalDistance => {
            let cfg = RunConfig::from_raw(raw)?;
            critical_table(&cfg)?.write(cfg.output_path.as_deref())
        }
        Command::Figure { name } => {
            let cfg = RunConfig::from_raw(raw)?;
            let dir = cfg.output_path.clone().unwrap_or_else(|| PathBuf::from("figures"));
            let panels = figures::figure(name, &cfg)?;
            for p in &panels {
                let path = dir.join(&p.file);
                p.table.write(Some(&path))?;
                println!("{}: {}", path.display(), p.description);
            }
            Ok(())
        }
    }
}
