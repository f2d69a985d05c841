// SPDX-License-Identifier: Apache-2.0

//! Flat `key = value` configuration with command-line overrides.
//!
//! Later sources win: the config file, then each `--set`, then the dedicated
//! `--horizon` and `--grid` flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use qbattery::merit::AnalysisOptions;
use qbattery::{InitialState, Method, ModelParams, Preparation};

use crate::CliError;

pub const RUN_COLUMNS: [&str; 7] = [
    "erg_ba",
    "erg_ch",
    "erg_ba_incoh",
    "erg_ba_coh",
    "dE_ba",
    "dE_ch",
    "heat",
];

pub const MERIT_COLUMNS: [&str; 10] = [
    "E_bar",
    "t_bar",
    "t0",
    "R_bar",
    "P_bar",
    "dE_ba",
    "dE_ch",
    "Q_at_tbar",
    "horizon_limited",
    "first_peak_not_global",
];

const DEFAULT_MERITS: &str = "E_bar,t_bar,t0,R_bar,P_bar,dE_ba,dE_ch,Q_at_tbar";

const KEYS: [&str; 24] = [
    "gamma",
    "r12_over_lambda",
    "mu_dot_r",
    "omega0",
    "rotating_frame",
    "charger_kind",
    "c",
    "battery_kind",
    "e",
    "gamma_t_horizon",
    "grid_samples",
    "method",
    "outputs",
    "merit_outputs",
    "axis1",
    "axis1_min",
    "axis1_max",
    "axis1_steps",
    "axis2",
    "axis2_min",
    "axis2_max",
    "axis2_steps",
    "output_path",
    "jobs",
];

/// Where a value came from, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    File { path: PathBuf, line: usize },
    Flag(String),
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { path, line } => write!(f, "{}:{line}", path.display()),
            Origin::Flag(flag) => write!(f, "{flag}"),
            Origin::Default => write!(f, "default"),
        }
    }
}

/// Raw key/value entries, last write wins.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Origin)>,
}

fn config_error(origin: &Origin, key: &str, msg: impl fmt::Display) -> CliError {
    CliError::Config(format!("{origin}: {key}: {msg}"))
}

impl RawConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let mut raw = Self::default();
        for (i, line) in text.lines().enumerate() {
            let origin = Origin::File {
                path: path.to_path_buf(),
                line: i + 1,
            };
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "{origin}: expected `key = value`, got `{line}`"
                )));
            };
            raw.insert(key.trim(), value.trim(), origin)?;
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    pub fn insert(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), CliError> {
        if !KEYS.contains(&key) {
            return Err(CliError::Config(format!(
                "{origin}: unknown key `{key}` (known keys: {})",
                KEYS.join(", ")
            )));
        }
        self.entries
            .insert(key.to_string(), (value.to_string(), origin));
        Ok(())
    }

    /// Applies a `key=value` override from `--set`.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(CliError::Config(format!(
                "--set {assignment}: expected key=value"
            )));
        };
        let key = key.trim();
        self.insert(key, value.trim(), Origin::Flag(format!("--set {key}")))
    }

    fn get(&self, key: &str) -> Option<(&str, &Origin)> {
        self.entries.get(key).map(|(v, o)| (v.as_str(), o))
    }

    fn number(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some((v, origin)) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| config_error(origin, key, format!("expected a number, got `{v}`"))),
        }
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some((v, origin)) => v.parse::<usize>().map_err(|_| {
                config_error(origin, key, format!("expected a nonnegative integer, got `{v}`"))
            }),
        }
    }

    fn flag(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some((v, origin)) => match v {
                "true" | "1" | "yes" | "on" => Ok(true),
                "false" | "0" | "no" | "off" => Ok(false),
                _ => Err(config_error(origin, key, format!("expected true or false, got `{v}`"))),
            },
        }
    }

    fn preparation(&self, key: &str) -> Result<Preparation, CliError> {
        match self.get(key) {
            None => Ok(Preparation::CoherentPure),
            Some((v, origin)) => match v {
                "coherent" | "pure" => Ok(Preparation::CoherentPure),
                "diagonal" | "diag" => Ok(Preparation::Diagonal),
                _ => Err(config_error(origin, key, format!("expected coherent or diagonal, got `{v}`"))),
            },
        }
    }

    fn list(&self, key: &str, default: &str, allowed: &[&str]) -> Result<Vec<String>, CliError> {
        let (text, origin) = self.get(key).unwrap_or((default, &Origin::Default));
        let items: Vec<String> = text
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if let Some(bad) = items.iter().find(|s| !allowed.contains(&s.as_str())) {
            return Err(config_error(
                origin,
                key,
                format!("unknown name `{bad}` (choose from {})", allowed.join(", ")),
            ));
        }
        if items.is_empty() {
            return Err(config_error(origin, key, "empty list"));
        }
        Ok(items)
    }

    fn origin(&self, key: &str) -> Origin {
        self.get(key).map(|(_, o)| o.clone()).unwrap_or(Origin::Default)
    }
}

/// Configuration of a single trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub initial: InitialState,
    pub horizon: f64,
    pub grid: usize,
    pub method: Method,
    pub outputs: Vec<String>,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, CliError> {
        let model = ModelParams {
            gamma: raw.number("gamma", 1.0)?,
            separation: raw.number("r12_over_lambda", 0.06)?,
            mu_dot_r: raw.number("mu_dot_r", 0.0)?,
            omega0: raw.number("omega0", 1.0)?,
            rotating_frame: raw.flag("rotating_frame", true)?,
        };
        let initial = InitialState {
            charger: raw.preparation("charger_kind")?,
            c: raw.number("c", 1.0)?,
            battery: raw.preparation("battery_kind")?,
            e: raw.number("e", 0.0)?,
        };
        let method = match raw.get("method") {
            None => Method::Expm,
            Some(("expm" | "exp", _)) => Method::Expm,
            Some(("rk" | "rk45" | "runge-kutta", _)) => Method::RungeKutta,
            Some((v, origin)) => {
                return Err(config_error(origin, "method", format!("expected expm or rk, got `{v}`")))
            }
        };
        let config = Self {
            model,
            initial,
            horizon: raw.number("gamma_t_horizon", 20.0)?,
            grid: raw.count("grid_samples", 4001)?,
            method,
            outputs: raw.list("outputs", &RUN_COLUMNS.join(","), &RUN_COLUMNS)?,
            output_path: raw.get("output_path").map(|(v, _)| PathBuf::from(v)),
        };
        config.validate(raw)?;
        Ok(config)
    }

    fn validate(&self, raw: &RawConfig) -> Result<(), CliError> {
        let located = |err: qbattery::Error| -> CliError {
            match &err {
                qbattery::Error::InvalidParameter { name, .. } => {
                    let key = match *name {
                        "separation" => "r12_over_lambda",
                        "mu_dot_r" => "mu_dot_r",
                        other => other,
                    };
                    config_error(&raw.origin(key), key, err)
                }
                _ => CliError::Config(err.to_string()),
            }
        };
        self.model.validate().map_err(located)?;
        self.initial.validate().map_err(located)?;
        if !(self.horizon > 0.0) {
            return Err(config_error(
                &raw.origin("gamma_t_horizon"),
                "gamma_t_horizon",
                format!("horizon must be positive, got {}", self.horizon),
            ));
        }
        if self.grid < 2 {
            return Err(config_error(
                &raw.origin("grid_samples"),
                "grid_samples",
                format!("need at least 2 samples, got {}", self.grid),
            ));
        }
        Ok(())
    }

    pub fn analysis_options(&self) -> AnalysisOptions {
        AnalysisOptions {
            horizon: self.horizon,
            min_samples: self.grid,
            method: self.method,
            ..AnalysisOptions::default()
        }
    }

    /// `(key, value)` pairs describing the run, for CSV headers.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let kind = |p: Preparation| match p {
            Preparation::CoherentPure => "coherent",
            Preparation::Diagonal => "diagonal",
        };
        vec![
            ("gamma".into(), crate::output::number(self.model.gamma)),
            ("r12_over_lambda".into(), crate::output::number(self.model.separation)),
            ("mu_dot_r".into(), crate::output::number(self.model.mu_dot_r)),
            ("omega0".into(), crate::output::number(self.model.omega0)),
            ("rotating_frame".into(), self.model.rotating_frame.to_string()),
            ("charger_kind".into(), kind(self.initial.charger).into()),
            ("c".into(), crate::output::number(self.initial.c)),
            ("battery_kind".into(), kind(self.initial.battery).into()),
            ("e".into(), crate::output::number(self.initial.e)),
            ("gamma_t_horizon".into(), crate::output::number(self.horizon)),
            ("grid_samples".into(), self.grid.to_string()),
            (
                "method".into(),
                match self.method {
                    Method::Expm => "expm",
                    Method::RungeKutta => "rk",
                }
                .into(),
            ),
        ]
    }

    /// Copy with one swept parameter replaced.
    pub fn with_axis_value(&self, axis: AxisName, value: f64) -> Self {
        let mut out = self.clone();
        match axis {
            AxisName::C => out.initial.c = value,
            AxisName::E => out.initial.e = value,
            AxisName::Separation => out.model.separation = value,
            AxisName::MuDotR => out.model.mu_dot_r = value,
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisName {
    C,
    E,
    Separation,
    MuDotR,
}

impl AxisName {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "c" => Some(Self::C),
            "e" => Some(Self::E),
            "r12_over_lambda" => Some(Self::Separation),
            "mu_dot_r" => Some(Self::MuDotR),
            _ => None,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Self::C => "c",
            Self::E => "e",
            Self::Separation => "r12_over_lambda",
            Self::MuDotR => "mu_dot_r",
        }
    }

    fn domain(self) -> (f64, f64, bool) {
        // (low, high, low exclusive)
        match self {
            Self::C | Self::E => (0.0, 1.0, false),
            Self::Separation => (0.0, f64::INFINITY, true),
            Self::MuDotR => (-1.0, 1.0, false),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: AxisName,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn linear(name: AxisName, min: f64, max: f64, steps: usize) -> Self {
        let values = if steps == 1 {
            vec![min]
        } else {
            (0..steps)
                .map(|i| {
                    if i + 1 == steps {
                        max
                    } else {
                        min + (max - min) * i as f64 / (steps - 1) as f64
                    }
                })
                .collect()
        };
        Self { name, values }
    }

    fn from_raw(raw: &RawConfig, prefix: &str) -> Result<Option<Self>, CliError> {
        let Some((name, origin)) = raw.get(prefix) else {
            return Ok(None);
        };
        let axis = AxisName::parse(name).ok_or_else(|| {
            config_error(
                origin,
                prefix,
                format!("unknown axis `{name}` (choose from c, e, r12_over_lambda, mu_dot_r)"),
            )
        })?;
        let required = |suffix: &str| -> Result<String, CliError> {
            let key = format!("{prefix}_{suffix}");
            raw.get(&key).map(|(v, _)| v.to_string()).ok_or_else(|| {
                CliError::Config(format!("{origin}: {prefix} is set but {key} is missing"))
            })
        };
        let min_key = format!("{prefix}_min");
        let max_key = format!("{prefix}_max");
        let steps_key = format!("{prefix}_steps");
        required("min")?;
        let min = raw.number(&min_key, 0.0)?;
        let max = if raw.get(&max_key).is_some() { raw.number(&max_key, min)? } else { min };
        let steps = raw.count(&steps_key, 1)?;
        if steps == 0 {
            return Err(config_error(&raw.origin(&steps_key), &steps_key, "need at least one step"));
        }
        if steps > 1 && raw.get(&max_key).is_none() {
            required("max")?;
        }
        let (low, high, open) = axis.domain();
        for (key, v) in [(&min_key, min), (&max_key, max)] {
            let below = if open { v <= low } else { v < low };
            if below || v > high {
                return Err(config_error(
                    &raw.origin(key),
                    key,
                    format!("{v} lies outside the domain of {}", axis.key()),
                ));
            }
        }
        Ok(Some(Self::linear(axis, min, max, steps)))
    }
}

/// A run configuration swept over up to two axes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: RunConfig,
    pub axes: Vec<Axis>,
    pub merit_outputs: Vec<String>,
}

impl SweepConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, CliError> {
        let base = RunConfig::from_raw(raw)?;
        let axes: Vec<Axis> = [Axis::from_raw(raw, "axis1")?, Axis::from_raw(raw, "axis2")?]
            .into_iter()
            .flatten()
            .collect();
        if axes.len() == 2 && axes[0].name == axes[1].name {
            return Err(CliError::Config(format!(
                "{}: axis2 repeats axis {}",
                raw.origin("axis2"),
                axes[0].name.key()
            )));
        }
        Ok(Self {
            base,
            axes,
            merit_outputs: raw.list("merit_outputs", DEFAULT_MERITS, &MERIT_COLUMNS)?,
        })
    }

    /// Grid points in lexicographic axis order, each with its axis values.
    pub fn points(&self) -> Vec<(Vec<f64>, RunConfig)> {
        let mut points = vec![(Vec::new(), self.base.clone())];
        for axis in &self.axes {
            points = points
                .into_iter()
                .flat_map(|(coords, cfg)| {
                    axis.values.iter().map(move |&v| {
                        let mut c = coords.clone();
                        c.push(v);
                        (c, cfg.with_axis_value(axis.name, v))
                    })
                })
                .collect();
        }
        points
    }
}

pub fn jobs_from_raw(raw: &RawConfig) -> Result<Option<usize>, CliError> {
    match raw.get("jobs") {
        None => Ok(None),
        Some(_) => raw.count("jobs", 0).map(Some),
    }
}
