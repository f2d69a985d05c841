// SPDX-License-Identifier: Apache-2.0

//! Tables behind the `run`, `sweep`, `bounds` and `critical-distance` commands.

use rayon::prelude::*;

use qbattery::dynamics::{simulate, uniform_grid};
use qbattery::ergotropy::{local_observables, split};
use qbattery::merit::{analyze, chargeability_bounds, critical_distance, MeritReport};
use qbattery::model::local_hamiltonian;
use qbattery::numerics::{partial_trace, Subsystem};

use crate::config::{Axis, AxisName, RunConfig, SweepConfig};
use crate::output::{number, Table};
use crate::CliError;

/// Observables along one trajectory, one row per grid time.
pub fn run_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let grid = uniform_grid(cfg.horizon, cfg.grid);
    let traj = simulate(&cfg.model, &cfg.initial, &grid, cfg.method)?;
    let h = local_hamiltonian(&cfg.model);
    let start = local_observables(&traj.states[0], &cfg.model)?;

    let mut table = Table::new(std::iter::once("gamma_t").chain(cfg.outputs.iter().map(String::as_str)));
    table.comment("qbattery run");
    table.metadata(&cfg.metadata());
    for (t, rho) in grid.iter().zip(&traj.states) {
        let o = local_observables(rho, &cfg.model)?;
        let (incoherent, coherent) = split(&partial_trace(rho, Subsystem::Battery)?, &h)?;
        let d_e_ba = o.energy_ba - start.energy_ba;
        let d_e_ch = start.energy_ch - o.energy_ch;
        let mut row = vec![number(*t)];
        for name in &cfg.outputs {
            row.push(number(match name.as_str() {
                "erg_ba" => o.erg_ba,
                "erg_ch" => o.erg_ch,
                "erg_ba_incoh" => incoherent,
                "erg_ba_coh" => coherent,
                "dE_ba" => d_e_ba,
                "dE_ch" => d_e_ch,
                "heat" => d_e_ch - d_e_ba,
                other => unreachable!("unvalidated output {other}"),
            }));
        }
        table.push(row);
    }
    Ok(table)
}

/// Merit cells; empty when the battery cannot be charged.
pub fn merit_cells(m: &MeritReport, names: &[String]) -> Vec<String> {
    names
        .iter()
        .map(|name| {
            if !m.chargeable {
                return String::new();
            }
            match name.as_str() {
                "E_bar" => number(m.e_bar),
                "t_bar" => number(m.t_bar),
                "t0" => m.t0.map(number).unwrap_or_default(),
                "R_bar" => number(m.r_bar),
                "P_bar" => number(m.p_bar),
                "dE_ba" => number(m.d_e_ba),
                "dE_ch" => number(m.d_e_ch),
                "Q_at_tbar" => number(m.heat),
                "horizon_limited" => u8::from(m.flags.horizon_limited).to_string(),
                "first_peak_not_global" => u8::from(m.flags.first_peak_not_global).to_string(),
                other => unreachable!("unvalidated merit {other}"),
            }
        })
        .collect()
}

/// Merit reports for every sweep point, in lexicographic axis order.
pub fn sweep_reports(sweep: &SweepConfig) -> Result<Vec<(Vec<f64>, MeritReport)>, CliError> {
    sweep
        .points()
        .into_par_iter()
        .map(|(coords, cfg)| {
            let report = analyze(&cfg.model, &cfg.initial, &cfg.analysis_options())?;
            Ok((coords, report))
        })
        .collect()
}

pub fn sweep_table(sweep: &SweepConfig) -> Result<Table, CliError> {
    let header = sweep
        .axes
        .iter()
        .map(|a| a.name.key().to_string())
        .chain(std::iter::once("chargeable".to_string()))
        .chain(sweep.merit_outputs.iter().cloned());
    let mut table = Table::new(header);
    table.comment("qbattery sweep");
    table.metadata(&sweep.base.metadata());
    for axis in &sweep.axes {
        let values: Vec<String> = axis.values.iter().map(|&v| number(v)).collect();
        table.comment(format!("axis {} = {}", axis.name.key(), values.join(" ")));
    }
    for (coords, m) in sweep_reports(sweep)? {
        let mut row: Vec<String> = coords.iter().map(|&v| number(v)).collect();
        row.push(u8::from(m.chargeable).to_string());
        row.extend(merit_cells(&m, &sweep.merit_outputs));
        table.push(row);
    }
    Ok(table)
}

/// Default battery-excitation grid of the bounds command.
pub fn default_e_axis() -> Axis {
    Axis {
        name: AxisName::E,
        values: (1..=9).map(|i| i as f64 / 10.0).collect(),
    }
}

/// Blocked `μ̂·r̂12` region for each separation and battery excitation.
pub fn bounds_table(cfg: &RunConfig, separations: &[f64], e_values: &[f64]) -> Result<Table, CliError> {
    let mut table = Table::new(["r12_over_lambda", "e", "blocked", "lower", "upper"]);
    table.comment("qbattery bounds");
    table.metadata(&cfg.metadata());
    for &r in separations {
        for &e in e_values {
            let point = cfg
                .with_axis_value(AxisName::Separation, r)
                .with_axis_value(AxisName::E, e);
            let region = chargeability_bounds(&point.model, &point.initial, &point.analysis_options())?;
            let (blocked, lower, upper) = match region {
                Some(b) => ("1", number(b.lower), number(b.upper)),
                None => ("0", String::new(), String::new()),
            };
            table.push(vec![number(r), number(e), blocked.into(), lower, upper]);
        }
    }
    Ok(table)
}

pub fn critical_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let d = critical_distance(&cfg.model, &cfg.initial, &cfg.analysis_options())?;
    let mut table = Table::new(["c", "e", "critical_distance_over_lambda", "degenerate"]);
    table.comment("qbattery critical-distance");
    table.metadata(&cfg.metadata());
    table.push(vec![
        number(cfg.initial.c),
        number(cfg.initial.e),
        number(d.distance),
        u8::from(d.degenerate).to_string(),
    ]);
    Ok(table)
}
