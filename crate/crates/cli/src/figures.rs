// SPDX-License-Identifier: Apache-2.0

//! Canned parameter sets for the published figures, one CSV per panel.

use qbattery::dynamics::{simulate, uniform_grid};
use qbattery::ergotropy::local_observables;
use qbattery::merit::critical_distance;
use qbattery::{InitialState, Preparation};

use crate::commands::{bounds_table, run_table, sweep_table};
use crate::config::{Axis, AxisName, RunConfig, SweepConfig, RUN_COLUMNS};
use crate::output::{number, Table};
use crate::CliError;

pub const FIGURES: [&str; 9] = [
    "fig1",
    "fig2",
    "fig3",
    "fig4",
    "fig4-bounds",
    "fig5",
    "fig6",
    "fig7",
    "fig8",
];

/// One output file of a figure.
#[derive(Debug, Clone)]
pub struct Panel {
    pub file: String,
    pub description: String,
    pub table: Table,
}

/// Separations of the r12 sweeps: 0.001 then 0.01 to 0.18 in steps of 0.01.
pub fn separation_grid() -> Vec<f64> {
    std::iter::once(0.001)
        .chain((1..=18).map(|i| i as f64 / 100.0))
        .collect()
}

/// `μ̂·r̂12` from 0 to 1 in steps of 0.02.
pub fn orientation_grid() -> Vec<f64> {
    (0..=50).map(|i| i as f64 / 50.0).collect()
}

fn with(base: &RunConfig, r: f64, a: f64, initial: InitialState) -> RunConfig {
    let mut cfg = base.clone();
    cfg.model.separation = r;
    cfg.model.mu_dot_r = a;
    cfg.initial = initial;
    cfg
}

/// Battery ergotropy for two initial states sharing a grid.
fn comparison(
    cfg: &RunConfig,
    labels: [&str; 2],
    states: [InitialState; 2],
) -> Result<Table, CliError> {
    let grid = uniform_grid(cfg.horizon, cfg.grid);
    let mut columns = Vec::new();
    for s in &states {
        let traj = simulate(&cfg.model, s, &grid, cfg.method)?;
        let erg = traj
            .states
            .iter()
            .map(|rho| Ok(local_observables(rho, &cfg.model)?.erg_ba))
            .collect::<Result<Vec<f64>, CliError>>()?;
        columns.push(erg);
    }
    let mut table = Table::new(["gamma_t", labels[0], labels[1]]);
    table.metadata(&cfg.metadata()[..5]);
    for (i, t) in grid.iter().enumerate() {
        table.push(vec![number(*t), number(columns[0][i]), number(columns[1][i])]);
    }
    Ok(table)
}

fn letters() -> impl Iterator<Item = char> {
    'a'..='z'
}

fn fig1(base: &RunConfig) -> Result<Vec<Panel>, CliError> {
    let mut panels = Vec::new();
    let cases = [1.0, 0.5]
        .iter()
        .flat_map(|&c| [0.03, 0.06, 0.09].map(move |r| (c, r)));
    for ((c, r), letter) in cases.zip(letters()) {
        let cfg = with(base, r, 0.0, InitialState::coherent(c, 0.0));
        let mut table = comparison(
            &cfg,
            ["erg_ba_coherent_charger", "erg_ba_diagonal_charger"],
            [InitialState::coherent(c, 0.0), InitialState::diagonal(c, 0.0)],
        )?;
        let description = format!("c = {c}, r12 = {r} lambda, mu.r = 0, battery |0>");
        table.comment(description.clone());
        panels.push(Panel {
            file: format!("fig1{letter}.csv"),
            description,
            table,
        });
    }
    Ok(panels)
}

fn fig2(base: &RunConfig) -> Result<Vec<Panel>, CliError> {
    let mut panels = Vec::new();
    let cases = [0.2, 0.4]
        .iter()
        .flat_map(|&e| [0.03, 0.06, 0.09].map(move |r| (e, r)));
    for ((e, r), letter) in cases.zip(letters()) {
        let coherent = InitialState::coherent(1.0, e);
        let diagonal = InitialState {
            battery: Preparation::Diagonal,
            ..coherent
        };
        let cfg = with(base, r, 0.0, coherent);
        let mut table = comparison(
            &cfg,
            ["erg_ba_coherent_battery", "erg_ba_diagonal_battery"],
            [coherent, diagonal],
        )?;
        let description = format!("e = {e}, r12 = {r} lambda, mu.r = 0, charger |1>");
        table.comment(description.clone());
        panels.push(Panel {
            file: format!("fig2{letter}.csv"),
            description,
            table,
        });
    }
    Ok(panels)
}

fn fig3(base: &RunConfig) -> Result<Vec<Panel>, CliError> {
    let cases = [(1.0, 0.0, "ab"), (0.5, 0.0, "cd"), (1.0, 0.2, "ef")];
    let mut panels = Vec::new();
    for (c, e, letters) in cases {
        let mut cfg = with(base, 0.06, 0.0, InitialState::coherent(c, e));
        cfg.outputs = RUN_COLUMNS.iter().map(|s| s.to_string()).collect();
        let table = run_table(&cfg)?;
        panels.push(Panel {
            file: format!("fig3{letters}.csv"),
            description: format!("c = {c}, e = {e}, r12 = 0.06 lambda, mu.r = 0"),
            table,
        });
    }
    Ok(panels)
}

fn fig4(base: &RunConfig) -> Result<Vec<Panel>, CliError> {
    let cfg = with(base, 0.05, 0.0, InitialState::coherent(1.0, 0.1));
    let e: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    let table = bounds_table(&cfg, &[0.05, 0.10, 0.15], &e)?;
    Ok(vec![Panel {
        file: "fig4.csv".into(),
        description: "charger |1>, coherent battery, r12 in {0.05, 0.10, 0.15} lambda, e = 0.1..0.9".into(),
        table,
    }])
}

fn fig4_bounds(base: &RunConfig) -> Result<Vec<Panel>, CliError> {
    let cfg = with(base, 0.05, 0.0, InitialState::coherent(1.0, 0.0));
    let e: Vec<f64> = (1..=19).map(|i| i as f64 / 20.0).collect();
    let mut table = bounds_table(&cfg, &[0.05, 0.10, 0.15], &e)?;
    let d = critical_distance(&cfg.model, &cfg.initial, &cfg.analysis_options())?;
    table.comment(format!(
        "critical_distance_over_lambda (c = 1, e = 0) = {}",
        number(d.distance)
    ));
    Ok(vec![Panel {
        file: "fig4_bounds.csv".into(),
        description: format!(
            "charger |1>, coherent battery, e = 0.05..0.95, critical distance {:.4} lambda",
            d.distance
        ),
        table,
    }])
}

fn sweep_panel(
    base: &RunConfig,
    file: String,
    description: String,
    axes: Vec<Axis>,
    column: &str,
) -> Result<Panel, CliError> {
    let sweep = SweepConfig {
        base: base.clone(),
        axes,
        merit_outputs: vec![column.to_string()],
    };
    let mut table = sweep_table(&sweep)?;
    table.comment(description.clone());
    Ok(Panel {
        file,
        description,
        table,
    })
}

fn axis(name: AxisName, values: Vec<f64>) -> Axis {
    Axis { name, values }
}

fn fig5(base: &RunConfig) -> Result<Vec<Panel>, CliError> {
    let separations = vec![0.02, 0.06, 0.10, 0.14];
    let unit: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
    Ok(vec![
        sweep_panel(
            &with(base, 0.02, 0.0, InitialState::coherent(1.0, 0.0)),
            "fig5a.csv".into(),
            "coherent charger c = 0..1, battery |0>, mu.r = 0".into(),
            vec![
                axis(AxisName::Separation, separations.clone()),
                axis(AxisName::C, unit.clone()),
            ],
            "E_bar",
        )?,
        sweep_panel(
            &with(base, 0.02, 0.0, InitialState::coherent(1.0, 0.0)),
            "fig5b.csv".into(),
            "charger |1>, coherent battery e = 0..1, mu.r = 0".into(),
            vec![axis(AxisName::Separation, separations), axis(AxisName::E, unit)],
            "E_bar",
        )?,
    ])
}

/// Shared layout of the merit figures; `column` picks the plotted merit.
fn merit_figure(base: &RunConfig, name: &str, column: &str) -> Result<Vec<Panel>, CliError> {
    let c_values = vec![0.4, 0.7, 1.0];
    let e_values = vec![0.0, 0.2, 0.4];
    let ground = InitialState::coherent(1.0, 0.0);
    Ok(vec![
        sweep_panel(
            &with(base, 0.04, 0.0, ground),
            format!("{name}a.csv"),
            "coherent charger c in {0.4, 0.7, 1}, battery |0>, mu.r = 0".into(),
            vec![
                axis(AxisName::C, c_values.clone()),
                axis(AxisName::Separation, separation_grid()),
            ],
            column,
        )?,
        sweep_panel(
            &with(base, 0.04, 0.0, ground),
            format!("{name}b.csv"),
            "coherent charger c in {0.4, 0.7, 1}, battery |0>, r12 = 0.04 lambda".into(),
            vec![
                axis(AxisName::C, c_values),
                axis(AxisName::MuDotR, orientation_grid()),
            ],
            column,
        )?,
        sweep_panel(
            &with(base, 0.04, 0.0, ground),
            format!("{name}c.csv"),
            "charger |1>, coherent battery e in {0, 0.2, 0.4}, mu.r = 0".into(),
            vec![
                axis(AxisName::E, e_values.clone()),
                axis(AxisName::Separation, separation_grid()),
            ],
            column,
        )?,
        sweep_panel(
            &with(base, 0.04, 1.0, ground),
            format!("{name}c_asterisks.csv"),
            "charger |1>, battery |0>, mu.r = 1".into(),
            vec![axis(AxisName::Separation, separation_grid())],
            column,
        )?,
        sweep_panel(
            &with(base, 0.04, 0.0, ground),
            format!("{name}d.csv"),
            "charger |1>, coherent battery e in {0, 0.2, 0.4}, r12 = 0.04 lambda".into(),
            vec![
                axis(AxisName::E, e_values),
                axis(AxisName::MuDotR, orientation_grid()),
            ],
            column,
        )?,
    ])
}

/// Builds every panel of a named figure.
pub fn figure(name: &str, base: &RunConfig) -> Result<Vec<Panel>, CliError> {
    match name {
        "fig1" => fig1(base),
        "fig2" => fig2(base),
        "fig3" => fig3(base),
        "fig4" => fig4(base),
        "fig4-bounds" => fig4_bounds(base),
        "fig5" => fig5(base),
        "fig6" => merit_figure(base, "fig6", "E_bar"),
        "fig7" => merit_figure(base, "fig7", "t_bar"),
        "fig8" => merit_figure(base, "fig8", "R_bar"),
        _ => Err(CliError::Config(format!(
            "unknown figure `{name}` (available: {})",
            FIGURES.join(", ")
        ))),
    }
}
