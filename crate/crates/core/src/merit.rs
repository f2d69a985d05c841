// SPDX-License-Identifier: Apache-2.0

//! Figures of merit of a charging run and the chargeability maps built on them.
//!
//! A run is scanned on a uniform grid fine enough to resolve the exchange
//! oscillation, and local maxima of the battery ergotropy are refined by
//! golden-section search on the continuous trajectory. The scan stops as soon
//! as [`battery_ergotropy_bound`] shows that no later time can beat the best
//! value seen so far.

use rayon::prelude::*;

use crate::dynamics::{
    battery_entries, battery_ergotropy_bound, to_matrix, to_state_vec, Method, Propagator,
    StateVec,
};
use crate::ergotropy::{local_observables, qubit_ergotropy};
use crate::error::{Error, Result};
use crate::model::{build_generator, initial_state, InitialState, ModelParams};

/// Battery ergotropy below this counts as dark.
pub const DARK_THRESHOLD: f64 = 1e-10;
/// Minimum ergotropy gain for a run to count as charging.
pub const CHARGE_THRESHOLD: f64 = 1e-9;
/// Charger outputs below this leave the efficiency undefined.
pub const EFFICIENCY_FLOOR: f64 = 1e-12;

pub const BOUNDS_SCAN_POINTS: usize = 101;
pub const BOUNDS_TOLERANCE: f64 = 1e-4;
pub const CRITICAL_A_POINTS: usize = 201;
pub const CRITICAL_TOLERANCE: f64 = 5e-4;
pub const CRITICAL_BRACKET: (f64, f64) = (0.01, 0.5);

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    /// Scan horizon in units of `1/γ`.
    pub horizon: f64,
    /// Lower bound on the number of grid points.
    pub min_samples: usize,
    /// Largest allowed `|Ω12| dt`. The default 0.5 gives `40 |Ω12|/γ`
    /// points over the default horizon.
    pub omega_step: f64,
    /// Relative accuracy of the refined charging time.
    pub time_rtol: f64,
    pub method: Method,
    /// Number of grid maxima refined besides the first one.
    pub candidates: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            horizon: 20.0,
            min_samples: 4001,
            omega_step: 0.5,
            time_rtol: 1e-6,
            method: Method::Expm,
            candidates: 8,
        }
    }
}

impl AnalysisOptions {
    pub fn with_horizon(self, horizon: f64) -> Self {
        Self { horizon, ..self }
    }

    pub fn with_method(self, method: Method) -> Self {
        Self { method, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "horizon",
                value: self.horizon,
                reason: "must be positive and finite",
            });
        }
        if self.min_samples < 2 {
            return Err(Error::InvalidParameter {
                name: "min_samples",
                value: self.min_samples as f64,
                reason: "need at least two grid points",
            });
        }
        if !(self.omega_step > 0.0) {
            return Err(Error::InvalidParameter {
                name: "omega_step",
                value: self.omega_step,
                reason: "must be positive",
            });
        }
        if !(self.time_rtol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "time_rtol",
                value: self.time_rtol,
                reason: "must be positive",
            });
        }
        Ok(())
    }

    /// Number of grid intervals for a given exchange coupling.
    pub fn intervals(&self, omega12: f64) -> usize {
        let by_oscillation = (self.horizon * omega12.abs() / self.omega_step).ceil();
        let n = (self.min_samples - 1) as f64;
        n.max(by_oscillation) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MeritFlags {
    /// The maximum sits in the last grid interval.
    pub horizon_limited: bool,
    /// A later peak beats the first one.
    pub first_peak_not_global: bool,
    /// No energy left the charger, `r_bar` is reported as 0.
    pub efficiency_undefined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeritReport {
    /// Charged ergotropy, the maximum of the battery ergotropy.
    pub e_bar: f64,
    /// Charging time at which `e_bar` is reached.
    pub t_bar: f64,
    /// End of the dark period; `None` when the battery never holds ergotropy.
    pub t0: Option<f64>,
    /// Net ergotropy gain over the charger energy output.
    pub r_bar: f64,
    /// Mean charging power.
    pub p_bar: f64,
    pub d_e_ba: f64,
    pub d_e_ch: f64,
    pub heat: f64,
    /// Battery ergotropy at `t = 0`.
    pub erg_initial: f64,
    pub chargeable: bool,
    pub flags: MeritFlags,
    pub grid_intervals: usize,
    /// Grid intervals actually propagated before the scan stopped.
    pub scanned_intervals: usize,
}

impl MeritReport {
    pub fn gain(&self) -> f64 {
        (self.e_bar - self.erg_initial).max(0.0)
    }
}

/// A grid maximum with the state at the left end of its bracket.
#[derive(Debug, Clone)]
struct Bracket {
    index: usize,
    /// Grid time of the maximum.
    at: f64,
    value: f64,
    left: f64,
    span: f64,
    state: StateVec,
}

struct Scanner<'a> {
    propagator: Propagator,
    options: &'a AnalysisOptions,
    omega0: f64,
}

impl Scanner<'_> {
    fn erg(&self, v: &StateVec) -> f64 {
        let (excited, ground, coherence) = battery_entries(v);
        qubit_ergotropy(excited, ground, coherence.norm(), self.omega0)
    }

    fn state_at(&self, state: &StateVec, left: f64, tau: f64) -> Result<StateVec> {
        let mut v = *state;
        self.propagator.advance_once(&mut v, left, tau)?;
        Ok(v)
    }

    /// Golden-section maximization inside a bracket. Returns `(time, value)`.
    fn refine(&self, b: &Bracket, dt: f64) -> Result<(f64, f64)> {
        let centre = b.at - b.left;
        let tol = self.options.time_rtol * (b.left + centre).max(dt);
        let mut best = (centre.clamp(0.0, b.span), b.value);
        let mut eval = |tau: f64| -> Result<f64> {
            let value = self.erg(&self.state_at(&b.state, b.left, tau)?);
            if value > best.1 {
                best = (tau, value);
            }
            Ok(value)
        };
        let (mut lo, mut hi) = (0.0, b.span);
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let mut f1 = eval(x1)?;
        let mut f2 = eval(x2)?;
        while hi - lo > tol {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + INV_PHI * (hi - lo);
                f2 = eval(x2)?;
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - INV_PHI * (hi - lo);
                f1 = eval(x1)?;
            }
        }
        let time = if best.0 == centre { b.at } else { b.left + best.0 };
        Ok((time, best.1))
    }

    /// Bisection for the first time the ergotropy exceeds the dark threshold.
    fn onset(&self, state: &StateVec, left: f64, dt: f64) -> Result<f64> {
        let tol = self.options.time_rtol * (left + dt);
        let (mut lo, mut hi) = (0.0, dt);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.erg(&self.state_at(state, left, mid)?) > DARK_THRESHOLD {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(left + hi)
    }
}

fn keep_top(top: &mut Vec<Bracket>, b: Bracket, k: usize) {
    if k == 0 {
        return;
    }
    if top.len() == k && top.last().is_some_and(|w| w.value >= b.value) {
        return;
    }
    let pos = top.partition_point(|x| x.value >= b.value);
    top.insert(pos, b);
    top.truncate(k);
}

/// Charged ergotropy, charging time, dark period and efficiency of one run.
pub fn analyze(
    params: &ModelParams,
    initial: &InitialState,
    options: &AnalysisOptions,
) -> Result<MeritReport> {
    options.validate()?;
    let gen = build_generator(params)?;
    let rho0 = initial_state(initial)?;
    let n = options.intervals(gen.couplings.omega12);
    let dt = options.horizon / n as f64;
    let time = |k: usize| {
        if k == n {
            options.horizon
        } else {
            k as f64 * dt
        }
    };

    let mut scanner = Scanner {
        propagator: Propagator::new(&gen, options.method),
        options,
        omega0: params.omega0,
    };
    let v0 = to_state_vec(&rho0);
    let erg0 = scanner.erg(&v0);

    let mut cur = v0;
    let mut f_cur = erg0;
    let mut prev = v0;
    let mut f_prev = f64::NEG_INFINITY;
    let mut prev2;
    let mut first: Option<Bracket> = None;
    let mut top: Vec<Bracket> = Vec::new();
    let mut best = Bracket {
        index: 0,
        at: 0.0,
        value: erg0,
        left: 0.0,
        span: dt,
        state: v0,
    };
    let mut onset = (erg0 > DARK_THRESHOLD).then_some((0usize, 0.0, v0));
    let mut k = 0;
    let mut pruned = false;
    loop {
        if battery_ergotropy_bound(&cur, params.omega0) <= best.value {
            pruned = true;
            break;
        }
        if k == n {
            break;
        }
        prev2 = prev;
        let f_prev2 = f_prev;
        prev = cur;
        f_prev = f_cur;
        scanner.propagator.advance(&mut cur, time(k), dt)?;
        k += 1;
        f_cur = scanner.erg(&cur);

        if f_prev > f_cur && f_prev >= f_prev2 {
            let left = if k >= 2 { time(k - 2) } else { 0.0 };
            let b = Bracket {
                index: k - 1,
                at: time(k - 1),
                value: f_prev,
                left,
                span: time(k) - left,
                state: if k >= 2 { prev2 } else { prev },
            };
            // t = 0 is a boundary, not a dynamical peak
            if first.is_none() && k >= 2 {
                first = Some(b.clone());
            }
            keep_top(&mut top, b, options.candidates);
        }
        if f_cur > best.value {
            let left = time(k - 1);
            best = Bracket {
                index: k,
                at: time(k),
                value: f_cur,
                left,
                span: (2.0 * dt).min(options.horizon - left),
                state: prev,
            };
        }
        if onset.is_none() && f_cur > DARK_THRESHOLD {
            onset = Some((k, time(k - 1), prev));
        }
    }
    if !pruned && n > 0 && f_cur >= f_prev {
        let b = Bracket {
            index: n,
            at: options.horizon,
            value: f_cur,
            left: time(n - 1),
            span: dt,
            state: prev,
        };
        if first.is_none() {
            first = Some(b.clone());
        }
        keep_top(&mut top, b, options.candidates);
    }

    let mut peak = (best.left, f64::NEG_INFINITY, best.index);
    let mut first_value = None;
    for (i, b) in first.iter().chain(top.iter()).chain(std::iter::once(&best)).enumerate() {
        let (t, value) = scanner.refine(b, dt)?;
        if i == 0 && first.is_some() {
            first_value = Some(value);
        }
        if value > peak.1 || (value == peak.1 && t < peak.0) {
            peak = (t, value, b.index);
        }
    }
    let (t_bar, e_bar, peak_index) = peak;

    let t0 = match onset {
        None => None,
        Some((idx, _, _)) if idx <= 1 => Some(0.0),
        Some((_, left, state)) => Some(scanner.onset(&state, left, dt)?),
    };

    // State at the charging time, propagated from the nearest stored state.
    let at_peak = {
        let b = first
            .iter()
            .chain(top.iter())
            .chain(std::iter::once(&best))
            .find(|b| b.index == peak_index)
            .expect("peak comes from a bracket");
        to_matrix(&scanner.state_at(&b.state, b.left, t_bar - b.left)?)
    };
    let start = local_observables(&rho0, params)?;
    let end = local_observables(&at_peak, params)?;
    let d_e_ba = end.energy_ba - start.energy_ba;
    let d_e_ch = start.energy_ch - end.energy_ch;
    let gain = (e_bar - erg0).max(0.0);

    let mut flags = MeritFlags {
        horizon_limited: peak_index == n && !pruned,
        first_peak_not_global: first_value
            .is_some_and(|v| v < e_bar - CHARGE_THRESHOLD * e_bar.max(1.0)),
        efficiency_undefined: false,
    };
    let r_bar = if d_e_ch < EFFICIENCY_FLOOR {
        flags.efficiency_undefined = true;
        0.0
    } else {
        gain / d_e_ch
    };

    Ok(MeritReport {
        e_bar,
        t_bar,
        t0,
        r_bar,
        p_bar: if t_bar > 0.0 { gain / t_bar } else { 0.0 },
        d_e_ba,
        d_e_ch,
        heat: d_e_ch - d_e_ba,
        erg_initial: erg0,
        chargeable: e_bar - erg0 > CHARGE_THRESHOLD,
        flags,
        grid_intervals: n,
        scanned_intervals: k,
    })
}

/// Interval `[lower, upper]` of `μ̂·r̂12` values where the battery cannot be charged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockedRegion {
    pub lower: f64,
    pub upper: f64,
}

fn is_blocked(params: &ModelParams, a: f64, initial: &InitialState, options: &AnalysisOptions) -> Result<bool> {
    Ok(!analyze(&params.with_mu_dot_r(a), initial, options)?.chargeable)
}

fn bisect_edge(
    mut free: f64,
    mut blocked: f64,
    tolerance: f64,
    predicate: impl Fn(f64) -> Result<bool>,
) -> Result<f64> {
    while (blocked - free).abs() > tolerance {
        let mid = 0.5 * (free + blocked);
        if predicate(mid)? {
            blocked = mid;
        } else {
            free = mid;
        }
    }
    Ok(0.5 * (free + blocked))
}

/// Blocked region in `μ̂·r̂12 ∈ [0, 1]` at the separation in `params`.
pub fn chargeability_bounds(
    params: &ModelParams,
    initial: &InitialState,
    options: &AnalysisOptions,
) -> Result<Option<BlockedRegion>> {
    chargeability_bounds_with(params, initial, options, BOUNDS_SCAN_POINTS, BOUNDS_TOLERANCE)
}

pub fn chargeability_bounds_with(
    params: &ModelParams,
    initial: &InitialState,
    options: &AnalysisOptions,
    scan_points: usize,
    tolerance: f64,
) -> Result<Option<BlockedRegion>> {
    assert!(scan_points >= 2);
    let grid: Vec<f64> = (0..scan_points)
        .map(|i| i as f64 / (scan_points - 1) as f64)
        .collect();
    let blocked = grid
        .par_iter()
        .map(|&a| is_blocked(params, a, initial, options))
        .collect::<Result<Vec<bool>>>()?;

    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, &b) in blocked.iter().enumerate() {
        if !b {
            continue;
        }
        match runs.last_mut() {
            Some(run) if run.1 + 1 == i => run.1 = i,
            _ => runs.push((i, i)),
        }
    }
    match runs.as_slice() {
        [] => Ok(None),
        &[(i0, i1)] => {
            let predicate = |a: f64| is_blocked(params, a, initial, options);
            let lower = if i0 == 0 {
                0.0
            } else {
                bisect_edge(grid[i0 - 1], grid[i0], tolerance, predicate)?
            };
            let upper = if i1 == scan_points - 1 {
                1.0
            } else {
                bisect_edge(grid[i1 + 1], grid[i1], tolerance, predicate)?
            };
            Ok(Some(BlockedRegion { lower, upper }))
        }
        _ => Err(Error::NonIntervalBlockedRegion {
            runs: runs.iter().map(|&(a, b)| (grid[a], grid[b])).collect(),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalDistance {
    /// Separation in units of λ beyond which no orientation charges the battery.
    pub distance: f64,
    /// The battery cannot be charged even at the smallest separation tried.
    pub degenerate: bool,
}

fn chargeable_somewhere(
    params: &ModelParams,
    initial: &InitialState,
    options: &AnalysisOptions,
    a_points: usize,
) -> Result<bool> {
    let found = (0..a_points).into_par_iter().find_map_any(|i| {
        let a = i as f64 / (a_points - 1) as f64;
        match analyze(&params.with_mu_dot_r(a), initial, options) {
            Ok(m) if !m.chargeable => None,
            other => Some(other.map(|m| m.chargeable)),
        }
    });
    found.unwrap_or(Ok(false))
}

/// Largest separation at which some orientation still charges the battery.
pub fn critical_distance(
    params: &ModelParams,
    initial: &InitialState,
    options: &AnalysisOptions,
) -> Result<CriticalDistance> {
    critical_distance_with(
        params,
        initial,
        options,
        CRITICAL_A_POINTS,
        CRITICAL_BRACKET,
        CRITICAL_TOLERANCE,
    )
}

pub fn critical_distance_with(
    params: &ModelParams,
    initial: &InitialState,
    options: &AnalysisOptions,
    a_points: usize,
    bracket: (f64, f64),
    tolerance: f64,
) -> Result<CriticalDistance> {
    assert!(a_points >= 2);
    let (mut lo, mut hi) = bracket;
    let charges = |r: f64| chargeable_somewhere(&params.with_separation(r), initial, options, a_points);
    if !charges(lo)? {
        return Ok(CriticalDistance {
            distance: 0.0,
            degenerate: true,
        });
    }
    if charges(hi)? {
        return Err(Error::Bracket(format!(
            "battery still chargeable at r12 = {hi} lambda"
        )));
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if charges(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CriticalDistance {
        distance: 0.5 * (lo + hi),
        degenerate: false,
    })
}
