// SPDX-License-Identifier: Apache-2.0

//! Time evolution of the pair state.
//!
//! Two independent propagators are provided: an adaptive Dormand–Prince 5(4)
//! integrator driven by the direct commutator form of the generator, and the
//! exact propagator `exp(L t)` of the vectorized 16x16 superoperator. The
//! closed-form solution for the charger-excited/battery-ground preparation
//! and the short-distance unitary approximation live here as well.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{build_generator, initial_state, Generator, InitialState, ModelParams};
use crate::numerics::{
    hermitian_eig, matrix_exp, validate_density_matrix, ComplexMatrix, C64, I, ONE, ZERO,
};

/// Row-major `vec(ρ)` of a pair state.
pub type StateVec = [C64; 16];

/// Relative tolerance of the adaptive integrator.
pub const RK_RTOL: f64 = 1e-10;
/// Absolute tolerance of the adaptive integrator.
pub const RK_ATOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Method {
    /// Exact propagator of the vectorized generator.
    #[default]
    Expm,
    /// Adaptive Dormand–Prince 5(4).
    RungeKutta,
}

pub fn to_state_vec(rho: &ComplexMatrix) -> StateVec {
    let mut v = [ZERO; 16];
    v.copy_from_slice(rho.as_slice());
    v
}

pub fn to_matrix(v: &StateVec) -> ComplexMatrix {
    ComplexMatrix::new(4, 4, v.to_vec()).expect("16 entries")
}

/// Battery populations and coherence `(ρ_11, ρ_00, ρ_10)`.
pub fn battery_entries(v: &StateVec) -> (f64, f64, C64) {
    (v[0].re + v[10].re, v[5].re + v[15].re, v[1] + v[11])
}

/// Charger populations and coherence `(ρ_11, ρ_00, ρ_10)`.
pub fn charger_entries(v: &StateVec) -> (f64, f64, C64) {
    (v[0].re + v[5].re, v[10].re + v[15].re, v[2] + v[7])
}

/// `<n_1 + n_2>`, nonincreasing along every trajectory.
pub fn excitation_number(v: &StateVec) -> f64 {
    2.0 * v[0].re + v[5].re + v[10].re
}

/// Upper bound on the battery ergotropy at this and every later time.
///
/// In the exchange eigenbasis `|s>, |a> = (|10> ± |01>)/√2` the dissipator
/// splits into two independent channels with rates `γ ± γ12`. The battery
/// excited population is bounded by `P_11 + (P_s + P_a)/2 + |ρ_sa|` and its
/// coherence by `(|ρ_11,s| + |ρ_11,a| + |ρ_s,00| + |ρ_a,00|)/√2`; both bounds
/// are nonincreasing along any trajectory and the qubit ergotropy is monotone
/// in each argument.
pub fn battery_ergotropy_bound(v: &StateVec, omega0: f64) -> f64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let rho_sa = 0.5 * (v[5] - v[6] + v[9] - v[10]);
    let population = v[0].re + 0.5 * (v[5].re + v[10].re) + rho_sa.norm();
    let coherence = h
        * (h * ((v[1] + v[2]).norm()
            + (v[1] - v[2]).norm()
            + (v[7] + v[11]).norm()
            + (v[7] - v[11]).norm()));
    let z = 2.0 * population - 1.0;
    0.5 * omega0 * (z + (z * z + 4.0 * coherence * coherence).sqrt())
}

type Mat4 = [[C64; 4]; 4];

fn to_mat4(m: &ComplexMatrix) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, z) in row.iter_mut().enumerate() {
            *z = m[(i, j)];
        }
    }
    out
}

/// Allocation-free direct evaluation of the generator on `vec(ρ)`.
#[derive(Debug, Clone)]
struct DirectRhs {
    hamiltonian: Mat4,
    decay: Mat4,
    lowering: [Mat4; 2],
    damping: [[f64; 2]; 2],
}

impl DirectRhs {
    fn new(gen: &Generator) -> Self {
        let decay = gen
            .lowering
            .iter()
            .enumerate()
            .flat_map(|(i, li)| {
                gen.lowering.iter().enumerate().map(move |(j, lj)| {
                    (&li.adjoint() * lj).scale_real(gen.damping[i][j])
                })
            })
            .fold(ComplexMatrix::zeros(4, 4), |acc, m| &acc + &m);
        Self {
            hamiltonian: to_mat4(&gen.hamiltonian),
            decay: to_mat4(&decay),
            lowering: [to_mat4(&gen.lowering[0]), to_mat4(&gen.lowering[1])],
            damping: gen.damping,
        }
    }

    fn eval(&self, rho: &StateVec, out: &mut StateVec) {
        let r = |i: usize, j: usize| rho[4 * i + j];
        let h = &self.hamiltonian;
        let d = &self.decay;
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = ZERO;
                for k in 0..4 {
                    // -i[H, ρ] - ½{D, ρ}
                    acc += (-I * h[i][k] - 0.5 * d[i][k]) * r(k, j);
                    acc += r(i, k) * (I * h[k][j] - 0.5 * d[k][j]);
                }
                out[4 * i + j] = acc;
            }
        }
        // Σ γ_ij S_i^- ρ S_j^+ ; (S_j^+)_{kl} = conj((S_j^-)_{lk})
        for a in 0..2 {
            let la = &self.lowering[a];
            for b in 0..2 {
                let g = self.damping[a][b];
                let lb = &self.lowering[b];
                for i in 0..4 {
                    for k in 0..4 {
                        let lik = la[i][k];
                        if lik == ZERO {
                            continue;
                        }
                        for l in 0..4 {
                            let rkl = r(k, l);
                            if rkl == ZERO {
                                continue;
                            }
                            for j in 0..4 {
                                let ljl = lb[j][l];
                                if ljl != ZERO {
                                    out[4 * i + j] += g * lik * rkl * ljl.conj();
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

// Dormand–Prince 5(4) tableau. The generator is time independent, so the
// nodes c_i are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone)]
struct RungeKutta {
    rhs: DirectRhs,
    /// Step size carried over between calls.
    step: f64,
}

impl RungeKutta {
    fn new(gen: &Generator) -> Self {
        let p = &gen.params;
        let mut scale = p.gamma + gen.couplings.omega12.abs() + gen.couplings.gamma12.abs();
        if !p.rotating_frame {
            scale += p.omega0;
        }
        Self {
            rhs: DirectRhs::new(gen),
            step: 0.01 / scale,
        }
    }

    /// Integrates `y` from `t` to `t + span`.
    fn advance(&mut self, y: &mut StateVec, t: f64, span: f64) -> Result<()> {
        let end = t + span;
        let mut now = t;
        let mut k = [[ZERO; 16]; 7];
        self.rhs.eval(y, &mut k[0]);
        while now < end {
            let remaining = end - now;
            let last = self.step >= remaining;
            let h = if last { remaining } else { self.step };
            let mut stage = [ZERO; 16];
            for s in 1..7 {
                for n in 0..16 {
                    let mut acc = ZERO;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += A[s][j] * kj[n];
                    }
                    stage[n] = y[n] + h * acc;
                }
                self.rhs.eval(&stage, &mut k[s]);
            }
            // stage now holds the fifth-order solution (FSAL row); k[6] = f(stage)
            let mut err_sq = 0.0;
            for n in 0..16 {
                let mut e = ZERO;
                for (s, ks) in k.iter().enumerate() {
                    e += E[s] * ks[n];
                }
                let sc = RK_ATOL + RK_RTOL * y[n].norm().max(stage[n].norm());
                err_sq += (h * e).norm_sqr() / (sc * sc);
            }
            let err = (err_sq / 16.0).sqrt();
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                *y = stage;
                now = if last { end } else { now + h };
                k[0] = k[6];
                // Keep the proposed step when the last step was truncated to hit the grid.
                if !last || factor < 1.0 {
                    self.step = h * factor;
                }
            } else {
                self.step = h * factor.min(1.0);
                if self.step <= 16.0 * f64::EPSILON * now.abs().max(span) {
                    return Err(Error::StepSizeUnderflow { time: now });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Exponential {
    superoperator: ComplexMatrix,
    cache: Vec<(f64, ComplexMatrix)>,
}

impl Exponential {
    const CACHE_SIZE: usize = 4;

    fn propagator(&mut self, span: f64) -> Result<&ComplexMatrix> {
        if let Some(pos) = self.cache.iter().position(|(s, _)| *s == span) {
            return Ok(&self.cache[pos].1);
        }
        let p = matrix_exp(&self.superoperator.scale_real(span))?;
        if self.cache.len() == Self::CACHE_SIZE {
            self.cache.remove(0);
        }
        self.cache.push((span, p));
        Ok(&self.cache.last().expect("just pushed").1)
    }

    fn advance(&mut self, y: &mut StateVec, span: f64) -> Result<()> {
        let p = self.propagator(span)?;
        apply_propagator(p, y);
        Ok(())
    }

    fn advance_uncached(&self, y: &mut StateVec, span: f64) -> Result<()> {
        let p = matrix_exp(&self.superoperator.scale_real(span))?;
        apply_propagator(&p, y);
        Ok(())
    }
}

fn apply_propagator(p: &ComplexMatrix, y: &mut StateVec) {
    let m = p.as_slice();
    let mut out = [ZERO; 16];
    for (i, o) in out.iter_mut().enumerate() {
        let row = &m[16 * i..16 * i + 16];
        *o = row.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
    }
    *y = out;
}

/// Advances pair states in time with either propagator.
#[derive(Debug, Clone)]
pub struct Propagator {
    inner: Inner,
}

#[derive(Debug, Clone)]
enum Inner {
    Expm(Exponential),
    Rk(RungeKutta),
}

impl Propagator {
    pub fn new(gen: &Generator, method: Method) -> Self {
        let inner = match method {
            Method::Expm => Inner::Expm(Exponential {
                superoperator: gen.superoperator(),
                cache: Vec::new(),
            }),
            Method::RungeKutta => Inner::Rk(RungeKutta::new(gen)),
        };
        Self { inner }
    }

    pub fn method(&self) -> Method {
        match self.inner {
            Inner::Expm(_) => Method::Expm,
            Inner::Rk(_) => Method::RungeKutta,
        }
    }

    /// Advances `y`, the state at time `t`, by `span`. Repeated spans are cheap.
    pub fn advance(&mut self, y: &mut StateVec, t: f64, span: f64) -> Result<()> {
        if span == 0.0 {
            return Ok(());
        }
        match &mut self.inner {
            Inner::Expm(e) => e.advance(y, span),
            Inner::Rk(rk) => rk.advance(y, t, span),
        }
    }

    /// Like [`Propagator::advance`], for one-off spans that should not disturb
    /// cached propagators or the integrator's step-size history.
    pub fn advance_once(&self, y: &mut StateVec, t: f64, span: f64) -> Result<()> {
        if span == 0.0 {
            return Ok(());
        }
        match &self.inner {
            Inner::Expm(e) => e.advance_uncached(y, span),
            Inner::Rk(rk) => rk.clone().advance(y, t, span),
        }
    }
}

/// Pair states sampled on a time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexMatrix>,
    pub params: ModelParams,
    pub initial: Option<InitialState>,
}

impl Trajectory {
    /// Largest `|tr ρ - 1|` along the trajectory.
    pub fn max_trace_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.trace() - ONE).norm())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue over all states.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        self.states.iter().try_fold(f64::INFINITY, |m, s| {
            Ok(m.min(hermitian_eig(s)?.values[0]))
        })
    }

    /// Largest elementwise difference to another trajectory on the same grid.
    pub fn max_difference(&self, other: &Trajectory) -> f64 {
        assert_eq!(self.times.len(), other.times.len());
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

fn check_grid(times: &[f64]) -> Result<()> {
    match times.first() {
        None => return Err(Error::InvalidTimeGrid("empty grid".into())),
        Some(&t) if t != 0.0 => {
            return Err(Error::InvalidTimeGrid(format!("first time is {t}")))
        }
        _ => {}
    }
    if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::InvalidTimeGrid(format!(
            "{} is followed by {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Propagates `rho0` through `times` (ascending, starting at 0).
pub fn evolve(
    gen: &Generator,
    rho0: &ComplexMatrix,
    times: &[f64],
    method: Method,
) -> Result<Trajectory> {
    validate_density_matrix(rho0, 4)?;
    check_grid(times)?;
    let mut propagator = Propagator::new(gen, method);
    let mut y = to_state_vec(rho0);
    let mut states = Vec::with_capacity(times.len());
    states.push(rho0.clone());
    for w in times.windows(2) {
        propagator.advance(&mut y, w[0], w[1] - w[0])?;
        states.push(to_matrix(&y));
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        params: gen.params,
        initial: None,
    })
}

pub fn evolve_rk(gen: &Generator, rho0: &ComplexMatrix, times: &[f64]) -> Result<Trajectory> {
    evolve(gen, rho0, times, Method::RungeKutta)
}

pub fn evolve_expm(gen: &Generator, rho0: &ComplexMatrix, times: &[f64]) -> Result<Trajectory> {
    evolve(gen, rho0, times, Method::Expm)
}

/// Builds the generator and initial state, then propagates.
pub fn simulate(
    params: &ModelParams,
    initial: &InitialState,
    times: &[f64],
    method: Method,
) -> Result<Trajectory> {
    let gen = build_generator(params)?;
    let rho0 = initial_state(initial)?;
    let mut traj = evolve(&gen, &rho0, times, method)?;
    traj.initial = Some(*initial);
    Ok(traj)
}

/// `n` equally spaced times covering `[0, horizon]`.
pub fn uniform_grid(horizon: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "a grid needs at least two samples");
    (0..n)
        .map(|k| horizon * k as f64 / (n - 1) as f64)
        .collect()
}

/// Observables of the charger-excited/battery-ground preparation, in units of ω0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub erg_ba: f64,
    pub erg_ch: f64,
    pub d_e_ba: f64,
    pub d_e_ch: f64,
    pub heat: f64,
}

/// Exact solution for the initial state `|1>_ch ⊗ |0>_ba`.
pub fn closed_form_excited_ground(params: &ModelParams) -> Result<impl Fn(f64) -> ClosedForm> {
    let c = crate::model::couplings(params)?;
    let (gamma, omega0) = (params.gamma, params.omega0);
    Ok(move |t: f64| {
        let envelope = (-gamma * t).exp();
        // e^{-γt} cosh(γ12 t), split so neither factor overflows
        let hyper =
            0.5 * (((c.gamma12 - gamma) * t).exp() + ((-c.gamma12 - gamma) * t).exp());
        let wave = envelope * (2.0 * c.omega12 * t).cos();
        ClosedForm {
            erg_ba: omega0 * (hyper - wave - 1.0).max(0.0),
            erg_ch: omega0 * (hyper + wave - 1.0).max(0.0),
            d_e_ba: omega0 * 0.5 * (hyper - wave),
            d_e_ch: omega0 * (1.0 - 0.5 * (hyper + wave)),
            heat: omega0 * (1.0 - hyper),
        }
    })
}

/// Dissipation-free evolution operator valid when `|Ω12| ≫ |γ12|`.
#[derive(Debug, Clone)]
pub struct ApproxUnitary {
    pub matrix: ComplexMatrix,
    /// Set when `|Ω12| < 10 |γ12|`, outside the regime of validity.
    pub regime_warning: bool,
}

pub fn approx_unitary(params: &ModelParams, t: f64) -> Result<ApproxUnitary> {
    let c = crate::model::couplings(params)?;
    let (s, co) = (c.omega12 * t).sin_cos();
    let phase = if params.rotating_frame {
        ONE
    } else {
        C64::new(0.0, -params.omega0 * t).exp()
    };
    let mut u = ComplexMatrix::zeros(4, 4);
    u[(0, 0)] = phase;
    u[(1, 1)] = C64::new(co, 0.0);
    u[(1, 2)] = C64::new(0.0, -s);
    u[(2, 1)] = C64::new(0.0, -s);
    u[(2, 2)] = C64::new(co, 0.0);
    u[(3, 3)] = phase.conj();
    Ok(ApproxUnitary {
        matrix: u,
        regime_warning: c.omega12.abs() < 10.0 * c.gamma12.abs(),
    })
}

/// Battery ergotropy under the unitary approximation for charger `|1>` and
/// battery `√e|1> + √(1-e)|0>`.
pub fn approx_ergotropy(params: &ModelParams, e: f64, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::InvalidParameter {
            name: "e",
            value: e,
            reason: "excitation weight must lie in [0, 1]",
        });
    }
    let c = crate::model::couplings(params)?;
    let phase = c.omega12 * t;
    let alpha = e - (1.0 - e) * (2.0 * phase).cos();
    let cos2 = phase.cos().powi(2);
    let value = 0.5 * (alpha + (alpha * alpha + 4.0 * e * (1.0 - e) * cos2).sqrt());
    Ok(params.omega0 * value.max(0.0))
}

/// Time `π / (2|Ω12|)` at which the approximate ergotropy peaks.
pub fn approx_peak_time(params: &ModelParams) -> Result<f64> {
    let c = crate::model::couplings(params)?;
    Ok(PI / (2.0 * c.omega12.abs()))
}
