// SPDX-License-Identifier: Apache-2.0

//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one PASS or FAIL line.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qbattery::dynamics::{
    approx_ergotropy, approx_peak_time, closed_form_excited_ground, simulate, uniform_grid,
};
use qbattery::ergotropy::{dephase, ergotropy, local_observables, split};
use qbattery::merit::{analyze, chargeability_bounds, critical_distance, AnalysisOptions};
use qbattery::model::{basis_projector, local_hamiltonian, InitialState, ModelParams, Preparation};
use qbattery::numerics::{hermitian_eig, partial_trace, ComplexMatrix, Subsystem};
use qbattery::{build_generator, evolve, Method};

type Outcome = Result<String, String>;

const METHODS: [Method; 2] = [Method::Expm, Method::RungeKutta];

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn options(method: Method) -> AnalysisOptions {
    AnalysisOptions::default().with_method(method)
}

fn battery_state(rho: &ComplexMatrix) -> ComplexMatrix {
    partial_trace(rho, Subsystem::Battery).unwrap()
}

fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    // occasionally low rank, to exercise eigenvalues near zero
    let g = if rng.gen_bool(0.3) {
        ComplexMatrix::from_fn(dim, dim, |i, j| if j == 0 { g[(i, 0)] } else { g[(i, j)] * 1e-3 })
    } else {
        g
    };
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    m.scale_real(1.0 / tr)
}

fn random_hamiltonian(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    (&g + &g.adjoint()).scale_real(0.5)
}

/// Every permutation of `0..n`.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Ergotropy as energy minus the least energy over all unitary orbits of the spectrum.
fn brute_force_ergotropy(rho: &ComplexMatrix, h: &ComplexMatrix) -> f64 {
    let levels = hermitian_eig(h).unwrap().values;
    let occupations = hermitian_eig(rho).unwrap().values;
    let energy = rho.trace_product(h).re;
    let passive = permutations(levels.len())
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| levels[i] * occupations[j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    energy - passive
}

fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    let rotating_frame = rng.gen_bool(0.5);
    ModelParams {
        rotating_frame,
        omega0: if rotating_frame { 1.0 } else { 10.0 },
        ..ModelParams::new(rng.gen_range(0.05..0.5), rng.gen_range(0.0..=1.0))
    }
}

fn random_preparation(rng: &mut ChaCha8Rng) -> Preparation {
    if rng.gen_bool(0.5) {
        Preparation::CoherentPure
    } else {
        Preparation::Diagonal
    }
}

fn random_initial(rng: &mut ChaCha8Rng) -> ComplexMatrix {
    if rng.gen_bool(0.5) {
        random_density(rng, 4)
    } else {
        let setup = InitialState {
            charger: random_preparation(rng),
            c: rng.gen_range(0.0..=1.0),
            battery: random_preparation(rng),
            e: rng.gen_range(0.0..=1.0),
        };
        qbattery::model::initial_state(&setup).unwrap()
    }
}

fn closed_form_agreement() -> Outcome {
    let mut worst: f64 = 0.0;
    for method in METHODS {
        for r in [0.03, 0.06, 0.09] {
            let params = ModelParams::new(r, 0.0);
            let gen = build_generator(&params).unwrap();
            let grid = uniform_grid(10.0, 200);
            let traj = evolve(&gen, &basis_projector(1), &grid, method).unwrap();
            let f = closed_form_excited_ground(&params).unwrap();
            for (t, s) in grid.iter().zip(&traj.states) {
                let o = local_observables(s, &params).unwrap();
                let exact = f(*t);
                let d_e_ba = o.energy_ba;
                let d_e_ch = 1.0 - o.energy_ch;
                for (x, y) in [
                    (o.erg_ba, exact.erg_ba),
                    (o.erg_ch, exact.erg_ch),
                    (d_e_ba, exact.d_e_ba),
                    (d_e_ch, exact.d_e_ch),
                    (d_e_ch - d_e_ba, exact.heat),
                ] {
                    worst = worst.max((x - y).abs());
                }
            }
        }
    }
    check(worst <= 1e-7, format!("max abs error {worst:.2e} (tol 1e-7)"))
}

fn approximation_error_table() -> Outcome {
    // (r, target |t̄ - t_ap|/t̄, tolerance, target |Ē - ω0|/Ē, tolerance)
    let table = [(0.01, 1.72e-4, 0.15, 0.0010, 0.10), (0.04, 0.0112, 0.05, 0.0713, 0.05)];
    let setup = InitialState::coherent(1.0, 0.2);
    let mut ok = true;
    let mut detail = Vec::new();
    for method in METHODS {
        for &(r, t_target, t_tol, e_target, e_tol) in &table {
            let params = ModelParams::new(r, 0.0);
            let m = analyze(&params, &setup, &options(method)).unwrap();
            let t_ap = approx_peak_time(&params).unwrap();
            let dt = ((m.t_bar - t_ap) / m.t_bar).abs();
            let de = ((m.e_bar - params.omega0) / m.e_bar).abs();
            let good = ((dt - t_target) / t_target).abs() <= t_tol
                && ((de - e_target) / e_target).abs() <= e_tol;
            ok &= good;
            detail.push(format!("{method:?} r={r}: ({dt:.4e}, {de:.4e})"));
        }
    }
    check(ok, detail.join("; "))
}

fn critical_distance_value() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for method in METHODS {
        let d = critical_distance(
            &ModelParams::default(),
            &InitialState::coherent(1.0, 0.0),
            &options(method),
        )
        .unwrap();
        ok &= !d.degenerate && (d.distance - 0.1691).abs() <= 1e-3;
        detail.push(format!("{method:?} {:.5}", d.distance));
    }
    check(ok, format!("{} lambda (target 0.1691 +- 0.001)", detail.join(", ")))
}

fn approximation_maximum() -> Outcome {
    let mut worst: f64 = 0.0;
    for r in [0.005, 0.01, 0.03, 0.06] {
        let params = ModelParams::new(r, 0.3);
        let t_ap = approx_peak_time(&params).unwrap();
        for e in [0.0, 0.2, 0.5] {
            worst = worst.max((approx_ergotropy(&params, e, t_ap).unwrap() - params.omega0).abs());
        }
    }
    check(worst <= 1e-12, format!("max |E_ap(t_ap) - w0| {worst:.2e} (tol 1e-12)"))
}

fn incoherent_equality() -> Outcome {
    let params = ModelParams::new(0.06, 0.0);
    let h = local_hamiltonian(&params);
    let grid = uniform_grid(20.0, 4001);
    let mut worst: f64 = 0.0;
    for method in METHODS {
        for c in [0.25, 0.5, 0.75] {
            let coherent = simulate(&params, &InitialState::coherent(c, 0.0), &grid, method).unwrap();
            let diagonal = simulate(&params, &InitialState::diagonal(c, 0.0), &grid, method).unwrap();
            for (a, b) in coherent.states.iter().zip(&diagonal.states) {
                let (incoherent, _) = split(&battery_state(a), &h).unwrap();
                let diag_erg = ergotropy(&battery_state(b), &h).unwrap();
                worst = worst.max((incoherent - diag_erg).abs());
            }
        }
    }
    check(worst <= 1e-7, format!("max deviation {worst:.2e} over 3 x 4001 times (tol 1e-7)"))
}

fn zero_ergotropy_charger() -> Outcome {
    let batteries = [(Preparation::Diagonal, 0.0), (Preparation::CoherentPure, 0.2)];
    let grid = uniform_grid(20.0, 4001);
    let mut combos = 0;
    let mut failures = Vec::new();
    let mut min_de = f64::INFINITY;
    let mut max_gain = f64::NEG_INFINITY;
    for r in [0.03, 0.06, 0.1] {
        for a in [0.0, 1.0] {
            for &(battery, e) in &batteries {
                combos += 1;
                let params = ModelParams::new(r, a);
                let setup = InitialState {
                    charger: Preparation::Diagonal,
                    c: 0.5,
                    battery,
                    e,
                };
                let h = local_hamiltonian(&params);
                for method in METHODS {
                    let m = analyze(&params, &setup, &options(method)).unwrap();
                    let traj = simulate(&params, &setup, &grid, method).unwrap();
                    let o0 = local_observables(&traj.states[0], &params).unwrap();
                    let (mut gain, mut de) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                    for s in &traj.states {
                        let o = local_observables(s, &params).unwrap();
                        gain = gain.max(ergotropy(&battery_state(s), &h).unwrap() - o0.erg_ba);
                        de = de.max(o.energy_ba - o0.energy_ba);
                    }
                    gain = gain.max(m.e_bar - m.erg_initial);
                    max_gain = max_gain.max(gain);
                    min_de = min_de.min(de);
                    if m.chargeable || gain > 1e-9 || de <= 1e-4 {
                        failures.push(format!("{method:?} r={r} a={a} {battery:?} e={e}"));
                    }
                }
            }
        }
    }
    let detail = format!(
        "{combos} combinations, max gain {max_gain:.1e}, min max-dE_ba {min_de:.3e} (need > 1e-4)"
    );
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; failing: {}", failures.join(", ")))
    }
}

fn cptp_and_oracle_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20240517);
    let mut detail = Vec::new();
    let mut ok = true;

    // CPTP along random trajectories, both propagators
    let (mut drift, mut min_eig): (f64, f64) = (0.0, f64::INFINITY);
    for _ in 0..100 {
        let params = random_params(&mut rng);
        let gen = build_generator(&params).unwrap();
        let rho0 = random_initial(&mut rng);
        let grid = uniform_grid(rng.gen_range(1.0..20.0), 21);
        for method in METHODS {
            let traj = evolve(&gen, &rho0, &grid, method).unwrap();
            drift = drift.max(traj.max_trace_drift());
            min_eig = min_eig.min(traj.min_eigenvalue().unwrap());
        }
    }
    ok &= drift <= 1e-8 && min_eig >= -1e-8;
    detail.push(format!("trace drift {drift:.1e}, min eigenvalue {min_eig:.1e}"));

    // propagator agreement: fixed 3x3x3 grid plus random cases
    let mut cases: Vec<(ModelParams, ComplexMatrix)> = Vec::new();
    let fixed_states = [
        InitialState::excited_ground(),
        InitialState::coherent(0.7, 0.3),
        InitialState::diagonal(0.6, 0.2),
    ];
    for r in [0.05, 0.1, 0.2] {
        for a in [0.0, 0.5, 1.0] {
            for s in &fixed_states {
                cases.push((
                    ModelParams::new(r, a),
                    qbattery::model::initial_state(s).unwrap(),
                ));
            }
        }
    }
    while cases.len() < 100 {
        cases.push((random_params(&mut rng), random_initial(&mut rng)));
    }
    let mut disagreement: f64 = 0.0;
    for (params, rho0) in &cases {
        let gen = build_generator(params).unwrap();
        let grid = uniform_grid(20.0, 41);
        let a = evolve(&gen, rho0, &grid, Method::Expm).unwrap();
        let b = evolve(&gen, rho0, &grid, Method::RungeKutta).unwrap();
        disagreement = disagreement.max(a.max_difference(&b));
    }
    ok &= disagreement <= 1e-8;
    detail.push(format!("RK vs exp {disagreement:.1e} on {} cases", cases.len()));

    // ergotropy decomposition on random states and Hamiltonians
    let (mut split_err, mut dephase_err, mut oracle_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in 0..100 {
        let dim = if k % 2 == 0 { 2 } else { 4 };
        let rho = random_density(&mut rng, dim);
        let h = random_hamiltonian(&mut rng, dim);
        let total = ergotropy(&rho, &h).unwrap();
        let (incoherent, coherent) = split(&rho, &h).unwrap();
        split_err = split_err.max((total - incoherent - coherent).abs());
        let dephased = ergotropy(&dephase(&rho, &h).unwrap(), &h).unwrap();
        dephase_err = dephase_err.max((incoherent - dephased).abs());
        oracle_err = oracle_err.max((total - brute_force_ergotropy(&rho, &h)).abs());
    }
    ok &= split_err <= 1e-10 && dephase_err <= 1e-10 && oracle_err <= 1e-10;
    detail.push(format!(
        "split {split_err:.1e}, dephased {dephase_err:.1e}, permutation oracle {oracle_err:.1e}"
    ));
    check(ok, detail.join("; "))
}

fn trend_suite() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();

    let mut separations = vec![0.001];
    separations.extend((1..=18).map(|i| 0.01 * i as f64));
    for method in METHODS {
        for (c, e) in [(0.4, 0.0), (0.7, 0.0), (1.0, 0.0), (1.0, 0.2), (1.0, 0.4)] {
            let setup = InitialState::coherent(c, e);
            let charged: Vec<_> = separations
                .iter()
                .map(|&r| analyze(&ModelParams::new(r, 0.0), &setup, &options(method)).unwrap())
                .filter(|m| m.chargeable)
                .collect();
            let monotone = charged.len() >= 5
                && charged
                    .windows(2)
                    .all(|w| w[1].e_bar <= w[0].e_bar && w[1].t_bar >= w[0].t_bar);
            if !monotone {
                ok = false;
                detail.push(format!("{method:?} c={c} e={e}: separation trend broken"));
            }
        }
    }
    detail.push("E_bar and t_bar monotone in r12 for 5 initial states".into());

    let separations = [0.05, 0.10, 0.15];
    let mut regions = Vec::new();
    for &r in &separations {
        let row: Vec<_> = (1..=9)
            .map(|i| {
                let setup = InitialState::coherent(1.0, 0.1 * i as f64);
                chargeability_bounds(&ModelParams::new(r, 0.0), &setup, &AnalysisOptions::default())
                    .unwrap()
                    .map(|b| (b.lower, b.upper))
            })
            .collect();
        regions.push(row);
    }
    let all_blocked = regions.iter().flatten().all(|b| b.is_some());
    let grows_with_e = regions.iter().all(|row| {
        row.windows(2).all(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => b.0 <= a.0 + 1e-4 && b.1 >= a.1 - 1e-4,
            _ => false,
        })
    });
    let grows_with_r = (0..9).all(|i| {
        regions.windows(2).all(|w| match (w[0][i], w[1][i]) {
            (Some(a), Some(b)) => b.0 <= a.0 + 1e-4 && b.1 >= a.1 - 1e-4,
            _ => false,
        })
    });
    ok &= all_blocked && grows_with_e && grows_with_r;
    detail.push(format!(
        "blocked region grows with e: {grows_with_e}, with r12: {grows_with_r}"
    ));

    for method in METHODS {
        let m = analyze(
            &ModelParams::new(0.001, 0.0),
            &InitialState::coherent(1.0, 0.0),
            &options(method),
        )
        .unwrap();
        ok &= m.r_bar >= 0.97;
        detail.push(format!("{method:?} R_bar(0.001) = {:.6}", m.r_bar));
    }
    check(ok, detail.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("closed-form agreement", closed_form_agreement),
        ("approximation-error table", approximation_error_table),
        ("critical distance", critical_distance_value),
        ("maximum of the approximation", approximation_maximum),
        ("incoherent-equality property", incoherent_equality),
        ("zero-ergotropy charger", zero_ergotropy_charger),
        ("CPTP and oracle suite", cptp_and_oracle_suite),
        ("trend suite", trend_suite),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
