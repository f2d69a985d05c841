// SPDX-License-Identifier: Apache-2.0

//! Two identical two-level atoms coupled through the vacuum field.
//!
//! Basis conventions used throughout the crate:
//!
//! * single atom: `{|1>, |0>}` (excited first), `S^z = diag(1/2, -1/2)`,
//!   `S^+ = |1><0|`;
//! * pair: charger ⊗ battery, i.e. `{|11>, |10>, |01>, |00>}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{kron, ComplexMatrix, C64, I, ONE, ZERO};

/// Physical configuration of the charger–battery pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Single-atom spontaneous emission rate; sets the time unit.
    pub gamma: f64,
    /// Interatomic distance in units of the resonant wavelength.
    pub separation: f64,
    /// Cosine between the (parallel) dipole moments and the interatomic axis.
    pub mu_dot_r: f64,
    /// Transition frequency; sets the energy unit.
    pub omega0: f64,
    /// Drop the free term `ω0 Σ S^z` (interaction picture).
    pub rotating_frame: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            separation: 0.06,
            mu_dot_r: 0.0,
            omega0: 1.0,
            rotating_frame: true,
        }
    }
}

impl ModelParams {
    pub fn new(separation: f64, mu_dot_r: f64) -> Self {
        Self {
            separation,
            mu_dot_r,
            ..Self::default()
        }
    }

    pub fn with_separation(self, separation: f64) -> Self {
        Self { separation, ..self }
    }

    pub fn with_mu_dot_r(self, mu_dot_r: f64) -> Self {
        Self { mu_dot_r, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive and finite",
                })
            }
        };
        positive("gamma", self.gamma)?;
        positive("separation", self.separation)?;
        positive("omega0", self.omega0)?;
        if !(0.0..=1.0).contains(&self.mu_dot_r) {
            return Err(Error::InvalidParameter {
                name: "mu_dot_r",
                value: self.mu_dot_r,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(())
    }

    /// Dimensionless `k r12 = 2π r12 / λ`.
    pub fn kr(&self) -> f64 {
        2.0 * PI * self.separation
    }
}

/// Collective damping and dipole–dipole shift between the two atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub gamma12: f64,
    pub omega12: f64,
}

/// Evaluates the collective damping `γ12` and dipole–dipole shift `Ω12`.
pub fn couplings(params: &ModelParams) -> Result<Couplings> {
    params.validate()?;
    let x = params.kr();
    let a2 = params.mu_dot_r * params.mu_dot_r;
    let (s, c) = x.sin_cos();
    let transverse = 1.0 - a2;
    let longitudinal = 1.0 - 3.0 * a2;
    let gamma12 = 1.5
        * params.gamma
        * (transverse * s / x + longitudinal * (c / (x * x) - s / (x * x * x)));
    let omega12 = 0.75
        * params.gamma
        * (-transverse * c / x + longitudinal * (s / (x * x) + c / (x * x * x)));
    Ok(Couplings { gamma12, omega12 })
}

/// Single-atom `S^z` in the `{|1>, |0>}` basis.
pub fn spin_z() -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&[0.5, -0.5])
}

/// Single-atom raising operator `|1><0|`.
pub fn spin_plus() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
}

/// Single-atom lowering operator `|0><1|`.
pub fn spin_minus() -> ComplexMatrix {
    spin_plus().adjoint()
}

/// Lifts a single-atom operator onto the given atom (0 = charger, 1 = battery).
pub fn on_atom(op: &ComplexMatrix, atom: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    match atom {
        0 => kron(op, &id),
        1 => kron(&id, op),
        _ => panic!("atom index {atom} out of range"),
    }
}

/// Local energy operator `ω0 S^z` of either atom.
pub fn local_hamiltonian(params: &ModelParams) -> ComplexMatrix {
    spin_z().scale_real(params.omega0)
}

/// Free two-atom Hamiltonian `ω0 (S1^z + S2^z)`.
pub fn free_hamiltonian(params: &ModelParams) -> ComplexMatrix {
    let sz = spin_z();
    (&on_atom(&sz, 0) + &on_atom(&sz, 1)).scale_real(params.omega0)
}

/// Excitation-number operator `n1 + n2` (`n = S^+ S^-`).
pub fn excitation_number() -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&[2.0, 1.0, 1.0, 0.0])
}

/// Liouvillian of the pair: coherent part plus collective dissipator.
#[derive(Debug, Clone)]
pub struct Generator {
    pub params: ModelParams,
    pub couplings: Couplings,
    pub hamiltonian: ComplexMatrix,
    /// `γ_ij`, symmetric with `γ` on the diagonal.
    pub damping: [[f64; 2]; 2],
    /// `S_1^-`, `S_2^-` on the pair space.
    pub lowering: [ComplexMatrix; 2],
    /// Cached `Σ γ_ij S_i^+ S_j^-`.
    decay_operator: ComplexMatrix,
}

pub fn build_generator(params: &ModelParams) -> Result<Generator> {
    let couplings = couplings(params)?;
    let lowering = [on_atom(&spin_minus(), 0), on_atom(&spin_minus(), 1)];
    let raising = [lowering[0].adjoint(), lowering[1].adjoint()];

    let exchange = &(&raising[0] * &lowering[1]) + &(&raising[1] * &lowering[0]);
    let mut hamiltonian = exchange.scale_real(couplings.omega12);
    if !params.rotating_frame {
        hamiltonian = &hamiltonian + &free_hamiltonian(params);
    }

    let damping = [
        [params.gamma, couplings.gamma12],
        [couplings.gamma12, params.gamma],
    ];
    let mut decay_operator = ComplexMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            decay_operator =
                &decay_operator + &(&raising[i] * &lowering[j]).scale_real(damping[i][j]);
        }
    }

    Ok(Generator {
        params: *params,
        couplings,
        hamiltonian,
        damping,
        lowering,
        decay_operator,
    })
}

impl Generator {
    /// `L(ρ) = -i[H, ρ] - ½ Σ γ_ij (S_i^+ S_j^- ρ + ρ S_i^+ S_j^- - 2 S_i^- ρ S_j^+)`.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let h_rho = &self.hamiltonian * rho;
        let rho_h = rho * &self.hamiltonian;
        let commutator = (&h_rho - &rho_h).scale(-I);

        let anti = &(&self.decay_operator * rho) + &(rho * &self.decay_operator);
        let mut jumps = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            let left = &self.lowering[i] * rho;
            for j in 0..2 {
                let term = &left * &self.lowering[j].adjoint();
                jumps = &jumps + &term.scale_real(self.damping[i][j]);
            }
        }
        let dissipator = &jumps - &anti.scale_real(0.5);
        &commutator + &dissipator
    }

    /// The generator as a 16x16 matrix acting on row-major `vec(ρ)`.
    ///
    /// Uses `vec(A X B) = (A ⊗ B^T) vec(X)`.
    pub fn superoperator(&self) -> ComplexMatrix {
        let id = ComplexMatrix::identity(4);
        let h = &self.hamiltonian;
        let mut sup = (&kron(h, &id) - &kron(&id, &transpose(h))).scale(-I);

        let d = &self.decay_operator;
        let anti = &kron(d, &id) + &kron(&id, &transpose(d));
        sup = &sup - &anti.scale_real(0.5);
        for i in 0..2 {
            for j in 0..2 {
                let raise_j = self.lowering[j].adjoint();
                let jump = kron(&self.lowering[i], &transpose(&raise_j));
                sup = &sup + &jump.scale_real(self.damping[i][j]);
            }
        }
        sup
    }
}

fn transpose(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.cols(), a.rows(), |i, j| a[(j, i)])
}

/// Preparation of a single atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preparation {
    /// `√w |1> + √(1-w) |0>`.
    CoherentPure,
    /// `diag(w, 1-w)`.
    Diagonal,
}

/// Initial product state of charger and battery.
///
/// `c` is the charger's excited weight and `e` the battery's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub charger: Preparation,
    pub c: f64,
    pub battery: Preparation,
    pub e: f64,
}

impl InitialState {
    pub fn coherent(c: f64, e: f64) -> Self {
        Self {
            charger: Preparation::CoherentPure,
            c,
            battery: Preparation::CoherentPure,
            e,
        }
    }

    pub fn diagonal(c: f64, e: f64) -> Self {
        Self {
            charger: Preparation::Diagonal,
            c,
            battery: Preparation::Diagonal,
            e,
        }
    }

    /// Charger `|1>`, battery `|0>`.
    pub fn excited_ground() -> Self {
        Self::coherent(1.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("c", self.c), ("e", self.e)] {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::InvalidParameter {
                    name,
                    value: w,
                    reason: "excitation weight must lie in [0, 1]",
                });
            }
        }
        Ok(())
    }
}

/// Single-atom density matrix for the given preparation and excited weight.
pub fn qubit_state(prep: Preparation, weight: f64) -> ComplexMatrix {
    match prep {
        Preparation::CoherentPure => {
            let psi = [
                C64::new(weight.sqrt(), 0.0),
                C64::new((1.0 - weight).sqrt(), 0.0),
            ];
            ComplexMatrix::outer(&psi)
        }
        Preparation::Diagonal => ComplexMatrix::from_real_diag(&[weight, 1.0 - weight]),
    }
}

/// `ρ_ch ⊗ ρ_ba` in the `{|11>, |10>, |01>, |00>}` basis.
pub fn initial_state(setup: &InitialState) -> Result<ComplexMatrix> {
    setup.validate()?;
    Ok(kron(
        &qubit_state(setup.charger, setup.c),
        &qubit_state(setup.battery, setup.e),
    ))
}

/// Basis projector `|k><k|` of the pair space.
pub fn basis_projector(k: usize) -> ComplexMatrix {
    let mut psi = [ZERO; 4];
    psi[k] = ONE;
    ComplexMatrix::outer(&psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut impl Rng) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(4, 4, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        (&g + &g.adjoint()).scale_real(0.5)
    }

    #[test]
    fn small_separation_limit_is_superradiant() {
        let p = ModelParams::new(1e-3, 0.3);
        let c = couplings(&p).unwrap();
        assert!((c.gamma12 - 1.0).abs() < 1e-5, "{}", c.gamma12);
    }

    #[test]
    fn magic_angle_leaves_far_field_term_only() {
        let a = 1.0 / 3.0f64.sqrt();
        let p = ModelParams::new(0.11, a);
        let x = p.kr();
        let c = couplings(&p).unwrap();
        let far_gamma = 1.5 * (1.0 - a * a) * x.sin() / x;
        let far_omega = -0.75 * (1.0 - a * a) * x.cos() / x;
        assert!((c.gamma12 - far_gamma).abs() < 1e-14);
        assert!((c.omega12 - far_omega).abs() < 1e-14);
    }

    #[test]
    fn couplings_match_power_series_evaluation() {
        // Independent evaluation at r = 0.06λ, a = 0: sin(x)/x, cos(x)/x^2 - sin(x)/x^3,
        // etc. from their Taylor series summed smallest term first.
        let p = ModelParams::new(0.06, 0.0);
        let x = p.kr();
        let sin_terms: Vec<f64> = (0..30)
            .map(|k| {
                let n = 2 * k + 1;
                let fact: f64 = (1..=n).map(f64::from).product();
                (-1f64).powi(k as i32) * x.powi(n as i32) / fact
            })
            .collect();
        let cos_terms: Vec<f64> = (0..30)
            .map(|k| {
                let n = 2 * k;
                let fact: f64 = (1..=n).map(f64::from).product();
                (-1f64).powi(k as i32) * x.powi(n as i32) / fact
            })
            .collect();
        let sum_rev = |v: &[f64]| v.iter().rev().sum::<f64>();
        let (s, c) = (sum_rev(&sin_terms), sum_rev(&cos_terms));
        let gamma12 = 1.5 * (s / x + c / (x * x) - s / (x * x * x));
        let omega12 = 0.75 * (-c / x + s / (x * x) + c / (x * x * x));
        let got = couplings(&p).unwrap();
        assert!((got.gamma12 - gamma12).abs() < 1e-12);
        assert!((got.omega12 - omega12).abs() < 1e-12);
    }

    #[test]
    fn couplings_reject_bad_params() {
        assert!(couplings(&ModelParams::new(0.0, 0.0)).is_err());
        assert!(couplings(&ModelParams::new(0.1, 1.5)).is_err());
        assert!(couplings(&ModelParams::new(0.1, -0.1)).is_err());
        let p = ModelParams {
            gamma: -1.0,
            ..ModelParams::default()
        };
        assert!(couplings(&p).is_err());
    }

    #[test]
    fn damping_matrix_is_positive_semidefinite() {
        for i in 1..=200 {
            for j in 0..=10 {
                let p = ModelParams::new(f64::from(i) * 0.005, f64::from(j) / 10.0);
                let c = couplings(&p).unwrap();
                assert!(p.gamma - c.gamma12.abs() >= -1e-12, "{p:?} {c:?}");
            }
        }
    }

    #[test]
    fn ground_state_is_stationary() {
        for rotating_frame in [true, false] {
            let p = ModelParams {
                rotating_frame,
                ..ModelParams::new(0.04, 0.7)
            };
            let g = build_generator(&p).unwrap();
            let out = g.apply(&basis_projector(3));
            assert!(out.max_abs() < 1e-15);
        }
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = build_generator(&ModelParams::new(0.07, 0.4)).unwrap();
        for _ in 0..100 {
            let rho = random_hermitian(&mut rng);
            let out = g.apply(&rho);
            assert!(out.trace().norm() < 1e-12);
            assert!(out.hermitian_deviation() < 1e-12);
        }
    }

    #[test]
    fn generator_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let g = build_generator(&ModelParams::new(0.02, 0.9)).unwrap();
        for _ in 0..20 {
            let (a, b) = (random_hermitian(&mut rng), random_hermitian(&mut rng));
            let (x, y) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let lhs = g.apply(&(&a.scale_real(x) + &b.scale_real(y)));
            let rhs = &g.apply(&a).scale_real(x) + &g.apply(&b).scale_real(y);
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn superoperator_matches_direct_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for rotating_frame in [true, false] {
            let p = ModelParams {
                rotating_frame,
                omega0: 10.0,
                ..ModelParams::new(0.05, 0.3)
            };
            let g = build_generator(&p).unwrap();
            let sup = g.superoperator();
            for _ in 0..10 {
                let rho = random_hermitian(&mut rng);
                let direct = g.apply(&rho);
                let vectorized = sup.matvec(rho.as_slice());
                let vectorized = ComplexMatrix::new(4, 4, vectorized).unwrap();
                assert!(direct.max_abs_diff(&vectorized) < 1e-12);
            }
        }
    }

    #[test]
    fn doubly_excited_state_loses_energy_at_twice_gamma() {
        // d<n1 + n2>/dt = -Σ γ_ij <S_i^+ S_j^->, and only the diagonal terms survive on |11>.
        let p = ModelParams {
            rotating_frame: false,
            omega0: 3.0,
            gamma: 0.7,
            ..ModelParams::new(0.05, 0.2)
        };
        let g = build_generator(&p).unwrap();
        let rate = -free_hamiltonian(&p).trace_product(&g.apply(&basis_projector(0)));
        assert!((rate.re - 2.0 * p.gamma * p.omega0).abs() < 1e-12);
        assert!(rate.im.abs() < 1e-12);
    }

    #[test]
    fn initial_state_examples() {
        let rho = initial_state(&InitialState::excited_ground()).unwrap();
        assert!(rho.max_abs_diff(&basis_projector(1)) < 1e-15);

        let mixed = initial_state(&InitialState::diagonal(0.5, 0.5)).unwrap();
        assert!(mixed.max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-15);

        let rho = initial_state(&InitialState::coherent(0.5, 0.0)).unwrap();
        // charger coherence |10><00|
        assert!((rho[(1, 3)].norm() - 0.5).abs() < 1e-15);

        assert!(initial_state(&InitialState::coherent(1.2, 0.0)).is_err());
        assert!(initial_state(&InitialState::diagonal(0.2, -0.1)).is_err());
    }

    #[test]
    fn initial_states_are_valid_density_matrices() {
        use crate::numerics::{hermitian_eig, validate_density_matrix};
        for prep_c in [Preparation::CoherentPure, Preparation::Diagonal] {
            for prep_e in [Preparation::CoherentPure, Preparation::Diagonal] {
                for &(c, e) in &[(0.0, 0.0), (0.3, 0.9), (1.0, 0.5), (0.77, 0.12)] {
                    let setup = InitialState {
                        charger: prep_c,
                        c,
                        battery: prep_e,
                        e,
                    };
                    let rho = initial_state(&setup).unwrap();
                    validate_density_matrix(&rho, 4).unwrap();
                    let eig = hermitian_eig(&rho).unwrap();
                    assert!(eig.values[0] >= -1e-15);
                }
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn couplings_depend_on_a_squared_only(r in 0.001f64..0.5, a in 0.0f64..1.0) {
                // the sign of r̂ flips a; evaluate through the polynomial in a directly
                let c1 = couplings(&ModelParams::new(r, a)).unwrap();
                let a2 = a * a;
                let x = 2.0 * PI * r;
                let g = 1.5 * ((1.0 - a2) * x.sin() / x
                    + (1.0 - 3.0 * a2) * (x.cos() / (x * x) - x.sin() / x.powi(3)));
                prop_assert!((c1.gamma12 - g).abs() <= 1e-9 * g.abs().max(1.0));
                prop_assert!(1.0 - c1.gamma12.abs() >= -1e-12);
            }
        }
    }
}
