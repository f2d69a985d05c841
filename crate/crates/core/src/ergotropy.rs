// SPDX-License-Identifier: Apache-2.0

//! Work extraction: ergotropy, passive states and the incoherent/coherent split.
//!
//! With `ρ = Σ r_j |r_j><r_j|` (`r_j` descending) and `H = Σ ε_k |ε_k><ε_k|`
//! (`ε_k` ascending), the ergotropy is `Σ_k ε_k (ρ_kk - r_k)` where `ρ_kk` are
//! the populations in the energy basis. The incoherent part replaces `r_k` by
//! the populations sorted in decreasing order; the coherent part is the rest.

use crate::error::{Error, Result};
use crate::model::{local_hamiltonian, ModelParams};
use crate::numerics::{hermitian_eig, partial_trace, ComplexMatrix, HermitianEigen, Subsystem};

/// Negative results down to this value are treated as round-off and clamped to 0.
pub const CLAMP_WINDOW: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ErgotropyReport {
    pub total: f64,
    pub incoherent: f64,
    pub coherent: f64,
    pub passive_state: ComplexMatrix,
    /// `tr(ρ H)`.
    pub energy: f64,
}

struct Spectra {
    /// Energy eigenbasis of `H`.
    energy: HermitianEigen,
    /// Populations of `ρ` in that basis.
    populations: Vec<f64>,
    /// Eigenvalues of `ρ`, descending.
    occupations: Vec<f64>,
}

fn spectra(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<Spectra> {
    if !rho.is_square() || !h.is_square() || rho.rows() != h.rows() {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, Hamiltonian is {}x{}",
            rho.rows(),
            rho.cols(),
            h.rows(),
            h.cols()
        )));
    }
    let energy = hermitian_eig(h)?;
    let w = &energy.vectors;
    let in_energy_basis = &(&w.adjoint() * rho) * w;
    let populations = in_energy_basis.real_diagonal();
    let mut occupations = hermitian_eig(rho)?.values;
    occupations.reverse();
    Ok(Spectra {
        energy,
        populations,
        occupations,
    })
}

fn clamp(value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -CLAMP_WINDOW {
        Ok(0.0)
    } else {
        Err(Error::NegativeErgotropy { value })
    }
}

fn weighted(levels: &[f64], a: &[f64], b: &[f64]) -> f64 {
    levels
        .iter()
        .zip(a.iter().zip(b))
        .map(|(e, (x, y))| e * (x - y))
        .sum()
}

fn descending(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Maximal work extractable from `rho` by a cyclic unitary.
pub fn ergotropy(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<f64> {
    let s = spectra(rho, h)?;
    clamp(weighted(&s.energy.values, &s.populations, &s.occupations))
}

/// `Σ_j r_j |ε_j><ε_j|`: the same spectrum with populations nonincreasing in energy.
pub fn passive_state(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let s = spectra(rho, h)?;
    Ok(passive_from(&s))
}

fn passive_from(s: &Spectra) -> ComplexMatrix {
    let w = &s.energy.vectors;
    &(w * &ComplexMatrix::from_real_diag(&s.occupations)) * &w.adjoint()
}

/// Incoherent and coherent components, in that order.
pub fn split(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<(f64, f64)> {
    let s = spectra(rho, h)?;
    split_from(&s)
}

fn split_from(s: &Spectra) -> Result<(f64, f64)> {
    let rearranged = descending(&s.populations);
    let incoherent = clamp(weighted(&s.energy.values, &s.populations, &rearranged))?;
    let coherent = clamp(weighted(&s.energy.values, &rearranged, &s.occupations))?;
    Ok((incoherent, coherent))
}

/// Full analysis of `rho` with respect to `h`.
pub fn report(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<ErgotropyReport> {
    let s = spectra(rho, h)?;
    let total = clamp(weighted(&s.energy.values, &s.populations, &s.occupations))?;
    let (incoherent, coherent) = split_from(&s)?;
    Ok(ErgotropyReport {
        total,
        incoherent,
        coherent,
        passive_state: passive_from(&s),
        energy: rho.trace_product(h).re,
    })
}

/// Removes all coherences in the energy eigenbasis of `h`.
///
/// Rejects Hamiltonians with degenerate levels, whose eigenbasis is not unique.
pub fn dephase(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let s = spectra(rho, h)?;
    let levels = &s.energy.values;
    let scale = levels.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    if levels.windows(2).any(|w| w[1] - w[0] <= 1e-12 * scale) {
        return Err(Error::DegenerateHamiltonian);
    }
    let w = &s.energy.vectors;
    Ok(&(w * &ComplexMatrix::from_real_diag(&s.populations)) * &w.adjoint())
}

/// Closed-form ergotropy of a qubit with energy gap `omega0` (excited state first).
///
/// `(ω0/2) (z + sqrt(z² + 4|ρ_10|²))` with `z = ρ_11 - ρ_00`, clamped at 0.
pub fn qubit_ergotropy(excited: f64, ground: f64, coherence_abs: f64, omega0: f64) -> f64 {
    let z = excited - ground;
    let value = 0.5 * omega0 * (z + (z * z + 4.0 * coherence_abs * coherence_abs).sqrt());
    value.max(0.0)
}

/// Energies and ergotropies of the two atoms of a pair state.
///
/// Energies are measured from each atom's ground level, so they lie in `[0, ω0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalObservables {
    pub energy_ch: f64,
    pub energy_ba: f64,
    pub erg_ch: f64,
    pub erg_ba: f64,
}

pub fn local_observables(rho: &ComplexMatrix, params: &ModelParams) -> Result<LocalObservables> {
    let h = local_hamiltonian(params);
    let ground = 0.5 * params.omega0;
    let ch = partial_trace(rho, Subsystem::Charger)?;
    let ba = partial_trace(rho, Subsystem::Battery)?;
    Ok(LocalObservables {
        energy_ch: ch.trace_product(&h).re + ground,
        energy_ba: ba.trace_product(&h).re + ground,
        erg_ch: ergotropy(&ch, &h)?,
        erg_ba: ergotropy(&ba, &h)?,
    })
}
