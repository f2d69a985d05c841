// SPDX-License-Identifier: Apache-2.0

//! Two-atom quantum battery charged through the shared vacuum field.
//!
//! The charger and the battery are two-level atoms a distance `r` apart that
//! decay collectively into the same electromagnetic vacuum. The dipole-dipole
//! exchange `Ω12` moves energy between them while the cross-damping `γ12`
//! shapes how much of it survives as ergotropy.
//!
//! Time is measured in units of `1/γ`, distances in units of the transition
//! wavelength and energies in units of `ω0` unless stated otherwise.

pub mod dynamics;
pub mod ergotropy;
pub mod error;
pub mod merit;
pub mod model;
pub mod numerics;

pub use dynamics::{evolve, evolve_expm, evolve_rk, simulate, Method, Trajectory};
pub use error::{Error, Result};
pub use merit::{analyze, AnalysisOptions, MeritReport};
pub use model::{build_generator, couplings, Generator, InitialState, ModelParams, Preparation};
