// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular")]
    Singular,

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("Hamiltonian has degenerate levels; the energy basis is not unique")]
    DegenerateHamiltonian,

    #[error("ergotropy {value:e} is negative beyond round-off")]
    NegativeErgotropy { value: f64 },

    #[error("step size underflow at t = {time:e}")]
    StepSizeUnderflow { time: f64 },

    #[error("time grid must be ascending and start at 0: {0}")]
    InvalidTimeGrid(String),

    #[error("root bracket invalid: {0}")]
    Bracket(String),

    #[error("blocked region is not a single interval (runs at {runs:?})")]
    NonIntervalBlockedRegion { runs: Vec<(f64, f64)> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of a structural modelling assumption rather than of the numerics.
    pub fn is_structural(&self) -> bool {
        matches!(self, Error::NonIntervalBlockedRegion { .. })
    }

    /// True for numerical failures (stiffness, root bracketing).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepSizeUnderflow { .. }
                | Error::Bracket(_)
                | Error::Singular
                | Error::NegativeErgotropy { .. }
        )
    }
}
