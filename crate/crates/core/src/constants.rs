use serde::{Deserialize, Serialize};

use crate::error::SurfaceError;

/// Reduced Planck constant and particle mass. Defaults to natural units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self, SurfaceError> {
        if !(hbar > 0.0 && hbar.is_finite()) || !(mass > 0.0 && mass.is_finite()) {
            return Err(SurfaceError::InvalidParameter(format!(
                "hbar and mass must be positive, got hbar={hbar}, mass={mass}"
            )));
        }
        Ok(Self { hbar, mass })
    }

    /// `ħ²/(2μ)`, the prefactor of the Laplace-Beltrami term.
    pub fn kinetic_prefactor(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}

/// Frozen sign conventions for the deformed angular-momentum algebra.
///
/// The geodesic invariants are reported raw as `t·S t` and `t·S (n × t)` with
/// `S = -P (∇n) P`. The bracket identity for `[G_i, G_j]` uses
/// `κ = KAPPA_SIGN · t·S t` and `τ = TAU_SIGN · t·S (n × t)`; the calibration
/// test on the cylinder re-derives these values.
pub mod conventions {
    pub const KAPPA_SIGN: f64 = -1.0;
    pub const TAU_SIGN: f64 = 1.0;
}
