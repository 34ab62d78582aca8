//! Physical constants (CODATA 2018) and unit conversions.
//!
//! Internal unit system: energies are frequencies in GHz (E/h), capacitances
//! in fF, currents in nA, phases in rad. All unit conversions happen here or
//! in [`crate::circuit::derive_energies`]; everything downstream is GHz/fF/nA/rad.

use serde::{Deserialize, Serialize};

/// Elementary charge e (C). Exact since the 2019 SI redefinition.
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;

/// Planck constant h (J s). Exact since the 2019 SI redefinition.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Superconducting flux quantum Phi_0 = h / 2e (Wb).
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELECTRON_CHARGE);

/// Fundamental constants bundled for explicit threading through
/// energy-scale derivations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// e (C)
    pub electron_charge: f64,
    /// h (J s)
    pub planck: f64,
    /// Phi_0 = h/2e (Wb)
    pub flux_quantum: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 values. `flux_quantum` is derived from `planck` and
    /// `electron_charge`, so the h/2e identity holds to machine precision.
    pub fn codata2018() -> Self {
        Self {
            electron_charge: ELECTRON_CHARGE,
            planck: PLANCK,
            flux_quantum: FLUX_QUANTUM,
        }
    }

    pub fn is_valid(&self) -> bool {
        let consistent =
            (self.flux_quantum - self.planck / (2.0 * self.electron_charge)).abs()
                <= 4.0 * f64::EPSILON * self.flux_quantum;
        self.electron_charge > 0.0 && self.planck > 0.0 && self.flux_quantum > 0.0 && consistent
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata2018()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_quantum_is_h_over_2e() {
        let c = PhysicalConstants::codata2018();
        assert!(c.is_valid());
        // Wb, known to ~1e-25 from the exact SI values.
        assert!((c.flux_quantum - 2.067_833_848e-15).abs() < 1e-24);
    }

    #[test]
    fn inconsistent_constants_rejected() {
        let mut c = PhysicalConstants::codata2018();
        c.flux_quantum *= 1.0 + 1e-9;
        assert!(!c.is_valid());
    }
}
