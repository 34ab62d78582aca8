//! Circuit parameters, derived energy scales, the fourth-order potential
//! expansion, and the operating-regime classifier.
//!
//! The circuit is a principal Josephson junction (critical current `I_c`,
//! capacitance `C_J`) shunted by a capacitor `C_sh` and by an array of `N`
//! junctions, each `gamma` times the principal junction's size. The external
//! flux enters as the loop phase `phi_e`; the flux sweet spot is `phi_e = pi`.

use crate::constants::PhysicalConstants;
use crate::error::{FluxError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// One qubit design: the four-plus parameters defining the circuit.
///
/// Units: nA, fF, rad. `external_phase` is normalized into `[0, 2*pi)` at
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDesign {
    /// Principal-junction critical current I_c (nA), > 0.
    pub critical_current_na: f64,
    /// Shunt capacitance C_sh (fF), >= 0.
    pub shunt_capacitance_ff: f64,
    /// Principal-junction capacitance C_J (fF), > 0.
    pub junction_capacitance_ff: f64,
    /// Lumped island-to-ground correction C_g (fF), >= 0.
    pub ground_capacitance_ff: f64,
    /// Number of array junctions N, >= 1.
    pub array_size: usize,
    /// Array-to-principal junction size ratio gamma, > 0.
    pub size_ratio: f64,
    /// External loop phase phi_e (rad), stored in [0, 2*pi).
    pub external_phase_rad: f64,
}

impl CircuitDesign {
    pub fn new(
        critical_current_na: f64,
        shunt_capacitance_ff: f64,
        junction_capacitance_ff: f64,
        ground_capacitance_ff: f64,
        array_size: usize,
        size_ratio: f64,
        external_phase_rad: f64,
    ) -> Result<Self> {
        let d = Self {
            critical_current_na,
            shunt_capacitance_ff,
            junction_capacitance_ff,
            ground_capacitance_ff,
            array_size,
            size_ratio,
            external_phase_rad: external_phase_rad.rem_euclid(TAU),
        };
        d.validate()?;
        Ok(d)
    }

    /// Convenience constructor used throughout sweeps: fixes `gamma` from a
    /// target `gamma/N`, biases at the sweet spot, C_g = 0.
    pub fn at_sweet_spot(
        critical_current_na: f64,
        shunt_capacitance_ff: f64,
        junction_capacitance_ff: f64,
        array_size: usize,
        gamma_over_n: f64,
    ) -> Result<Self> {
        Self::new(
            critical_current_na,
            shunt_capacitance_ff,
            junction_capacitance_ff,
            0.0,
            array_size,
            gamma_over_n * array_size as f64,
            PI,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FluxError::InvalidDesign(msg));
        if !self.critical_current_na.is_finite() || self.critical_current_na <= 0.0 {
            return bad(format!("critical current must be > 0 nA, got {}", self.critical_current_na));
        }
        if !self.shunt_capacitance_ff.is_finite() || self.shunt_capacitance_ff < 0.0 {
            return bad(format!("shunt capacitance must be >= 0 fF, got {}", self.shunt_capacitance_ff));
        }
        if !self.junction_capacitance_ff.is_finite() || self.junction_capacitance_ff <= 0.0 {
            return bad(format!("junction capacitance must be > 0 fF, got {}", self.junction_capacitance_ff));
        }
        if !self.ground_capacitance_ff.is_finite() || self.ground_capacitance_ff < 0.0 {
            return bad(format!("ground capacitance must be >= 0 fF, got {}", self.ground_capacitance_ff));
        }
        if self.array_size < 1 {
            return bad("array size N must be >= 1".into());
        }
        if !self.size_ratio.is_finite() || self.size_ratio <= 0.0 {
            return bad(format!("size ratio gamma must be > 0, got {}", self.size_ratio));
        }
        if !self.external_phase_rad.is_finite() {
            return bad("external phase must be finite".into());
        }
        Ok(())
    }

    /// gamma / N, the knob that sets the potential shape.
    pub fn gamma_over_n(&self) -> f64 {
        self.size_ratio / self.array_size as f64
    }

    /// True when the design is biased at the flux sweet spot phi_e = pi.
    pub fn at_flux_sweet_spot(&self) -> bool {
        (self.external_phase_rad - PI).abs() < 1e-12
    }
}

/// Derived energy scales in spectroscopic units (E/h, GHz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyScales {
    /// E_J/h of the principal junction (GHz).
    pub josephson_energy_ghz: f64,
    /// E_C/h from the total capacitance (GHz).
    pub charging_energy_ghz: f64,
    /// C_Sigma = C_sh + C_J + gamma*C_J/N + C_g (fF).
    pub total_capacitance_ff: f64,
    /// E_J / E_C.
    pub ej_ec_ratio: f64,
}

/// E_J = I_c * Phi_0 / 2pi and E_C = e^2 / 2 C_Sigma, both as frequencies.
///
/// The total capacitance across the principal junction sums the shunt, the
/// junction itself, the series-reduced array (gamma C_J / N), and the lumped
/// ground correction.
pub fn derive_energies(design: &CircuitDesign, constants: &PhysicalConstants) -> Result<EnergyScales> {
    design.validate()?;
    let n = design.array_size as f64;
    let c_sigma_ff = design.shunt_capacitance_ff
        + design.junction_capacitance_ff
        + design.size_ratio * design.junction_capacitance_ff / n
        + design.ground_capacitance_ff;
    if !c_sigma_ff.is_finite() || c_sigma_ff <= 0.0 {
        return Err(FluxError::InvalidDesign(format!(
            "total capacitance C_Sigma = {c_sigma_ff} fF is not positive and finite"
        )));
    }

    // I_c [nA] * Phi_0 / (2 pi h), expressed in GHz: 1 nA = 1e-9 A, 1 GHz = 1e9 Hz.
    let ej_hz = design.critical_current_na * 1e-9 * constants.flux_quantum / (TAU * constants.planck);
    // e^2 / (2 C_Sigma h), C_Sigma in F.
    let ec_hz = constants.electron_charge * constants.electron_charge
        / (2.0 * c_sigma_ff * 1e-15 * constants.planck);

    let josephson_energy_ghz = ej_hz * 1e-9;
    let charging_energy_ghz = ec_hz * 1e-9;
    Ok(EnergyScales {
        josephson_energy_ghz,
        charging_energy_ghz,
        total_capacitance_ff: c_sigma_ff,
        ej_ec_ratio: josephson_energy_ghz / charging_energy_ghz,
    })
}

/// Coefficients of the fourth-order sweet-spot expansion of the potential:
/// `V(phi) ~ c2 phi^2 + c4 phi^4` with `c2 = E_J (gamma/N - 1)/2` and
/// `c4 = E_J / 24`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionCoefficients {
    pub c2_ghz: f64,
    pub c4_ghz: f64,
    /// Set when the expansion's N^3 >> gamma assumption is marginal.
    pub validity_warning: Option<String>,
}

/// Quadratic and quartic expansion coefficients at the sweet spot.
///
/// Errors unless the design is biased at phi_e = pi; warns when
/// N^3 < 50 gamma, where the slow-envelope approximation degrades.
pub fn expansion_coefficients(
    design: &CircuitDesign,
    energies: &EnergyScales,
) -> Result<ExpansionCoefficients> {
    if !design.at_flux_sweet_spot() {
        return Err(FluxError::WrongWorkingPoint {
            phie_rad: design.external_phase_rad,
        });
    }
    let n = design.array_size as f64;
    let ej = energies.josephson_energy_ghz;
    let validity_warning = if n * n * n < 50.0 * design.size_ratio {
        Some(format!(
            "expansion assumes N^3 >> gamma; here N^3 = {} and gamma = {}",
            n * n * n,
            design.size_ratio
        ))
    } else {
        None
    };
    Ok(ExpansionCoefficients {
        c2_ghz: ej * (design.gamma_over_n() - 1.0) / 2.0,
        c4_ghz: ej / 24.0,
        validity_warning,
    })
}

/// Operating regime set by gamma and gamma/N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeTag {
    /// Double-well potential, 1 < gamma < N.
    Fluxon,
    /// Single well with a leading quadratic term, gamma > N.
    Plasmon,
    /// Quadratic term cancels, gamma/N ~ 1; quartic potential.
    Quarton,
    /// gamma <= 1: the array junction is not larger than the principal one;
    /// outside the taxonomy above, though the Hamiltonian stays well defined.
    SingleJunctionDominated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regime {
    pub tag: RegimeTag,
    pub quarton_tolerance: f64,
}

/// Default half-width of the quarton band on |gamma/N - 1|.
pub const DEFAULT_QUARTON_TOLERANCE: f64 = 0.05;

/// Classify a design into fluxon / plasmon / quarton, or
/// single-junction-dominated when gamma <= 1.
///
/// `gamma <= 1` takes precedence over the quarton band (the two can overlap
/// only at N = 1).
pub fn classify_regime(design: &CircuitDesign, tolerance: f64) -> Result<Regime> {
    if !(tolerance > 0.0 && tolerance < 0.5) {
        return Err(FluxError::InvalidDesign(format!(
            "quarton tolerance must lie in (0, 0.5), got {tolerance}"
        )));
    }
    design.validate()?;
    let ratio = design.gamma_over_n();
    let tag = if design.size_ratio <= 1.0 {
        RegimeTag::SingleJunctionDominated
    } else if (ratio - 1.0).abs() <= tolerance {
        RegimeTag::Quarton
    } else if ratio < 1.0 {
        RegimeTag::Fluxon
    } else {
        RegimeTag::Plasmon
    };
    Ok(Regime {
        tag,
        quarton_tolerance: tolerance,
    })
}
