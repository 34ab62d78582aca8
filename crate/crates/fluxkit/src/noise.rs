//! Noise-sensitivity figures of merit: flux-noise slope and curvature of the
//! qubit frequency, matrix-element-based relaxation weights, and the
//! dispersion-based dephasing scale.
//!
//! The rate table entries are labeled figures of merit, not coherence-time
//! predictions: every proportionality constant is stated in the output, and
//! effects outside the lumped circuit model (surface participation, thermal
//! photons) are deliberately absent.

use crate::circuit::{derive_energies, CircuitDesign};
use crate::constants::PhysicalConstants;
use crate::dispersion::dispersion_empirical;
use crate::error::{FluxError, Result};
use crate::spectrum::{matrix_elements, solve_design, solve_design_on_grid, DesignEigensystem};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Noise environment parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// 1/f flux-noise amplitude at 1 Hz, in units of Phi_0.
    pub a_phi_phi0: f64,
    /// Dielectric loss tangent (dimensionless).
    pub loss_tangent: f64,
    /// Quasiparticle density x_qp (dimensionless).
    pub x_qp: f64,
    /// Temperature (K).
    pub temperature_k: f64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let ok = self.a_phi_phi0 >= 0.0
            && self.loss_tangent >= 0.0
            && self.x_qp >= 0.0
            && self.temperature_k > 0.0
            && self.a_phi_phi0.is_finite()
            && self.loss_tangent.is_finite()
            && self.x_qp.is_finite()
            && self.temperature_k.is_finite();
        if ok {
            Ok(())
        } else {
            Err(FluxError::InvalidDesign(
                "noise amplitudes must be non-negative and the temperature positive".into(),
            ))
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            a_phi_phi0: 1e-6,
            loss_tangent: 1e-6,
            x_qp: 1e-7,
            temperature_k: 0.02,
        }
    }
}

/// Working-point sensitivities of the qubit frequency and the transition
/// matrix elements entering the rate table.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityReport {
    /// d omega01 / d Phi_e (GHz per Phi_0).
    pub flux_slope_ghz_per_phi0: f64,
    /// d^2 omega01 / d Phi_e^2 (GHz per Phi_0^2).
    pub flux_curvature_ghz_per_phi02: f64,
    /// |<0| phi |1>| (rad).
    pub dipole_01: f64,
    /// |<0| n |1>| (dimensionless).
    pub charge_01: f64,
    /// |<0| sin(phi/2N) |1>| (array quasiparticle element).
    pub qp_array_01: f64,
    /// |<0| sin((phi+phi_e)/2) |1>| (principal quasiparticle element).
    pub qp_principal_01: f64,
    /// Charge-dispersion dephasing scale (GHz), empirical-fit estimate.
    pub dispersion_scale_ghz: f64,
    pub fd_step_rad: f64,
}

/// Central finite differences of omega01 over the external phase, with one
/// Richardson step, evaluated on a common converged grid so discretization
/// error cancels between bias points.
///
/// Returns (slope, curvature) in GHz/Phi_0 and GHz/Phi_0^2.
pub fn flux_sensitivity(design: &CircuitDesign, step_rad: f64) -> Result<(f64, f64)> {
    if !(1e-4..=1e-1).contains(&step_rad) {
        return Err(FluxError::InvalidDesign(format!(
            "finite-difference step must lie in [1e-4, 1e-1] rad, got {step_rad}"
        )));
    }
    let eig = solve_design(design, 2, crate::spectrum::DEFAULT_TOLERANCE_GHZ)?;
    let grid = eig.grid;

    let omega_at = |phie: f64| -> Result<f64> {
        let mut d = *design;
        d.external_phase_rad = phie.rem_euclid(TAU);
        let sol = solve_design_on_grid(&d, 2, &grid)?;
        Ok(sol.values[1] - sol.values[0])
    };

    let phie = design.external_phase_rad;
    let w0 = omega_at(phie)?;
    let fd = |h: f64| -> Result<(f64, f64)> {
        let wp = omega_at(phie + h)?;
        let wm = omega_at(phie - h)?;
        Ok(((wp - wm) / (2.0 * h), (wp - 2.0 * w0 + wm) / (h * h)))
    };
    let (s1, c1) = fd(step_rad)?;
    let (s2, c2) = fd(step_rad / 2.0)?;
    // Richardson: both estimators are O(h^2).
    let slope_rad = (4.0 * s2 - s1) / 3.0;
    let curv_rad = (4.0 * c2 - c1) / 3.0;

    // Phi_e = phi_e Phi_0 / 2 pi: d/dPhi_e = 2 pi d/dphi_e.
    Ok((slope_rad * TAU, curv_rad * TAU * TAU))
}

/// Assemble the sensitivity report at the design's working point.
pub fn sensitivity_report(design: &CircuitDesign, fd_step_rad: f64) -> Result<SensitivityReport> {
    let (slope, curvature) = flux_sensitivity(design, fd_step_rad)?;
    let eig: DesignEigensystem = solve_design(design, 2, crate::spectrum::DEFAULT_TOLERANCE_GHZ)?;
    let els = matrix_elements(design, &eig, &[(0, 1)])?;
    let energies = derive_energies(design, &PhysicalConstants::codata2018())?;
    Ok(SensitivityReport {
        flux_slope_ghz_per_phi0: slope,
        flux_curvature_ghz_per_phi02: curvature,
        dipole_01: els.dipole[0].norm(),
        charge_01: els.charge[0].norm(),
        qp_array_01: els.qp_array[0].norm(),
        qp_principal_01: els.qp_principal[0].norm(),
        dispersion_scale_ghz: dispersion_empirical(&energies, design.array_size),
        fd_step_rad,
    })
}

/// One labeled contribution to the rate table.
#[derive(Debug, Clone, Serialize)]
pub struct RateEntry {
    pub channel: String,
    /// The formula evaluated, with every constant written out.
    pub formula: String,
    pub value_ghz: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateTable {
    pub entries: Vec<RateEntry>,
    pub complete: bool,
}

impl RateTable {
    pub fn value(&self, channel: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.channel == channel)
            .map(|e| e.value_ghz)
    }
}

/// Golden-rule style figures of merit combining the noise model with the
/// sensitivity report. All prefactors are explicit and unity unless stated.
pub fn estimate_rates(
    design: &CircuitDesign,
    noise: &NoiseModel,
    report: &SensitivityReport,
) -> Result<RateTable> {
    noise.validate()?;
    design.validate()?;
    let spectrum = crate::spectrum::compute_spectrum(
        design,
        3,
        crate::spectrum::DEFAULT_TOLERANCE_GHZ,
    )?;
    let w01 = spectrum.qubit_frequency_ghz;
    let n = design.array_size as f64;

    // 1/f echo-style dephasing: sqrt(ln 2) A_Phi |dw/dPhi|.
    let flux1 = (2.0f64.ln()).sqrt() * noise.a_phi_phi0 * report.flux_slope_ghz_per_phi0.abs();
    // Second order: A_Phi^2 |d2w/dPhi2|.
    let flux2 = noise.a_phi_phi0.powi(2) * report.flux_curvature_ghz_per_phi02.abs();
    // Dielectric relaxation weight: tan(delta) w01 |<0|n|1>|^2 coth(h w01 / 2 kB T).
    let h_over_kb = crate::constants::PLANCK / 1.380_649e-23;
    let x = h_over_kb * w01 * 1e9 / (2.0 * noise.temperature_k);
    let coth = if x > 20.0 { 1.0 } else { 1.0 / x.tanh() };
    let dielectric = noise.loss_tangent * w01 * report.charge_01.powi(2) * coth;
    // Quasiparticle tunneling across the array: N junctions, each with the
    // 1/N matrix element: N x_qp |<0|sin(phi/2N)|1>|^2 sqrt(w01).
    let qp = n * noise.x_qp * report.qp_array_01.powi(2) * w01.sqrt();
    // Charge-noise dephasing scale is the dispersion amplitude itself.
    let disp = report.dispersion_scale_ghz;

    let entries = vec![
        RateEntry {
            channel: "flux_dephasing_1st".into(),
            formula: "sqrt(ln 2) * A_Phi[Phi_0] * |dw01/dPhi_e|[GHz/Phi_0]".into(),
            value_ghz: flux1,
        },
        RateEntry {
            channel: "flux_dephasing_2nd".into(),
            formula: "A_Phi^2[Phi_0^2] * |d2w01/dPhi_e2|[GHz/Phi_0^2]".into(),
            value_ghz: flux2,
        },
        RateEntry {
            channel: "dielectric_relaxation".into(),
            formula: "tan_delta * w01[GHz] * |<0|n|1>|^2 * coth(h w01 / 2 kB T)".into(),
            value_ghz: dielectric,
        },
        RateEntry {
            channel: "quasiparticle_relaxation".into(),
            formula: "N * x_qp * |<0|sin(phi/2N)|1>|^2 * sqrt(w01[GHz])".into(),
            value_ghz: qp,
        },
        RateEntry {
            channel: "charge_dispersion_scale".into(),
            formula: "sqrt(16 E_J E_C) * exp(-sqrt(N^2.5 E_J / 7 E_C)) (empirical fit)".into(),
            value_ghz: disp,
        },
    ];
    Ok(RateTable {
        entries,
        complete: report.dispersion_scale_ghz.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarton(n: usize) -> CircuitDesign {
        CircuitDesign::at_sweet_spot(40.0, 20.0, 1.0, n, 1.0).unwrap()
    }

    #[test]
    fn sweet_spot_slope_vanishes() {
        let (slope, curvature) = flux_sensitivity(&quarton(8), 1e-3).unwrap();
        assert!(
            slope.abs() < 1e-3,
            "first-order flux sensitivity at the sweet spot: {slope} GHz/Phi_0"
        );
        // Frequency maximum at the sweet spot for quarton designs.
        assert!(curvature < 0.0, "curvature {curvature} should be negative");
        assert!(curvature.is_finite());
    }

    #[test]
    fn slope_is_odd_about_sweet_spot() {
        let mut plus = quarton(8);
        plus.external_phase_rad = PI + 0.15;
        let mut minus = quarton(8);
        minus.external_phase_rad = PI - 0.15;
        let (sp, _) = flux_sensitivity(&plus, 1e-3).unwrap();
        let (sm, _) = flux_sensitivity(&minus, 1e-3).unwrap();
        assert!(
            (sp + sm).abs() < 2e-2 * sp.abs().max(1e-6),
            "slopes not antisymmetric: {sp} vs {sm}"
        );
        // Away from the sweet spot the slope is orders of magnitude larger.
        assert!(sp.abs() > 1e3 * flux_sensitivity(&quarton(8), 1e-3).unwrap().0.abs());
    }

    #[test]
    fn fd_step_bounds_enforced() {
        assert!(flux_sensitivity(&quarton(8), 1e-5).is_err());
        assert!(flux_sensitivity(&quarton(8), 0.5).is_err());
    }

    #[test]
    fn zero_flux_noise_means_zero_flux_dephasing() {
        let d = quarton(8);
        let report = sensitivity_report(&d, 1e-3).unwrap();
        let noise = NoiseModel {
            a_phi_phi0: 0.0,
            ..NoiseModel::default()
        };
        let table = estimate_rates(&d, &noise, &report).unwrap();
        assert_eq!(table.value("flux_dephasing_1st"), Some(0.0));
        assert_eq!(table.value("flux_dephasing_2nd"), Some(0.0));
        assert!(table.complete);
    }

    #[test]
    fn rates_monotone_in_noise_amplitudes() {
        let d = quarton(8);
        let report = sensitivity_report(&d, 1e-3).unwrap();
        let base = NoiseModel::default();
        let doubled = NoiseModel {
            a_phi_phi0: 2.0 * base.a_phi_phi0,
            loss_tangent: 2.0 * base.loss_tangent,
            x_qp: 2.0 * base.x_qp,
            temperature_k: base.temperature_k,
        };
        let t1 = estimate_rates(&d, &base, &report).unwrap();
        let t2 = estimate_rates(&d, &doubled, &report).unwrap();
        for (a, b) in t1.entries.iter().zip(t2.entries.iter()) {
            assert!(b.value_ghz >= a.value_ghz, "{} decreased", a.channel);
        }
    }

    #[test]
    fn qp_rate_drops_by_half_when_n_doubles() {
        // The element scales as 1/N, the per-junction rate as 1/N^2, and the
        // junction count as N: the net rate falls by 2x.
        let noise = NoiseModel::default();
        let r8 = sensitivity_report(&quarton(8), 1e-3).unwrap();
        let r16 = sensitivity_report(&quarton(16), 1e-3).unwrap();
        let t8 = estimate_rates(&quarton(8), &noise, &r8).unwrap();
        let t16 = estimate_rates(&quarton(16), &noise, &r16).unwrap();
        let ratio = t16.value("quasiparticle_relaxation").unwrap()
            / t8.value("quasiparticle_relaxation").unwrap();
        assert!(
            (ratio - 0.5).abs() < 0.15,
            "expected ~2x quasiparticle-rate reduction, got ratio {ratio}"
        );
    }

    #[test]
    fn dispersion_scale_below_khz_from_n6() {
        for n in [6usize, 8, 12, 100] {
            let d = quarton(n);
            let report = sensitivity_report(&d, 1e-3).unwrap();
            assert!(
                report.dispersion_scale_ghz < 1e-6,
                "N = {n}: dispersion {} GHz above the kHz level",
                report.dispersion_scale_ghz
            );
        }
    }

    #[test]
    fn noise_model_validation() {
        let bad = NoiseModel {
            temperature_k: 0.0,
            ..NoiseModel::default()
        };
        assert!(bad.validate().is_err());
    }
}
