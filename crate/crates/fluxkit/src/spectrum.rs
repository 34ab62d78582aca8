//! Qubit spectra from the one-dimensional circuit Hamiltonian
//! `H = -4 E_C d^2/dphi^2 + E_J(-gamma N cos(phi/N) - cos(phi + phi_e))`,
//! the quartic-regime closed form, and transition matrix elements.

use crate::circuit::{derive_energies, CircuitDesign, EnergyScales};
use crate::constants::PhysicalConstants;
use crate::error::{FluxError, Result};
use crate::spectral::converge::{converge, ConvergeSettings, ConvergenceRecord};
use crate::spectral::{build_operator, solve_lowest, EigenSolution, GridSpec, VectorSet};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Default number of levels tracked by spectrum solves.
pub const DEFAULT_LEVELS: usize = 5;
/// Default convergence tolerance on each level (GHz).
pub const DEFAULT_TOLERANCE_GHZ: f64 = 1e-4;

/// Lowest levels plus the derived transition quantities.
///
/// Anharmonicity is reported signed, `A = omega_12 - omega_01`; the flux
/// regime keeps it positive, transmon-like devices would make it negative.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    /// E_0..E_k (GHz), ascending, in the solver's absolute reference.
    pub levels_ghz: Vec<f64>,
    /// omega_01 = E_1 - E_0 (GHz).
    pub qubit_frequency_ghz: f64,
    /// omega_12 = E_2 - E_1 (GHz).
    pub second_transition_ghz: f64,
    /// A = omega_12 - omega_01 (GHz).
    pub anharmonicity_ghz: f64,
    /// Refinement history; absent for closed-form spectra.
    pub grid_meta: Option<ConvergenceRecord>,
}

impl Spectrum {
    fn from_levels(levels_ghz: Vec<f64>, grid_meta: Option<ConvergenceRecord>) -> Self {
        let omega01 = levels_ghz[1] - levels_ghz[0];
        let omega12 = levels_ghz[2] - levels_ghz[1];
        Self {
            qubit_frequency_ghz: omega01,
            second_transition_ghz: omega12,
            anharmonicity_ghz: omega12 - omega01,
            levels_ghz,
            grid_meta,
        }
    }

    pub fn anharmonicity_ratio(&self) -> f64 {
        self.anharmonicity_ghz / self.qubit_frequency_ghz
    }
}

/// The 1D potential V(phi) = E_J(-gamma N cos(phi/N) - cos(phi + phi_e)), GHz.
pub fn gfq_potential(design: &CircuitDesign, energies: &EnergyScales) -> impl Fn(f64) -> f64 + Sync {
    let ej = energies.josephson_energy_ghz;
    let gamma = design.size_ratio;
    let n = design.array_size as f64;
    let phie = design.external_phase_rad;
    move |phi: f64| ej * (-gamma * n * (phi / n).cos() - (phi + phie).cos())
}

/// A converged eigensystem of the 1D Hamiltonian, with the grid it lives on.
#[derive(Debug, Clone)]
pub struct DesignEigensystem {
    pub energies: EnergyScales,
    pub solution: EigenSolution,
    pub grid: GridSpec,
    pub record: ConvergenceRecord,
}

fn initial_grid(design: &CircuitDesign, energies: &EnergyScales) -> Result<GridSpec> {
    let n = design.array_size as f64;
    let r = design.gamma_over_n();
    // Quartic zero-point width; fluxon well positions add to it. The box may
    // never cross the array-envelope ridge at pi N, where replica wells of
    // the 2 pi N-periodic potential begin.
    let sigma = (96.0 * energies.charging_energy_ghz / energies.josephson_energy_ghz).powf(1.0 / 6.0);
    let wells = (6.0 * (1.0 - r).max(0.0)).sqrt();
    let half_width = (6.0 * (sigma + wells)).clamp((PI * n).min(8.0), PI * n);
    let points = ((2.0 * half_width / 0.1).ceil() as usize).max(257) | 1;
    GridSpec::dirichlet(half_width, points)
}

/// Converge the lowest `k` eigenpairs of the design's 1D Hamiltonian.
pub fn solve_design(design: &CircuitDesign, k: usize, tolerance_ghz: f64) -> Result<DesignEigensystem> {
    let energies = derive_energies(design, &PhysicalConstants::codata2018())?;
    let potential = gfq_potential(design, &energies);
    let mut settings = ConvergeSettings::new(k, tolerance_ghz, initial_grid(design, &energies)?);
    settings.max_half_width = PI * design.array_size as f64;
    let (solution, record) = converge(&potential, 4.0 * energies.charging_energy_ghz, &settings)?;
    let grid = record.final_grid(crate::spectral::Boundary::Dirichlet);
    Ok(DesignEigensystem {
        energies,
        solution,
        grid,
        record,
    })
}

/// Solve on a fixed grid (no refinement). Used by finite-difference
/// sensitivity estimates so discretization error cancels between bias points.
pub fn solve_design_on_grid(design: &CircuitDesign, k: usize, grid: &GridSpec) -> Result<EigenSolution> {
    let energies = derive_energies(design, &PhysicalConstants::codata2018())?;
    let potential = gfq_potential(design, &energies);
    let op = build_operator(&potential, 4.0 * energies.charging_energy_ghz, grid)?;
    solve_lowest(&op, k)
}

/// Full numerical spectrum of the design's 1D Hamiltonian.
///
/// Builds the potential at the design's external phase, converges the `k`
/// lowest levels to `tolerance_ghz`, and reports the transition quantities.
pub fn compute_spectrum(design: &CircuitDesign, k: usize, tolerance_ghz: f64) -> Result<Spectrum> {
    if k < 3 {
        return Err(FluxError::InvalidDesign(format!(
            "spectrum needs at least 3 levels for omega_12, got k = {k}"
        )));
    }
    let eig = solve_design(design, k, tolerance_ghz)?;
    Ok(Spectrum::from_levels(eig.solution.values.clone(), Some(eig.record)))
}

/// Eigenvalues of the dimensionless quartic operator -d^2/dx^2 + x^4,
/// from the substitution phi = (96 E_C / E_J)^(1/6) x at gamma/N = 1.
pub fn solve_quartic_dimensionless(k: usize, tolerance: f64) -> Result<Vec<f64>> {
    let settings = ConvergeSettings::new(k, tolerance, GridSpec::dirichlet(6.0, 257)?);
    let (solution, _) = converge(&|x: f64| x.powi(4), 1.0, &settings)?;
    Ok(solution.values)
}

/// Cached lambda_n of -d^2/dx^2 + x^4 (eight levels at 1e-6 tolerance).
pub fn quartic_lambdas() -> &'static [f64] {
    static CACHE: OnceLock<Vec<f64>> = OnceLock::new();
    CACHE.get_or_init(|| {
        solve_quartic_dimensionless(8, 1e-6).expect("dimensionless quartic solve cannot fail")
    })
}

/// Closed-form quarton spectrum E_n = lambda_n (2/3 E_J E_C^2)^(1/3).
///
/// Exact for gamma/N = 1 at the sweet spot in the N^3 >> gamma limit; the
/// levels are referenced to the potential at phi = 0.
pub fn quartic_spectrum(energies: &EnergyScales, k: usize) -> Result<Spectrum> {
    if k < 3 {
        return Err(FluxError::InvalidDesign(format!(
            "spectrum needs at least 3 levels for omega_12, got k = {k}"
        )));
    }
    let lambdas = quartic_lambdas();
    let levels = if k <= lambdas.len() {
        lambdas[..k].to_vec()
    } else {
        solve_quartic_dimensionless(k, 1e-6)?
    };
    let unit = quartic_energy_unit(energies);
    Ok(Spectrum::from_levels(
        levels.iter().map(|l| l * unit).collect(),
        None,
    ))
}

/// (2/3 E_J E_C^2)^(1/3), the quarton energy unit (GHz).
pub fn quartic_energy_unit(energies: &EnergyScales) -> f64 {
    (2.0 / 3.0 * energies.josephson_energy_ghz * energies.charging_energy_ghz.powi(2)).cbrt()
}

/// Transition matrix elements between selected level pairs.
///
/// `charge` uses n = -i d/dphi via centered differences; `qp_array` and
/// `qp_principal` are the quasiparticle-tunneling operators across one array
/// junction and the principal junction.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixElements {
    pub pairs: Vec<(usize, usize)>,
    /// <i| phi |j> (rad)
    pub dipole: Vec<Complex64>,
    /// <i| -i d/dphi |j> (dimensionless)
    pub charge: Vec<Complex64>,
    /// <i| sin(phi / 2N) |j>
    pub qp_array: Vec<Complex64>,
    /// <i| sin((phi + phi_e) / 2) |j>
    pub qp_principal: Vec<Complex64>,
}

impl MatrixElements {
    pub fn get(&self, i: usize, j: usize) -> Option<(Complex64, Complex64, Complex64, Complex64)> {
        self.pairs.iter().position(|&p| p == (i, j)).map(|idx| {
            (
                self.dipole[idx],
                self.charge[idx],
                self.qp_array[idx],
                self.qp_principal[idx],
            )
        })
    }
}

/// Grid quadrature of the standard operators between converged eigenvectors.
pub fn matrix_elements(
    design: &CircuitDesign,
    eig: &DesignEigensystem,
    pairs: &[(usize, usize)],
) -> Result<MatrixElements> {
    let vectors = match &eig.solution.vectors {
        VectorSet::Real(v) => v,
        VectorSet::Complex(_) => {
            return Err(FluxError::InvalidGrid(
                "matrix elements require the Dirichlet (real) eigensystem".into(),
            ))
        }
    };
    let grid = &eig.grid;
    let h = grid.spacing();
    let m = grid.points;
    let n2 = 2.0 * design.array_size as f64;
    let phie = design.external_phase_rad;

    let mut out = MatrixElements {
        pairs: pairs.to_vec(),
        dipole: Vec::with_capacity(pairs.len()),
        charge: Vec::with_capacity(pairs.len()),
        qp_array: Vec::with_capacity(pairs.len()),
        qp_principal: Vec::with_capacity(pairs.len()),
    };

    for &(i, j) in pairs {
        let (vi, vj) = match (vectors.get(i), vectors.get(j)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(FluxError::BasisTooSmall {
                    requested: i.max(j) + 1,
                    dimension: vectors.len(),
                })
            }
        };
        let mut dipole = 0.0;
        let mut qp_a = 0.0;
        let mut qp_p = 0.0;
        let mut charge_im = 0.0;
        for p in 0..m {
            let phi = grid.point(p);
            let w = h * vi[p];
            dipole += w * phi * vj[p];
            qp_a += w * (phi / n2).sin() * vj[p];
            qp_p += w * (0.5 * (phi + phie)).sin() * vj[p];
            // (-i d/dphi) v, centered difference, Dirichlet padding.
            let up = if p + 1 < m { vj[p + 1] } else { 0.0 };
            let dn = if p > 0 { vj[p - 1] } else { 0.0 };
            charge_im -= w * (up - dn) / (2.0 * h);
        }
        out.dipole.push(Complex64::new(dipole, 0.0));
        out.charge.push(Complex64::new(0.0, charge_im));
        out.qp_array.push(Complex64::new(qp_a, 0.0));
        out.qp_principal.push(Complex64::new(qp_p, 0.0));
    }
    Ok(out)
}
