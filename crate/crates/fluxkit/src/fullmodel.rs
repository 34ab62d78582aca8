//! Full N-dimensional circuit quantization at desk scale.
//!
//! The loop of N array junctions plus the principal junction leaves N
//! independent node phases. In the charge basis each mode carries integer
//! charge states -m..m, the capacitance matrix supplies the quadratic
//! charging form, and every junction contributes a +-1 hopping pair with
//! its loop-phase factor. Used to validate the 1D reduction and to compute
//! authoritative charge dispersion for N <= 4; beyond that the state space
//! grows too fast and the 1D/empirical estimates take over.

use crate::circuit::{derive_energies, CircuitDesign};
use crate::constants::PhysicalConstants;
use crate::dispersion::{DispersionModel, DispersionResult};
use crate::error::{FluxError, Result};
use crate::spectral::dense::DenseHermitian;
use crate::spectral::lanczos::{self, LanczosOptions};
use crate::spectral::sparse::{CsrMatrix, LinScalar};
use crate::spectral::{EigenSolution, VectorSet};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

/// Largest array size the full model will attempt.
pub const DEFAULT_MAX_MODES: usize = 4;

/// Default cap on the charge-basis dimension; override with FLUXKIT_MAX_DIM.
pub const DEFAULT_MAX_DIMENSION: usize = 30_000;

/// Dimension budget, honoring the FLUXKIT_MAX_DIM environment variable.
pub fn max_dimension() -> usize {
    std::env::var("FLUXKIT_MAX_DIM")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(DEFAULT_MAX_DIMENSION)
}

/// One Josephson term `-energy * cos(theta_a - theta_b + offset)`;
/// `node_b = None` means the branch goes to ground. `loop_sign` records the
/// branch orientation relative to the qubit loop: +1 when the loop runs
/// b -> a, -1 when it runs a -> b (the principal junction closes the loop
/// against the array direction).
#[derive(Debug, Clone, Serialize)]
pub struct JosephsonTerm {
    pub node_a: usize,
    pub node_b: Option<usize>,
    pub energy_ghz: f64,
    pub offset_rad: f64,
    pub loop_sign: f64,
}

/// Node-basis description of the circuit: capacitance matrix (fF, row-major),
/// Josephson terms, and per-island offset charges in units of 2e.
#[derive(Debug, Clone, Serialize)]
pub struct FullCircuitSpec {
    pub modes: usize,
    pub capacitance_ff: Vec<f64>,
    pub josephson: Vec<JosephsonTerm>,
    pub offset_charges: Vec<f64>,
    /// External loop phase the term offsets must add up to.
    pub loop_phase_rad: f64,
}

impl FullCircuitSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.modes;
        if self.capacitance_ff.len() != n * n || self.offset_charges.len() != n {
            return Err(FluxError::InvalidDesign(
                "capacitance matrix / offset charge sizes inconsistent with mode count".into(),
            ));
        }
        for i in 0..n {
            for j in 0..i {
                if (self.capacitance_ff[i * n + j] - self.capacitance_ff[j * n + i]).abs() > 0.0 {
                    return Err(FluxError::InvalidDesign(
                        "capacitance matrix must be symmetric".into(),
                    ));
                }
            }
        }
        cholesky(n, &self.capacitance_ff).ok_or_else(|| {
            FluxError::InvalidDesign("capacitance matrix is not positive definite".into())
        })?;
        // Fluxoid constraint: the loop-oriented branch offsets add up to
        // -phi_e (the theta-operator parts telescope to zero around the loop).
        let oriented: f64 = self
            .josephson
            .iter()
            .map(|t| t.loop_sign * t.offset_rad)
            .sum();
        let defect = (oriented + self.loop_phase_rad).rem_euclid(TAU);
        let defect = defect.min(TAU - defect);
        if defect > 1e-9 {
            return Err(FluxError::InvalidDesign(format!(
                "oriented junction offsets sum to {oriented} rad; the fluxoid constraint \
                 requires -phi_e = {} (mod 2 pi)",
                -self.loop_phase_rad
            )));
        }
        Ok(())
    }

    /// Redistribute the loop phase across junctions (a gauge choice).
    /// The new offsets must keep the loop sum.
    pub fn with_offsets(mut self, offsets: &[f64]) -> Result<Self> {
        if offsets.len() != self.josephson.len() {
            return Err(FluxError::InvalidDesign(
                "offset count must match junction count".into(),
            ));
        }
        for (term, &o) in self.josephson.iter_mut().zip(offsets.iter()) {
            term.offset_rad = o;
        }
        self.validate()?;
        Ok(self)
    }
}

/// Per-mode charge truncation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MultiModeBasis {
    pub modes: usize,
    pub charge_cutoff: usize,
    pub dimension: usize,
}

impl MultiModeBasis {
    pub fn new(modes: usize, charge_cutoff: usize, budget: usize) -> Result<Self> {
        let width = 2 * charge_cutoff + 1;
        let mut dimension = 1usize;
        for _ in 0..modes {
            dimension = dimension.saturating_mul(width);
            if dimension > budget {
                return Err(FluxError::BudgetExceeded {
                    dimension,
                    budget,
                });
            }
        }
        Ok(Self {
            modes,
            charge_cutoff,
            dimension,
        })
    }

    /// Largest cutoff whose basis fits the budget.
    pub fn largest_cutoff(modes: usize, budget: usize) -> Option<usize> {
        let mut m = None;
        let mut cand = 1usize;
        while Self::new(modes, cand, budget).is_ok() {
            m = Some(cand);
            cand += 1;
        }
        m
    }
}

/// Node representation of a design: N array junctions (gamma E_J, gamma C_J
/// each) chain ground -> node N-1; the principal junction (E_J, C_J + C_sh)
/// closes the loop from the last island to ground and carries the full
/// external phase.
pub fn build_full_circuit(design: &CircuitDesign) -> Result<FullCircuitSpec> {
    build_full_circuit_with_limit(design, DEFAULT_MAX_MODES)
}

pub fn build_full_circuit_with_limit(
    design: &CircuitDesign,
    max_modes: usize,
) -> Result<FullCircuitSpec> {
    design.validate()?;
    let n = design.array_size;
    if n > max_modes {
        return Err(FluxError::BudgetExceeded {
            dimension: n,
            budget: max_modes,
        });
    }
    let energies = derive_energies(design, &PhysicalConstants::codata2018())?;
    let ej = energies.josephson_energy_ghz;
    let gamma = design.size_ratio;
    let array_c = gamma * design.junction_capacitance_ff;

    let mut cap = vec![0.0; n * n];
    let mut josephson = Vec::with_capacity(n + 1);
    for j in 0..n {
        // Array junction j connects node j-1 (ground when j = 0) to node j.
        if j == 0 {
            cap[0] += array_c;
            josephson.push(JosephsonTerm {
                node_a: 0,
                node_b: None,
                energy_ghz: gamma * ej,
                offset_rad: 0.0,
                loop_sign: 1.0,
            });
        } else {
            cap[(j - 1) * n + (j - 1)] += array_c;
            cap[j * n + j] += array_c;
            cap[(j - 1) * n + j] -= array_c;
            cap[j * n + (j - 1)] -= array_c;
            josephson.push(JosephsonTerm {
                node_a: j,
                node_b: Some(j - 1),
                energy_ghz: gamma * ej,
                offset_rad: 0.0,
                loop_sign: 1.0,
            });
        }
    }
    cap[(n - 1) * n + (n - 1)] +=
        design.junction_capacitance_ff + design.shunt_capacitance_ff;
    for i in 0..n {
        cap[i * n + i] += design.ground_capacitance_ff;
    }
    josephson.push(JosephsonTerm {
        node_a: n - 1,
        node_b: None,
        energy_ghz: ej,
        offset_rad: design.external_phase_rad,
        loop_sign: -1.0,
    });

    let spec = FullCircuitSpec {
        modes: n,
        capacitance_ff: cap,
        josephson,
        offset_charges: vec![0.0; n],
        loop_phase_rad: design.external_phase_rad,
    };
    spec.validate()?;
    Ok(spec)
}

fn cholesky(n: usize, a: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Inverse via Cholesky solves; fine at these sizes.
fn spd_inverse(n: usize, a: &[f64]) -> Option<Vec<f64>> {
    let l = cholesky(n, a)?;
    let mut inv = vec![0.0; n * n];
    for col in 0..n {
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut sum = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                sum -= l[i * n + k] * y[k];
            }
            y[i] = sum / l[i * n + i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in i + 1..n {
                sum -= l[k * n + i] * x[k];
            }
            x[i] = sum / l[i * n + i];
        }
        for i in 0..n {
            inv[i * n + col] = x[i];
        }
    }
    Some(inv)
}

struct ChargeLayout {
    modes: usize,
    m: i64,
    width: i64,
    dim: usize,
}

impl ChargeLayout {
    fn new(basis: &MultiModeBasis) -> Self {
        Self {
            modes: basis.modes,
            m: basis.charge_cutoff as i64,
            width: 2 * basis.charge_cutoff as i64 + 1,
            dim: basis.dimension,
        }
    }

    fn decode(&self, mut idx: usize, out: &mut [i64]) {
        for q in out.iter_mut().take(self.modes) {
            *q = (idx as i64 % self.width) - self.m;
            idx /= self.width as usize;
        }
    }

    /// Index after shifting two modes; None when out of the box.
    fn shifted(&self, idx: usize, charges: &[i64], a: usize, da: i64, b: Option<usize>, db: i64) -> Option<usize> {
        let na = charges[a] + da;
        if na.abs() > self.m {
            return None;
        }
        let mut stride_a = 1i64;
        for _ in 0..a {
            stride_a *= self.width;
        }
        let mut next = idx as i64 + da * stride_a;
        if let Some(b) = b {
            let nb = charges[b] + db;
            if nb.abs() > self.m {
                return None;
            }
            let mut stride_b = 1i64;
            for _ in 0..b {
                stride_b *= self.width;
            }
            next += db * stride_b;
        }
        Some(next as usize)
    }
}

/// 4 (e^2/2h) C^{-1}, the coefficient matrix of (n - n_g)_i (n - n_g)_j (GHz).
fn charging_form(spec: &FullCircuitSpec) -> Result<Vec<f64>> {
    let n = spec.modes;
    let inv = spd_inverse(n, &spec.capacitance_ff).ok_or_else(|| {
        FluxError::InvalidDesign("capacitance matrix is not positive definite".into())
    })?;
    let e = crate::constants::ELECTRON_CHARGE;
    let h = crate::constants::PLANCK;
    // e^2/(2h) with C in fF and energies in GHz.
    let unit = e * e / (2.0 * h) * 1e15 * 1e-9;
    Ok(inv.iter().map(|x| 4.0 * unit * x).collect())
}

fn assemble<T: LinScalar>(
    spec: &FullCircuitSpec,
    basis: &MultiModeBasis,
    hop: &[T],
) -> Result<CsrMatrix<T>> {
    let layout = ChargeLayout::new(basis);
    let ec4 = charging_form(spec)?;
    let n = spec.modes;
    let dim = layout.dim;

    let rows: Vec<Vec<(u32, T)>> = (0..dim)
        .into_par_iter()
        .map(|idx| {
            let mut charges = vec![0i64; n];
            layout.decode(idx, &mut charges);
            let mut row: Vec<(u32, T)> = Vec::with_capacity(2 * spec.josephson.len() + 1);
            let mut diag = 0.0;
            for i in 0..n {
                let qi = charges[i] as f64 - spec.offset_charges[i];
                for j in 0..n {
                    let qj = charges[j] as f64 - spec.offset_charges[j];
                    diag += ec4[i * n + j] * qi * qj;
                }
            }
            row.push((idx as u32, T::from_re(diag)));
            for (t, term) in spec.josephson.iter().enumerate() {
                // -E/2 e^{i d} lands where the term lowers (a) / raises (b);
                // the conjugate partner on the mirrored shift.
                if let Some(col) =
                    layout.shifted(idx, &charges, term.node_a, -1, term.node_b, 1)
                {
                    row.push((col as u32, hop[t]));
                }
                if let Some(col) =
                    layout.shifted(idx, &charges, term.node_a, 1, term.node_b, -1)
                {
                    row.push((col as u32, hop[t].conj()));
                }
            }
            row
        })
        .collect();

    Ok(CsrMatrix::from_rows(dim, rows))
}

/// True when every junction phase factor is +-1, so the Hamiltonian is real.
fn is_real(spec: &FullCircuitSpec) -> bool {
    spec.josephson
        .iter()
        .all(|t| t.offset_rad.sin().abs() < 1e-12)
}

/// Options for one full-model eigensolve.
#[derive(Debug, Clone, Copy)]
pub struct FullSolveOptions {
    pub residual_tol_ghz: f64,
    pub max_iterations: usize,
    pub dense_threshold: usize,
}

impl Default for FullSolveOptions {
    fn default() -> Self {
        Self {
            residual_tol_ghz: 3e-4,
            max_iterations: 900,
            dense_threshold: 600,
        }
    }
}

/// Lowest `k` eigenpairs of the charge-basis Hamiltonian on a fixed basis.
///
/// Small bases go through the dense Hermitian solver; larger ones through
/// Lanczos with full reorthogonalization. At the sweet spot the phase
/// factors are real and the cheaper real path is used automatically.
pub fn solve_full(
    spec: &FullCircuitSpec,
    basis: &MultiModeBasis,
    k: usize,
    opts: &FullSolveOptions,
) -> Result<EigenSolution> {
    spec.validate()?;
    if basis.modes != spec.modes {
        return Err(FluxError::InvalidDesign(
            "basis mode count differs from the circuit".into(),
        ));
    }
    if k == 0 || k > basis.dimension {
        return Err(FluxError::BasisTooSmall {
            requested: k,
            dimension: basis.dimension,
        });
    }

    if is_real(spec) {
        let hop: Vec<f64> = spec
            .josephson
            .iter()
            .map(|t| -0.5 * t.energy_ghz * t.offset_rad.cos())
            .collect();
        let matrix = assemble::<f64>(spec, basis, &hop)?;
        debug_assert_eq!(matrix.hermiticity_defect(), 0.0);
        if basis.dimension <= opts.dense_threshold {
            let dense = DenseHermitian::new(basis.dimension, matrix.to_dense_complex());
            let (values, vectors, residuals) = dense.lowest_eigenpairs(k)?;
            Ok(EigenSolution {
                values,
                vectors: VectorSet::Complex(vectors),
                residuals,
            })
        } else {
            let out = lanczos::lowest_eigenpairs(
                &matrix,
                &LanczosOptions {
                    k,
                    residual_tol: opts.residual_tol_ghz,
                    max_iterations: opts.max_iterations,
                },
            )?;
            Ok(EigenSolution {
                values: out.values,
                vectors: VectorSet::Real(out.vectors),
                residuals: out.residuals,
            })
        }
    } else {
        let hop: Vec<Complex64> = spec
            .josephson
            .iter()
            .map(|t| -0.5 * t.energy_ghz * Complex64::from_polar(1.0, t.offset_rad))
            .collect();
        let matrix = assemble::<Complex64>(spec, basis, &hop)?;
        debug_assert_eq!(matrix.hermiticity_defect(), 0.0);
        if basis.dimension <= opts.dense_threshold {
            let dense = DenseHermitian::new(basis.dimension, matrix.to_dense_complex());
            let (values, vectors, residuals) = dense.lowest_eigenpairs(k)?;
            Ok(EigenSolution {
                values,
                vectors: VectorSet::Complex(vectors),
                residuals,
            })
        } else {
            let out = lanczos::lowest_eigenpairs(
                &matrix,
                &LanczosOptions {
                    k,
                    residual_tol: opts.residual_tol_ghz,
                    max_iterations: opts.max_iterations,
                },
            )?;
            Ok(EigenSolution {
                values: out.values,
                vectors: VectorSet::Complex(out.vectors),
                residuals: out.residuals,
            })
        }
    }
}

/// Cutoff-growth certificate: eigenvalue drift between the last two cutoffs.
#[derive(Debug, Clone, Serialize)]
pub struct CutoffCertificate {
    pub previous_cutoff: usize,
    pub final_cutoff: usize,
    pub drift_ghz: f64,
}

/// Grow the per-mode charge cutoff (doubling, clamped to the dimension
/// budget) until the lowest `k` eigenvalues are stable to `tolerance_ghz`.
pub fn solve_full_converged(
    spec: &FullCircuitSpec,
    k: usize,
    tolerance_ghz: f64,
    budget: usize,
    opts: &FullSolveOptions,
) -> Result<(EigenSolution, MultiModeBasis, CutoffCertificate)> {
    let m_max = MultiModeBasis::largest_cutoff(spec.modes, budget).ok_or(
        FluxError::BudgetExceeded {
            dimension: 3usize.pow(spec.modes as u32),
            budget,
        },
    )?;
    let mut m = 4.min(m_max);
    let mut prev: Option<(usize, Vec<f64>)> = None;
    loop {
        let basis = MultiModeBasis::new(spec.modes, m, budget)?;
        let sol = solve_full(spec, &basis, k, opts)?;
        if let Some((pm, pv)) = &prev {
            let drift = pv
                .iter()
                .zip(sol.values.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if drift < tolerance_ghz {
                return Ok((
                    sol,
                    basis,
                    CutoffCertificate {
                        previous_cutoff: *pm,
                        final_cutoff: m,
                        drift_ghz: drift,
                    },
                ));
            }
        }
        if m == m_max {
            return Err(FluxError::ConvergenceFailure(format!(
                "charge cutoff exhausted the dimension budget {budget} before levels stabilized \
                 to {tolerance_ghz:.1e} GHz (reached m = {m})"
            )));
        }
        prev = Some((m, sol.values.clone()));
        m = (2 * m).min(m_max);
    }
}

/// Full-model charge dispersion for one design.
#[derive(Debug, Clone, Serialize)]
pub struct FullDispersionReport {
    pub level: usize,
    /// Band of the requested level over the principal island's offset charge.
    pub principal: DispersionResult,
    /// Band of the 0 -> 1 transition over the same sweep.
    pub transition01: DispersionResult,
    /// Island whose single-offset sweep gives the largest level band.
    pub worst_island: usize,
    pub worst: DispersionResult,
    pub charge_cutoff: usize,
    pub dimension: usize,
    pub cutoff_drift_ghz: f64,
    pub ground_capacitance_ff: f64,
}

fn band_result(level: usize, offsets: &[f64], band: Vec<f64>) -> DispersionResult {
    let lo = band.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = band.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    DispersionResult {
        level_index: level,
        offsets: offsets.to_vec(),
        band_ghz: band,
        amplitude_ghz: hi - lo,
        model: DispersionModel::Full,
    }
}

fn offset_samples(samples: usize) -> Vec<f64> {
    let mut ng: Vec<f64> = (0..samples).map(|i| i as f64 / samples as f64).collect();
    if !ng.iter().any(|&x| (x - 0.5).abs() < 1e-12) {
        ng.push(0.5);
        ng.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    ng
}

/// Sweep the principal island's offset charge over [0, 1) and report the
/// level band, the 0-1 transition band, and the worst case over
/// single-island sweeps.
///
/// The cutoff is certified once at the most asymmetric bias (n_g = 0.5) and
/// reused for every point, so truncation error cancels across the band.
pub fn charge_dispersion_full(
    design: &CircuitDesign,
    level: usize,
    samples: usize,
) -> Result<FullDispersionReport> {
    let spec = build_full_circuit(design)?;
    let budget = max_dimension();
    let opts = FullSolveOptions::default();
    let k = (level + 2).max(2);
    let n = spec.modes;
    let principal = n - 1;

    // Certify the cutoff at the principal island's half-charge bias.
    let mut probe = spec.clone();
    probe.offset_charges[principal] = 0.5;
    let (_, basis, cert) = solve_full_converged(&probe, k, 1e-4, budget, &opts)?;

    let offsets = offset_samples(samples.max(2));
    let sweep = |island: usize, points: &[f64]| -> Result<Vec<Vec<f64>>> {
        points
            .par_iter()
            .map(|&ng| {
                let mut s = spec.clone();
                s.offset_charges[island] = ng;
                solve_full(&s, &basis, k, &opts).map(|sol| sol.values)
            })
            .collect()
    };

    let principal_levels = sweep(principal, &offsets)?;
    let level_band: Vec<f64> = principal_levels.iter().map(|v| v[level]).collect();
    let transition_band: Vec<f64> = principal_levels.iter().map(|v| v[1] - v[0]).collect();

    // Worst case over single-island sweeps: the band extrema sit at
    // n_g = 0 and 0.5, so three points rank the islands.
    let coarse = [0.0, 0.25, 0.5];
    let mut worst_island = principal;
    let mut worst_band: Vec<f64> = Vec::new();
    let mut worst_amp = f64::NEG_INFINITY;
    for island in 0..n {
        let vals = sweep(island, &coarse)?;
        let band: Vec<f64> = vals.iter().map(|v| v[level]).collect();
        let amp = band.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - band.iter().cloned().fold(f64::INFINITY, f64::min);
        if amp > worst_amp {
            worst_amp = amp;
            worst_island = island;
            worst_band = band;
        }
    }

    Ok(FullDispersionReport {
        level,
        principal: band_result(level, &offsets, level_band),
        transition01: band_result(1, &offsets, transition_band),
        worst_island,
        worst: band_result(level, &coarse, worst_band),
        charge_cutoff: basis.charge_cutoff,
        dimension: basis.dimension,
        cutoff_drift_ghz: cert.drift_ghz,
        ground_capacitance_ff: design.ground_capacitance_ff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::compute_spectrum;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn quarton(n: usize) -> CircuitDesign {
        CircuitDesign::at_sweet_spot(40.0, 20.0, 1.0, n, 1.0).unwrap()
    }

    #[test]
    fn capacitance_matrix_pattern_n2() {
        let d = quarton(2);
        let spec = build_full_circuit(&d).unwrap();
        let gcj = 2.0 * 1.0;
        let expect = [gcj + gcj, -gcj, -gcj, gcj + 1.0 + 20.0];
        for (a, b) in spec.capacitance_ff.iter().zip(expect.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
        // Loop offsets sum to the external phase.
        let sum: f64 = spec.josephson.iter().map(|t| t.offset_rad).sum();
        assert_relative_eq!(sum, PI, max_relative = 1e-14);
    }

    #[test]
    fn rejects_oversized_arrays() {
        let d = CircuitDesign::at_sweet_spot(40.0, 20.0, 1.0, 8, 1.0).unwrap();
        assert!(matches!(
            build_full_circuit(&d),
            Err(FluxError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn hamiltonian_is_exactly_hermitian() {
        let d = CircuitDesign::new(40.0, 20.0, 1.0, 0.1, 2, 1.9, 2.1).unwrap();
        let spec = build_full_circuit(&d).unwrap();
        let basis = MultiModeBasis::new(2, 5, 100_000).unwrap();
        let hop: Vec<Complex64> = spec
            .josephson
            .iter()
            .map(|t| -0.5 * t.energy_ghz * Complex64::from_polar(1.0, t.offset_rad))
            .collect();
        let m = assemble::<Complex64>(&spec, &basis, &hop).unwrap();
        assert_eq!(m.hermiticity_defect(), 0.0);
    }

    #[test]
    fn n1_matches_direct_1d_solve() {
        // N = 1 at phi_e = 0 is a plain junction pair. The compact phase
        // lives on a 2 pi cell, so the matching grid solve is the periodic
        // (Bloch, theta = 0) one; both paths must agree to solver precision.
        use crate::spectral::converge::{converge, ConvergeSettings};
        use crate::spectral::GridSpec;
        use crate::spectrum::gfq_potential;

        let d = CircuitDesign::new(40.0, 20.0, 1.0, 0.0, 1, 1.0, 0.0).unwrap();
        let spec = build_full_circuit(&d).unwrap();
        let (sol, _, _) =
            solve_full_converged(&spec, 3, 1e-7, 100_000, &FullSolveOptions::default()).unwrap();

        let energies =
            derive_energies(&d, &PhysicalConstants::codata2018()).unwrap();
        let potential = gfq_potential(&d, &energies);
        let settings = ConvergeSettings::new(
            3,
            1e-7,
            GridSpec::bloch(PI, 128, 0.0).unwrap(),
        );
        let (grid_sol, _) =
            converge(&potential, 4.0 * energies.charging_energy_ghz, &settings).unwrap();
        for (a, b) in sol.values.iter().zip(grid_sol.values.iter()) {
            assert!((a - b).abs() < 1e-6, "charge-basis {a} vs grid {b} GHz");
        }
    }

    #[test]
    fn gauge_distribution_leaves_spectrum_unchanged() {
        let mut d = quarton(2);
        d.external_phase_rad = 2.4;
        let spec = build_full_circuit(&d).unwrap();
        let basis = MultiModeBasis::new(2, 9, 100_000).unwrap();
        let opts = FullSolveOptions::default();
        let a = solve_full(&spec, &basis, 3, &opts).unwrap();

        // Spread the loop phase over all three junctions, respecting the
        // branch orientations (array forward, principal reversed).
        let per = 2.4 / 3.0;
        let spec2 = spec.with_offsets(&[-per, -per, per]).unwrap();
        let b = solve_full(&spec2, &basis, 3, &opts).unwrap();
        for (x, y) in a.values.iter().zip(b.values.iter()) {
            assert!((x - y).abs() < 1e-8, "gauge dependence: {x} vs {y}");
        }
    }

    #[test]
    fn spectrum_periodic_in_offset_charge() {
        let d = quarton(2);
        let spec = build_full_circuit(&d).unwrap();
        let basis = MultiModeBasis::new(2, 10, 100_000).unwrap();
        let opts = FullSolveOptions::default();
        let at = |ng: f64| {
            let mut s = spec.clone();
            s.offset_charges[1] = ng;
            solve_full(&s, &basis, 3, &opts).unwrap().values
        };
        let v0 = at(0.3);
        let v1 = at(1.3);
        for (a, b) in v0.iter().zip(v1.iter()) {
            assert!((a - b).abs() < 1e-6, "period-1 violation: {a} vs {b}");
        }
        // Ascending order.
        assert!(v0.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn one_d_reduction_agreement_n2() {
        // Fig. 2(c)-style parameters: the collective mode dominates and the
        // 1D model tracks the full spectrum.
        let d = quarton(2);
        let spec = build_full_circuit(&d).unwrap();
        let (sol, _, _) =
            solve_full_converged(&spec, 3, 1e-5, 100_000, &FullSolveOptions::default()).unwrap();
        let full_w01 = sol.values[1] - sol.values[0];
        let oned = compute_spectrum(&d, 3, 1e-5).unwrap();
        let rel = (full_w01 - oned.qubit_frequency_ghz).abs() / oned.qubit_frequency_ghz;
        assert!(
            rel < 0.10,
            "omega01 mismatch {:.3}%: full {full_w01} vs 1d {}",
            rel * 100.0,
            oned.qubit_frequency_ghz
        );
    }

    #[test]
    fn full_dispersion_shrinks_from_n2_to_n3() {
        let r2 = charge_dispersion_full(&quarton(2), 0, 4).unwrap();
        let r3 = charge_dispersion_full(&quarton(3), 0, 4).unwrap();
        assert!(
            r3.principal.amplitude_ghz < r2.principal.amplitude_ghz,
            "dispersion not suppressed: N=2 {} vs N=3 {}",
            r2.principal.amplitude_ghz,
            r3.principal.amplitude_ghz
        );
        // Band symmetry within the sampled offsets.
        let band = &r2.principal;
        for (i, &ng) in band.offsets.iter().enumerate() {
            if let Some(j) = band
                .offsets
                .iter()
                .position(|&x| (x - (1.0 - ng)).abs() < 1e-12)
            {
                assert!(
                    (band.band_ghz[i] - band.band_ghz[j]).abs() < 1e-6,
                    "band asymmetry at ng = {ng}"
                );
            }
        }
    }
}
