//! Grid-refinement driver: doubles the point count (and, for Dirichlet
//! boxes, enlarges the domain until the boundary amplitude is negligible)
//! until the lowest `k` eigenvalues are stable to the requested tolerance.

use super::{build_operator, solve_lowest, Boundary, DiscreteOperator, EigenSolution, GridSpec};
use crate::error::{FluxError, Result};
use serde::Serialize;

/// Hard cap on the number of grid points.
pub const MAX_GRID_POINTS: usize = 1 << 20;

/// Relative wavefunction amplitude allowed at the Dirichlet box edge.
const BOUNDARY_AMPLITUDE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ConvergeSettings {
    /// Number of lowest eigenvalues tracked for convergence.
    pub k: usize,
    /// Absolute stability tolerance on each tracked eigenvalue.
    pub tolerance: f64,
    /// Starting grid; the driver only refines from here.
    pub initial: GridSpec,
    /// Whether the Dirichlet box may be enlarged (periodic cells never grow).
    pub grow_box: bool,
    /// Hard ceiling on the box half-width. For periodic potentials solved in
    /// a Dirichlet box this must sit on the potential ridge; growing past it
    /// would put the box edge inside a replica well.
    pub max_half_width: f64,
    pub max_points: usize,
}

impl ConvergeSettings {
    pub fn new(k: usize, tolerance: f64, initial: GridSpec) -> Self {
        Self {
            k,
            tolerance,
            initial,
            grow_box: matches!(initial.boundary, Boundary::Dirichlet),
            max_half_width: f64::INFINITY,
            max_points: MAX_GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementStep {
    pub points: usize,
    pub half_width_rad: f64,
    pub lowest: Vec<f64>,
}

/// Refinement history attached to every converged spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRecord {
    pub steps: Vec<RefinementStep>,
    pub converged: bool,
    pub final_points: usize,
    pub final_half_width_rad: f64,
    pub warnings: Vec<String>,
}

impl ConvergenceRecord {
    pub fn final_grid(&self, boundary: Boundary) -> GridSpec {
        GridSpec {
            half_width_rad: self.final_half_width_rad,
            points: self.final_points,
            boundary,
        }
    }
}

fn boundary_amplitude(sol: &EigenSolution) -> f64 {
    let vecs = match &sol.vectors {
        super::VectorSet::Real(v) => v,
        super::VectorSet::Complex(_) => return 0.0,
    };
    let mut worst = 0.0f64;
    for v in vecs {
        let peak = v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        if peak > 0.0 {
            let edge = v[0].abs().max(v[v.len() - 1].abs());
            worst = worst.max(edge / peak);
        }
    }
    worst
}

fn next_odd(m: usize) -> usize {
    if m % 2 == 0 {
        m + 1
    } else {
        m
    }
}

fn refine_points(grid: &GridSpec) -> usize {
    match grid.boundary {
        // Nested refinement: midpoints are added, old points kept.
        Boundary::Dirichlet => 2 * grid.points - 1,
        Boundary::Bloch { .. } => 2 * grid.points,
    }
}

/// Converge the lowest `settings.k` eigenpairs of
/// `-kinetic d^2/dphi^2 + V(phi)`.
///
/// Each outer step doubles the point count; under Dirichlet the box is first
/// enlarged until all tracked wavefunctions have edge amplitude below 1e-6
/// of their peak. Convergence means every tracked eigenvalue moved by less
/// than `tolerance` between successive refinements.
pub fn converge(
    potential: &(dyn Fn(f64) -> f64 + Sync),
    kinetic: f64,
    settings: &ConvergeSettings,
) -> Result<(EigenSolution, ConvergenceRecord)> {
    let mut grid = settings.initial;
    if let Boundary::Dirichlet = grid.boundary {
        grid.points = next_odd(grid.points);
    }
    let mut steps: Vec<RefinementStep> = Vec::new();
    let mut previous: Option<Vec<f64>> = None;
    let mut warnings: Vec<String> = Vec::new();

    loop {
        if grid.points > settings.max_points {
            return Err(FluxError::ConvergenceFailure(format!(
                "grid exceeded {} points without meeting tolerance {:.3e}",
                settings.max_points, settings.tolerance
            )));
        }

        let mut sol = solve_grid(potential, kinetic, &grid, settings.k)?;

        if settings.grow_box && matches!(grid.boundary, Boundary::Dirichlet) {
            let mut grew = false;
            for _ in 0..40 {
                if boundary_amplitude(&sol) <= BOUNDARY_AMPLITUDE_TOL {
                    break;
                }
                if grid.half_width_rad >= settings.max_half_width {
                    let msg = format!(
                        "boundary amplitude {:.2e} above {BOUNDARY_AMPLITUDE_TOL:.0e} with the box \
                         capped at L = {:.3} rad",
                        boundary_amplitude(&sol),
                        settings.max_half_width
                    );
                    if warnings.is_empty() {
                        warnings.push(msg);
                    }
                    break;
                }
                // Enlarge the box, keeping the spacing roughly fixed.
                let h = grid.spacing();
                let l = (grid.half_width_rad * 1.5).min(settings.max_half_width);
                let points = next_odd(((2.0 * l / h).ceil() as usize + 1).max(grid.points));
                if points > settings.max_points {
                    return Err(FluxError::ConvergenceFailure(format!(
                        "box growth exceeded {} points; wavefunction does not fit",
                        settings.max_points
                    )));
                }
                grid = GridSpec {
                    half_width_rad: l,
                    points,
                    boundary: grid.boundary,
                };
                sol = solve_grid(potential, kinetic, &grid, settings.k)?;
                grew = true;
            }
            if grew {
                // Domain changed; previous eigenvalues are not comparable.
                previous = None;
            }
        }

        steps.push(RefinementStep {
            points: grid.points,
            half_width_rad: grid.half_width_rad,
            lowest: sol.values.clone(),
        });

        if let Some(prev) = &previous {
            let drift = prev
                .iter()
                .zip(sol.values.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if drift < settings.tolerance {
                let record = ConvergenceRecord {
                    steps,
                    converged: true,
                    final_points: grid.points,
                    final_half_width_rad: grid.half_width_rad,
                    warnings,
                };
                return Ok((sol, record));
            }
        }
        previous = Some(sol.values.clone());
        grid.points = refine_points(&grid);
    }
}

fn solve_grid(
    potential: &(dyn Fn(f64) -> f64 + Sync),
    kinetic: f64,
    grid: &GridSpec,
    k: usize,
) -> Result<EigenSolution> {
    let op: DiscreteOperator = build_operator(potential, kinetic, grid)?;
    solve_lowest(&op, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_levels_converge_to_analytic() {
        let ec = 0.9;
        let k_spring = 4.0;
        let settings = ConvergeSettings::new(
            4,
            1e-6,
            GridSpec::dirichlet(3.0, 129).unwrap(),
        );
        let (sol, record) = converge(&|x| 0.5 * k_spring * x * x, 4.0 * ec, &settings).unwrap();
        assert!(record.converged);
        let omega = (8.0 * ec * k_spring).sqrt();
        for (n, &v) in sol.values.iter().enumerate() {
            assert_relative_eq!(v, omega * (n as f64 + 0.5), epsilon = 1e-4);
        }
        // The driver had to grow the initial 3-rad box.
        assert!(record.final_half_width_rad > 3.0);
    }

    #[test]
    fn quartic_dimensionless_levels() {
        // -d^2/dx^2 + x^4.
        let settings = ConvergeSettings::new(
            3,
            1e-6,
            GridSpec::dirichlet(6.0, 129).unwrap(),
        );
        let (sol, record) = converge(&|x: f64| x.powi(4), 1.0, &settings).unwrap();
        assert!(record.converged);
        assert!((sol.values[0] - 1.0604).abs() < 1e-3);
        assert!((sol.values[1] - 3.7997).abs() < 1e-3);
        assert!((sol.values[2] - 7.4557).abs() < 1e-3);
        // Spacing ratio (l2-l1)/(l1-l0) ~ 4/3.
        let r = (sol.values[2] - sol.values[1]) / (sol.values[1] - sol.values[0]);
        assert!((r - 4.0 / 3.0).abs() < 2e-2);
    }

    #[test]
    fn converged_result_is_a_fixed_point() {
        let settings = ConvergeSettings::new(3, 1e-5, GridSpec::dirichlet(6.0, 129).unwrap());
        let (sol, record) = converge(&|x: f64| x.powi(4), 1.0, &settings).unwrap();
        // Resubmit from the final grid: values change by less than tolerance.
        let settings2 = ConvergeSettings::new(
            3,
            1e-5,
            record.final_grid(Boundary::Dirichlet),
        );
        let (sol2, _) = converge(&|x: f64| x.powi(4), 1.0, &settings2).unwrap();
        for (a, b) in sol.values.iter().zip(sol2.values.iter()) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn max_grid_failure_reported() {
        let mut settings = ConvergeSettings::new(2, 1e-300, GridSpec::dirichlet(5.0, 129).unwrap());
        settings.max_points = 1 << 10;
        let err = converge(&|x: f64| x * x, 1.0, &settings);
        assert!(matches!(err, Err(FluxError::ConvergenceFailure(_))));
    }

    #[test]
    fn parity_of_symmetric_potential_eigenvectors() {
        let settings = ConvergeSettings::new(3, 1e-6, GridSpec::dirichlet(6.0, 257).unwrap());
        let (sol, _) = converge(&|x: f64| x.powi(4), 1.0, &settings).unwrap();
        let vecs = sol.vectors.real().unwrap();
        for (n, v) in vecs.iter().enumerate() {
            let m = v.len();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mismatch: f64 = (0..m)
                .map(|j| (v[j] - sign * v[m - 1 - j]).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(
                mismatch / norm < 1e-6,
                "level {n} lacks definite parity: {mismatch}"
            );
        }
    }
}
