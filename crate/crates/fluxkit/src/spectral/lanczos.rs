//! Lanczos iteration with full reorthogonalization for the lowest
//! eigenpairs of large sparse Hermitian matrices (the charge-basis
//! Hamiltonians of the full circuit model).
//!
//! Deterministic: the start vector is a fixed hash-seeded unit vector, all
//! reductions are sequential, and convergence is decided on exact Ritz
//! residual bounds.

use super::sparse::{CsrMatrix, LinScalar};
use super::tridiag::{self, SymTridiag};
use crate::error::{FluxError, Result};

pub struct LanczosOptions {
    pub k: usize,
    /// Absolute residual tolerance (same units as the matrix entries).
    pub residual_tol: f64,
    pub max_iterations: usize,
}

pub struct LanczosOutcome<T> {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<T>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

fn seeded_vector<T: LinScalar>(n: usize, salt: u64) -> Vec<T> {
    let raw = tridiag::seeded_unit_vector(n, salt);
    raw.into_iter().map(T::from_re).collect()
}

fn dot_conj<T: LinScalar>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        acc = acc.add(x.conj().mul(*y));
    }
    acc
}

fn norm<T: LinScalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.abs2()).sum::<f64>().sqrt()
}

fn axpy<T: LinScalar>(y: &mut [T], alpha: T, x: &[T]) {
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        *yi = yi.add(alpha.mul(*xi));
    }
}

/// Lowest `k` eigenpairs of a Hermitian CSR matrix.
pub fn lowest_eigenpairs<T: LinScalar>(
    matrix: &CsrMatrix<T>,
    opts: &LanczosOptions,
) -> Result<LanczosOutcome<T>> {
    let n = matrix.n;
    let k = opts.k;
    if k == 0 || k > n {
        return Err(FluxError::BasisTooSmall {
            requested: k,
            dimension: n,
        });
    }
    // Small systems: the iteration space is the whole space anyway.
    let max_iter = opts.max_iterations.min(n);

    let mut basis: Vec<Vec<T>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    let mut v = seeded_vector::<T>(n, 0x1a2b_3c4d);
    let mut w = vec![T::zero(); n];
    let mut salt = 1u64;
    let mut worst_residual = f64::INFINITY;

    loop {
        let j = basis.len();
        if j >= max_iter || j == n {
            break;
        }
        basis.push(v.clone());
        matrix.matvec(&v, &mut w);
        let alpha = dot_conj(&v, &w).re();
        alphas.push(alpha);

        // w <- w - alpha v - beta v_{j-1}, then full reorthogonalization
        // (two classical Gram-Schmidt passes) against the whole basis.
        axpy(&mut w, T::from_re(-alpha), &v);
        if j > 0 {
            let beta_prev = betas[j - 1];
            axpy(&mut w, T::from_re(-beta_prev), &basis[j - 1]);
        }
        for _ in 0..2 {
            for b in basis.iter() {
                let c = dot_conj(b, &w);
                axpy(&mut w, T::zero().sub(c), b);
            }
        }

        let beta = norm(&w);
        let scale = matrix.norm_inf();
        if beta <= 1e-14 * scale {
            // Invariant subspace. Either we have enough directions, or we
            // continue from a fresh orthogonalized vector.
            if basis.len() >= k {
                betas.push(0.0);
                break;
            }
            let mut fresh = seeded_vector::<T>(n, 0xfeed_beef ^ salt);
            salt = salt.wrapping_add(1);
            for _ in 0..2 {
                for b in basis.iter() {
                    let c = dot_conj(b, &fresh);
                    axpy(&mut fresh, T::zero().sub(c), b);
                }
            }
            let fnorm = norm(&fresh);
            if fnorm <= 1e-14 {
                break;
            }
            for x in fresh.iter_mut() {
                *x = x.scale(1.0 / fnorm);
            }
            betas.push(0.0);
            v = fresh;
            continue;
        }
        betas.push(beta);
        v = w.clone();
        for x in v.iter_mut() {
            *x = x.scale(1.0 / beta);
        }

        // Convergence check on the projected problem (cheap relative to a
        // matvec once j is large; every few iterations is enough).
        let jj = basis.len();
        if jj >= k && (jj % 4 == 0 || jj == max_iter) {
            let tri = SymTridiag {
                d: alphas.clone(),
                e: betas[..jj - 1].to_vec(),
            };
            if let Ok((_, tvecs, _)) = tridiag::lowest_eigenpairs(&tri, k) {
                // Residual bound for Ritz pair i: |beta_j * s_{last, i}|.
                let bound = tvecs
                    .iter()
                    .map(|s| (beta * s[jj - 1]).abs())
                    .fold(0.0f64, f64::max);
                worst_residual = bound;
                if bound < opts.residual_tol {
                    break;
                }
            }
        }
    }

    let j = basis.len();
    if j < k {
        return Err(FluxError::NumericalFailure {
            stage: "lanczos basis construction",
            worst_residual: f64::INFINITY,
        });
    }
    let tri = SymTridiag {
        d: alphas.clone(),
        e: betas[..j - 1].to_vec(),
    };
    let (values, tvecs, _) = tridiag::lowest_eigenpairs(&tri, k)?;

    // Assemble Ritz vectors and measure exact residuals.
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for s in tvecs.iter() {
        let mut y = vec![T::zero(); n];
        for (coeff, b) in s.iter().zip(basis.iter()) {
            axpy(&mut y, T::from_re(*coeff), b);
        }
        let ynorm = norm(&y);
        for x in y.iter_mut() {
            *x = x.scale(1.0 / ynorm);
        }
        vectors.push(y);
    }
    let mut hy = vec![T::zero(); n];
    for (i, y) in vectors.iter().enumerate() {
        matrix.matvec(y, &mut hy);
        let r = hy
            .iter()
            .zip(y.iter())
            .map(|(a, b)| a.sub(b.scale(values[i])).abs2())
            .sum::<f64>()
            .sqrt();
        residuals.push(r);
    }
    let worst = residuals.iter().cloned().fold(0.0f64, f64::max);
    if worst > opts.residual_tol.max(1e-10 * matrix.norm_inf()) {
        return Err(FluxError::NumericalFailure {
            stage: "lanczos residual certification",
            worst_residual: worst.max(worst_residual.min(f64::MAX)),
        });
    }

    Ok(LanczosOutcome {
        values,
        vectors,
        residuals,
        iterations: j,
    })
}
