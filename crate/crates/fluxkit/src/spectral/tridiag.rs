//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for the
//! lowest eigenvalues, inverse iteration with a partially pivoted
//! tridiagonal LU for the eigenvectors.

use crate::error::{FluxError, Result};

/// Symmetric tridiagonal matrix: main diagonal `d` (n), off-diagonal `e` (n-1).
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl SymTridiag {
    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// Magnitude scale used for pivots and residual thresholds.
    pub fn scale(&self) -> f64 {
        let dm = self.d.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let em = self.e.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        (dm + 2.0 * em).max(f64::MIN_POSITIVE)
    }

    /// y = T x.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n();
        for i in 0..n {
            let mut acc = self.d[i] * x[i];
            if i > 0 {
                acc += self.e[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.e[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }
}

/// Number of eigenvalues strictly below `x`, from the signs of the LDL^T
/// pivots (Sturm sequence).
pub fn sturm_count(t: &SymTridiag, x: f64) -> usize {
    let n = t.n();
    if n == 0 {
        return 0;
    }
    let pivmin = f64::EPSILON * t.scale() * 1e-3 + f64::MIN_POSITIVE;
    let mut count = 0usize;
    let mut q = t.d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let qs = if q.abs() < pivmin {
            if q < 0.0 {
                -pivmin
            } else {
                pivmin
            }
        } else {
            q
        };
        q = (t.d[i] - x) - t.e[i - 1] * t.e[i - 1] / qs;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin_bounds(t: &SymTridiag) -> (f64, f64) {
    let n = t.n();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { t.e[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { t.e[i].abs() } else { 0.0 };
        lo = lo.min(t.d[i] - left - right);
        hi = hi.max(t.d[i] + left + right);
    }
    let pad = (hi - lo).abs().max(1.0) * 1e-14 + f64::MIN_POSITIVE;
    (lo - pad, hi + pad)
}

/// The `index`-th smallest eigenvalue (0-based), by bisection on the Sturm
/// count. Converges to a machine-width interval.
pub fn eigenvalue_by_index(t: &SymTridiag, index: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin_bounds(t);
    for _ in 0..140 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 2.0 * f64::EPSILON * mid.abs().max(1e-300) {
            break;
        }
        if sturm_count(t, mid) <= index {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lowest `k` eigenvalues in ascending order.
pub fn lowest_eigenvalues(t: &SymTridiag, k: usize) -> Result<Vec<f64>> {
    let n = t.n();
    if k == 0 || k > n {
        return Err(FluxError::BasisTooSmall {
            requested: k,
            dimension: n,
        });
    }
    Ok((0..k).map(|i| eigenvalue_by_index(t, i)).collect())
}

/// LU factorization of (T - lambda I) with partial pivoting.
/// The factored form follows the usual gttrf layout: multipliers in `dl`,
/// pivoted diagonal/superdiagonals in `dd`/`du`, second superdiagonal fill
/// in `du2`.
struct ShiftedLu {
    dl: Vec<f64>,
    dd: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

fn factor_shifted(t: &SymTridiag, lambda: f64) -> ShiftedLu {
    let n = t.n();
    let mut dl = t.e.clone();
    let mut dd: Vec<f64> = t.d.iter().map(|&x| x - lambda).collect();
    let mut du = t.e.clone();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut swapped = vec![false; n.saturating_sub(1)];

    for i in 0..n.saturating_sub(1) {
        if dd[i].abs() >= dl[i].abs() {
            if dl[i] != 0.0 {
                let fact = dl[i] / dd[i];
                dl[i] = fact;
                dd[i + 1] -= fact * du[i];
            }
            if i + 2 < n {
                du2[i] = 0.0;
            }
        } else {
            let fact = dd[i] / dl[i];
            dd[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = dd[i + 1];
            dd[i + 1] = temp - fact * dd[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
            swapped[i] = true;
        }
    }
    // Inverse iteration wants (T - lambda I) nearly singular but not exactly.
    let tiny = f64::EPSILON * t.scale().max(lambda.abs()) + f64::MIN_POSITIVE;
    for p in dd.iter_mut() {
        if p.abs() < tiny {
            *p = if *p < 0.0 { -tiny } else { tiny };
        }
    }
    ShiftedLu {
        dl,
        dd,
        du,
        du2,
        swapped,
    }
}

fn solve_in_place(lu: &ShiftedLu, b: &mut [f64]) {
    let n = b.len();
    for i in 0..n.saturating_sub(1) {
        if lu.swapped[i] {
            let temp = b[i];
            b[i] = b[i + 1];
            b[i + 1] = temp - lu.dl[i] * b[i];
        } else {
            b[i + 1] -= lu.dl[i] * b[i];
        }
    }
    b[n - 1] /= lu.dd[n - 1];
    if n >= 2 {
        b[n - 2] = (b[n - 2] - lu.du[n - 2] * b[n - 1]) / lu.dd[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - lu.du[i] * b[i + 1] - lu.du2[i] * b[i + 2]) / lu.dd[i];
    }
}

/// Deterministic pseudo-random start vector so repeated runs are bit-identical.
pub(crate) fn seeded_unit_vector(n: usize, salt: u64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|j| {
            let mut z = (j as u64).wrapping_add(salt).wrapping_add(0x9e3779b97f4a7c15);
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^= z >> 31;
            (z as f64 / u64::MAX as f64) - 0.5
        })
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
    v
}

fn orthogonalize_against(v: &mut [f64], others: &[&[f64]]) {
    for _ in 0..2 {
        for o in others {
            let dot: f64 = v.iter().zip(o.iter()).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(o.iter()) {
                *x -= dot * y;
            }
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// Eigenvector for a precomputed eigenvalue via inverse iteration.
///
/// `cluster` holds already-computed vectors of (near-)equal eigenvalues;
/// the iterate is kept orthogonal to them so multiplets come out orthonormal.
/// Returns the vector and its residual ||T v - lambda v||.
pub fn eigenvector(t: &SymTridiag, lambda: f64, cluster: &[&[f64]], salt: u64) -> (Vec<f64>, f64) {
    let n = t.n();
    let lu = factor_shifted(t, lambda);
    let mut v = seeded_unit_vector(n, salt);
    orthogonalize_against(&mut v, cluster);
    normalize(&mut v);

    let mut residual = f64::INFINITY;
    let mut best = v.clone();
    for _ in 0..6 {
        solve_in_place(&lu, &mut v);
        orthogonalize_against(&mut v, cluster);
        if normalize(&mut v) == 0.0 {
            v = seeded_unit_vector(n, salt.wrapping_add(1));
            orthogonalize_against(&mut v, cluster);
            normalize(&mut v);
            continue;
        }
        let mut tv = vec![0.0; n];
        t.apply(&v, &mut tv);
        let r = tv
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if r < residual {
            residual = r;
            best.copy_from_slice(&v);
        }
        if r < 1e-13 * t.scale() {
            break;
        }
    }
    // Sign convention: first entry of significant magnitude is positive.
    if let Some(&lead) = best.iter().find(|x| x.abs() > 1e-8) {
        if lead < 0.0 {
            for x in best.iter_mut() {
                *x = -*x;
            }
        }
    }
    (best, residual)
}

/// Lowest `k` eigenpairs, ascending, with residuals.
pub fn lowest_eigenpairs(t: &SymTridiag, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<f64>)> {
    let values = lowest_eigenvalues(t, k)?;
    let scale = t.scale();
    let cluster_tol = 1e-10 * scale;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for (i, &lam) in values.iter().enumerate() {
        let cluster: Vec<&[f64]> = (0..i)
            .filter(|&j| (values[j] - lam).abs() <= cluster_tol)
            .map(|j| vectors[j].as_slice())
            .collect();
        let (v, r) = eigenvector(t, lam, &cluster, 0x5eed_0000 + i as u64);
        vectors.push(v);
        residuals.push(r);
    }
    Ok((values, vectors, residuals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_by_two_diagonal() {
        let t = SymTridiag {
            d: vec![2.0, 1.0],
            e: vec![0.0],
        };
        let (vals, vecs, res) = lowest_eigenpairs(&t, 2).unwrap();
        assert_relative_eq!(vals[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(vals[1], 2.0, max_relative = 1e-14);
        assert!(res.iter().all(|&r| r < 1e-12));
        assert!(vecs[0][1].abs() > 0.99 && vecs[1][0].abs() > 0.99);
    }

    #[test]
    fn discrete_laplacian_matches_analytic() {
        // d = 2, e = -1: eigenvalues 2 - 2 cos(j pi / (n+1)).
        let n = 64;
        let t = SymTridiag {
            d: vec![2.0; n],
            e: vec![-1.0; n - 1],
        };
        let vals = lowest_eigenvalues(&t, 5).unwrap();
        for (j, &v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert_relative_eq!(v, exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn sturm_count_brackets_spectrum() {
        let t = SymTridiag {
            d: vec![1.0, -2.0, 0.5, 3.0],
            e: vec![0.3, -0.7, 1.1],
        };
        let (lo, hi) = super::gershgorin_bounds(&t);
        assert_eq!(sturm_count(&t, lo), 0);
        assert_eq!(sturm_count(&t, hi), 4);
    }

    #[test]
    fn eigenvectors_orthonormal_with_residuals() {
        // Pseudo-random fixed matrix.
        let n = 50;
        let d: Vec<f64> = (0..n)
            .map(|i| ((i as u64 * 2654435761) % 1000) as f64 / 100.0)
            .collect();
        let e: Vec<f64> = (0..n - 1)
            .map(|i| ((i * 40503 + 7) % 1000) as f64 / 250.0 - 2.0)
            .collect();
        let t = SymTridiag { d, e };
        let (vals, vecs, res) = lowest_eigenpairs(&t, 6).unwrap();
        for w in vals.windows(2) {
            assert!(w[0] <= w[1] + 1e-12);
        }
        for i in 0..6 {
            assert!(res[i] < 1e-10 * t.scale(), "residual {} too large", res[i]);
            for j in 0..i {
                let dot: f64 = vecs[i].iter().zip(vecs[j].iter()).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 1e-8, "vectors {i},{j} not orthogonal: {dot}");
            }
        }
    }

    #[test]
    fn degenerate_pair_resolved() {
        // Block diag(A, A) has every eigenvalue doubled.
        let d = vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0];
        let e = vec![0.4, 0.3, 0.0, 0.4, 0.3];
        let t = SymTridiag { d, e };
        let (vals, vecs, _) = lowest_eigenpairs(&t, 4).unwrap();
        assert_relative_eq!(vals[0], vals[1], epsilon = 1e-12);
        assert_relative_eq!(vals[2], vals[3], epsilon = 1e-12);
        let dot: f64 = vecs[0].iter().zip(vecs[1].iter()).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-8);
    }
}
