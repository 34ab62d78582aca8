//! Dense Hermitian eigensolver: Householder reduction to a real symmetric
//! tridiagonal form, then Sturm bisection + inverse iteration from
//! [`super::tridiag`], with eigenvectors back-transformed through the
//! stored reflectors.
//!
//! Real symmetric input is handled as the zero-imaginary-part special case.

use super::tridiag::{self, SymTridiag};
use crate::error::{FluxError, Result};
use num_complex::Complex64;

/// Row-major dense Hermitian matrix.
#[derive(Debug, Clone)]
pub struct DenseHermitian {
    pub n: usize,
    pub a: Vec<Complex64>,
}

struct Reduction {
    tri: SymTridiag,
    /// Householder vectors, column k in rows k+1..n (row-major over the
    /// original storage).
    reflectors: Vec<Complex64>,
    /// Diagonal phases making the complex tridiagonal real.
    phases: Vec<Complex64>,
    n: usize,
}

impl DenseHermitian {
    pub fn new(n: usize, a: Vec<Complex64>) -> Self {
        debug_assert_eq!(a.len(), n * n);
        Self { n, a }
    }

    pub fn from_real(n: usize, a: &[f64]) -> Self {
        Self::new(n, a.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn scale(&self) -> f64 {
        self.a
            .iter()
            .fold(f64::MIN_POSITIVE, |m, z| m.max(z.norm_sqr()))
            .sqrt()
            * self.n as f64
    }

    /// y = A x.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.a[i * n..(i + 1) * n];
            let mut acc = Complex64::new(0.0, 0.0);
            for (aij, xj) in row.iter().zip(x.iter()) {
                acc += aij * xj;
            }
            y[i] = acc;
        }
    }

    fn reduce(&self) -> Reduction {
        let n = self.n;
        let mut a = self.a.clone();
        let mut sub = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        let mut p = vec![Complex64::new(0.0, 0.0); n];

        for k in 0..n.saturating_sub(2) {
            let mut sigma = 0.0;
            for i in k + 1..n {
                sigma += a[i * n + k].norm_sqr();
            }
            let x0 = a[(k + 1) * n + k];
            let off = sigma - x0.norm_sqr();
            if off <= f64::EPSILON * f64::EPSILON * sigma || sigma == 0.0 {
                // Column already tridiagonal at this step.
                sub[k] = x0;
                for i in k + 1..n {
                    a[i * n + k] = Complex64::new(0.0, 0.0);
                }
                continue;
            }
            let normx = sigma.sqrt();
            let ph = if x0.norm_sqr() > 0.0 {
                x0 / x0.norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            let alpha = -ph * normx;

            // v = x - alpha e1, normalized; |v|^2 = 2 sigma + 2 |x0| normx
            // has no cancellation for this sign choice.
            let vnorm = (2.0 * sigma + 2.0 * x0.norm() * normx).sqrt();
            v[k + 1] = (x0 - alpha) / vnorm;
            for i in k + 2..n {
                v[i] = a[i * n + k] / vnorm;
            }

            // p = A_sub v, K = Re(v^H p), w = p - K v; A -= 2(v w^H + w v^H).
            for i in k + 1..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in k + 1..n {
                    acc += a[i * n + j] * v[j];
                }
                p[i] = acc;
            }
            let mut kappa = 0.0;
            for i in k + 1..n {
                kappa += (v[i].conj() * p[i]).re;
            }
            for i in k + 1..n {
                p[i] -= kappa * v[i];
            }
            for i in k + 1..n {
                let vi = v[i];
                let wi = p[i];
                for j in k + 1..n {
                    let upd = vi * p[j].conj() + wi * v[j].conj();
                    a[i * n + j] -= 2.0 * upd;
                }
            }

            sub[k] = alpha;
            for i in k + 1..n {
                a[i * n + k] = v[i];
            }
        }
        if n >= 2 {
            sub[n - 2] = a[(n - 1) * n + (n - 2)];
            a[(n - 1) * n + (n - 2)] = Complex64::new(0.0, 0.0);
        }

        let d: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
        let mut e = vec![0.0; n.saturating_sub(1)];
        let mut phases = vec![Complex64::new(1.0, 0.0); n];
        for k in 0..n.saturating_sub(1) {
            let m = sub[k].norm();
            e[k] = m;
            phases[k + 1] = if m > 0.0 {
                phases[k] * (sub[k] / m)
            } else {
                phases[k]
            };
        }

        Reduction {
            tri: SymTridiag { d, e },
            reflectors: a,
            phases,
            n,
        }
    }

    /// Lowest `k` eigenpairs in ascending order, with certified residuals
    /// against the original matrix.
    pub fn lowest_eigenpairs(
        &self,
        k: usize,
    ) -> Result<(Vec<f64>, Vec<Vec<Complex64>>, Vec<f64>)> {
        let n = self.n;
        if k == 0 || k > n {
            return Err(FluxError::BasisTooSmall {
                requested: k,
                dimension: n,
            });
        }
        let red = self.reduce();
        let (values, tri_vecs, _) = tridiag::lowest_eigenpairs(&red.tri, k)?;

        let mut vectors = Vec::with_capacity(k);
        let mut residuals = Vec::with_capacity(k);
        let mut work = vec![Complex64::new(0.0, 0.0); n];
        for (idx, z) in tri_vecs.iter().enumerate() {
            let mut y: Vec<Complex64> = (0..n).map(|i| red.phases[i] * z[i]).collect();
            back_transform(&red, &mut y);
            // Normalize and fix the global phase: largest-magnitude entry real positive.
            let norm = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            for c in y.iter_mut() {
                *c /= norm;
            }
            let lead = y
                .iter()
                .cloned()
                .fold(Complex64::new(0.0, 0.0), |m, c| if c.norm_sqr() > m.norm_sqr() { c } else { m });
            if lead.norm_sqr() > 0.0 {
                let ph = lead / lead.norm();
                for c in y.iter_mut() {
                    *c /= ph;
                }
            }
            self.apply(&y, &mut work);
            let r = work
                .iter()
                .zip(y.iter())
                .map(|(h, v)| (h - values[idx] * v).norm_sqr())
                .sum::<f64>()
                .sqrt();
            residuals.push(r);
            vectors.push(y);
        }
        Ok((values, vectors, residuals))
    }

    /// Every eigenvalue, ascending. O(n^2) per eigenvalue; intended for
    /// modest sizes and reference checks.
    pub fn all_eigenvalues(&self) -> Vec<f64> {
        let red = self.reduce();
        (0..self.n)
            .map(|i| tridiag::eigenvalue_by_index(&red.tri, i))
            .collect()
    }
}

fn back_transform(red: &Reduction, y: &mut [Complex64]) {
    let n = red.n;
    for k in (0..n.saturating_sub(2)).rev() {
        // v is stored in column k, rows k+1..n; skip steps with no reflector.
        let mut vnorm2 = 0.0;
        for i in k + 1..n {
            vnorm2 += red.reflectors[i * n + k].norm_sqr();
        }
        if vnorm2 == 0.0 {
            continue;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for i in k + 1..n {
            dot += red.reflectors[i * n + k].conj() * y[i];
        }
        for i in k + 1..n {
            y[i] -= 2.0 * red.reflectors[i * n + k] * dot;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Cyclic Jacobi on a real symmetric matrix; independent slow reference.
    fn jacobi_eigenvalues(n: usize, a0: &[f64]) -> Vec<f64> {
        let mut a = a0.to_vec();
        for _sweep in 0..100 {
            let mut offdiag = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    offdiag += a[i * n + j] * a[i * n + j];
                }
            }
            if offdiag.sqrt() < 1e-14 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut vals: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        vals
    }

    fn pseudo(vals: &mut impl Iterator<Item = u64>) -> f64 {
        (vals.next().unwrap() as f64 / u64::MAX as f64) - 0.5
    }

    fn stream(seed: u64) -> impl Iterator<Item = u64> {
        let mut z = seed;
        std::iter::repeat_with(move || {
            z = z.wrapping_add(0x9e3779b97f4a7c15);
            let mut x = z;
            x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
            x ^ (x >> 31)
        })
    }

    #[test]
    fn random_real_symmetric_matches_jacobi() {
        let n = 50;
        let mut s = stream(42);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x = pseudo(&mut s) * 4.0;
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        let dense = DenseHermitian::from_real(n, &a);
        let got = dense.all_eigenvalues();
        let expect = jacobi_eigenvalues(n, &a);
        for (g, e) in got.iter().zip(expect.iter()) {
            assert!((g - e).abs() < 1e-10, "eigenvalue mismatch {g} vs {e}");
        }
        // Lowest-pair path agrees and certifies residuals.
        let (vals, vecs, res) = dense.lowest_eigenpairs(4).unwrap();
        for i in 0..4 {
            assert_relative_eq!(vals[i], expect[i], epsilon = 1e-10);
            assert!(res[i] < 1e-8 * dense.scale());
            for j in 0..i {
                let dot: Complex64 = vecs[i]
                    .iter()
                    .zip(vecs[j].iter())
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                assert!(dot.norm() < 1e-8);
            }
        }
    }

    #[test]
    fn random_hermitian_eigenpairs_residuals() {
        let n = 36;
        let mut s = stream(7);
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..i {
                let z = Complex64::new(pseudo(&mut s) * 3.0, pseudo(&mut s) * 3.0);
                a[i * n + j] = z;
                a[j * n + i] = z.conj();
            }
            a[i * n + i] = Complex64::new(pseudo(&mut s) * 5.0, 0.0);
        }
        let dense = DenseHermitian::new(n, a);
        let (vals, vecs, res) = dense.lowest_eigenpairs(5).unwrap();
        for w in vals.windows(2) {
            assert!(w[0] <= w[1] + 1e-12);
        }
        for i in 0..5 {
            assert!(
                res[i] < 1e-9 * dense.scale(),
                "residual {} vs scale {}",
                res[i],
                dense.scale()
            );
            let norm: f64 = vecs[i].iter().map(|c| c.norm_sqr()).sum();
            assert_relative_eq!(norm, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn hermitian_conjugation_symmetry() {
        // Eigenvalues of A and of its complex conjugate coincide.
        let n = 20;
        let mut s = stream(99);
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..i {
                let z = Complex64::new(pseudo(&mut s), pseudo(&mut s));
                a[i * n + j] = z;
                a[j * n + i] = z.conj();
            }
            a[i * n + i] = Complex64::new(pseudo(&mut s) * 2.0, 0.0);
        }
        let conj: Vec<Complex64> = a.iter().map(|z| z.conj()).collect();
        let v1 = DenseHermitian::new(n, a).all_eigenvalues();
        let v2 = DenseHermitian::new(n, conj).all_eigenvalues();
        for (x, y) in v1.iter().zip(v2.iter()) {
            assert!((x - y).abs() < 1e-11);
        }
    }
}
