//! Minimal CSR storage for the charge-basis Hamiltonians, generic over
//! real and complex entries.

use num_complex::Complex64;

/// Scalar operations needed by the sparse solver paths.
pub trait LinScalar: Copy + Send + Sync + 'static {
    fn zero() -> Self;
    fn from_re(x: f64) -> Self;
    fn conj(self) -> Self;
    fn mul(self, other: Self) -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn scale(self, f: f64) -> Self;
    fn re(self) -> f64;
    fn abs2(self) -> f64;
}

impl LinScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_re(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, f: f64) -> Self {
        self * f
    }
    fn re(self) -> f64 {
        self
    }
    fn abs2(self) -> f64 {
        self * self
    }
}

impl LinScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, f: f64) -> Self {
        self * f
    }
    fn re(self) -> f64 {
        self.re
    }
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix<T> {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<u32>,
    pub val: Vec<T>,
}

impl<T: LinScalar> CsrMatrix<T> {
    /// Build from per-row triplets; entries within a row are sorted by
    /// column and duplicates summed, so assembly order does not matter.
    pub fn from_rows(n: usize, mut rows: Vec<Vec<(u32, T)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for row in rows.iter_mut() {
            row.sort_by_key(|&(c, _)| c);
            let mut i = 0;
            while i < row.len() {
                let c = row[i].0;
                let mut acc = row[i].1;
                let mut j = i + 1;
                while j < row.len() && row[j].0 == c {
                    acc = acc.add(row[j].1);
                    j += 1;
                }
                col.push(c);
                val.push(acc);
                i = j;
            }
            row_ptr.push(col.len());
        }
        Self {
            n,
            row_ptr,
            col,
            val,
        }
    }

    /// y = A x.
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        for i in 0..self.n {
            let mut acc = T::zero();
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc = acc.add(self.val[idx].mul(x[self.col[idx] as usize]));
            }
            y[i] = acc;
        }
    }

    /// Largest row sum of magnitudes (infinity norm); a cheap spectral scale.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|idx| self.val[idx].abs2().sqrt())
                    .sum::<f64>()
            })
            .fold(f64::MIN_POSITIVE, f64::max)
    }

    /// Exact Hermiticity check: every stored (i, j, v) must have a stored
    /// transpose partner equal to conj(v). Returns the worst mismatch.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col[idx] as usize;
                let v = self.val[idx];
                let mut partner = T::zero();
                for jdx in self.row_ptr[j]..self.row_ptr[j + 1] {
                    if self.col[jdx] as usize == i {
                        partner = self.val[jdx];
                        break;
                    }
                }
                worst = worst.max(v.sub(partner.conj()).abs2().sqrt());
            }
        }
        worst
    }

    /// Densify (test helper for small systems).
    pub fn to_dense_complex(&self) -> Vec<Complex64>
    where
        T: Into<Complex64>,
    {
        let mut a = vec![Complex64::new(0.0, 0.0); self.n * self.n];
        for i in 0..self.n {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                a[i * self.n + self.col[idx] as usize] = self.val[idx].into();
            }
        }
        a
    }
}
