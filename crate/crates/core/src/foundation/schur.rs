use num_complex::Complex64;

use super::linalg::schur_factor;
use super::{to_complex, ComplexMatrix, RealMatrix};
use crate::error::{Error, Result};

/// Complex Schur factorization `m = q t q^H` with `t` upper triangular.
#[derive(Debug, Clone)]
pub struct ComplexSchur {
    pub q: ComplexMatrix,
    pub t: ComplexMatrix,
}

impl ComplexSchur {
    pub fn new(m: &ComplexMatrix) -> Result<Self> {
        let n = m.nrows();
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "Schur factorization needs a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if n == 0 {
            return Ok(Self {
                q: m.clone(),
                t: m.clone(),
            });
        }
        let (q, mut t) = schur_factor(m.clone())?;
        for j in 0..n {
            for i in (j + 1)..n {
                t[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Self { q, t })
    }

    /// Real quasi-triangular Schur form, with each 2x2 block split by a
    /// unitary rotation. Avoids running complex QR on real data, where a
    /// real shift can fail to separate conjugate pairs.
    pub fn from_real(m: &RealMatrix) -> Result<Self> {
        if !m.is_square() {
            return Self::new(&to_complex(m));
        }
        let n = m.nrows();
        if n == 0 {
            return Ok(Self { q: to_complex(m), t: to_complex(m) });
        }
        let (q, t) = schur_factor(m.clone())?;
        let mut out = Self { q: to_complex(&q), t: to_complex(&t) };
        for k in (1..n).rev() {
            if t[(k, k - 1)] != 0.0 {
                out.split_block(k - 1);
            }
        }
        for j in 0..n {
            for i in (j + 1)..n {
                out.t[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(out)
    }

    /// Triangularizes the 2x2 diagonal block at rows/columns `k, k+1`.
    fn split_block(&mut self, k: usize) {
        let n = self.t.nrows();
        let (a, b) = (self.t[(k, k)], self.t[(k, k + 1)]);
        let (c, d) = (self.t[(k + 1, k)], self.t[(k + 1, k + 1)]);
        let half = (a - d) * 0.5;
        let lambda = (a + d) * 0.5 + (half * half + b * c).sqrt();
        // (lambda - d, c) spans the eigenvector direction for lambda.
        let mu = lambda - d;
        let r = (mu.norm_sqr() + c.norm_sqr()).sqrt();
        if r == 0.0 {
            return;
        }
        let (g11, g21) = (mu / r, c / r);
        let (g12, g22) = (-g21.conj(), g11.conj());
        for j in 0..n {
            let x = self.t[(k, j)];
            let y = self.t[(k + 1, j)];
            self.t[(k, j)] = g11.conj() * x + g21.conj() * y;
            self.t[(k + 1, j)] = g12.conj() * x + g22.conj() * y;
        }
        for i in 0..n {
            let x = self.t[(i, k)];
            let y = self.t[(i, k + 1)];
            self.t[(i, k)] = x * g11 + y * g21;
            self.t[(i, k + 1)] = x * g12 + y * g22;
            let x = self.q[(i, k)];
            let y = self.q[(i, k + 1)];
            self.q[(i, k)] = x * g11 + y * g21;
            self.q[(i, k + 1)] = x * g12 + y * g22;
        }
        self.t[(k + 1, k)] = Complex64::new(0.0, 0.0);
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }

    /// Reorders the factorization so that every eigenvalue satisfying `keep`
    /// appears before all others on the diagonal. Returns how many were kept.
    pub fn reorder<F: Fn(Complex64) -> bool>(&mut self, keep: F) -> usize {
        let n = self.t.nrows();
        let mut placed = 0;
        for k in 0..n {
            if keep(self.t[(k, k)]) {
                let mut j = k;
                while j > placed {
                    self.swap_adjacent(j - 1);
                    j -= 1;
                }
                placed += 1;
            }
        }
        placed
    }

    /// Exchanges diagonal entries `k` and `k+1` with a unitary rotation.
    fn swap_adjacent(&mut self, k: usize) {
        let n = self.t.nrows();
        let t11 = self.t[(k, k)];
        let t12 = self.t[(k, k + 1)];
        let t22 = self.t[(k + 1, k + 1)];
        // Eigenvector of the 2x2 block for t22 becomes the first basis vector.
        let a = t12;
        let b = t22 - t11;
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if norm == 0.0 {
            return;
        }
        let (a, b) = (a / norm, b / norm);
        // g = [[a, -conj(b)], [b, conj(a)]]
        let g11 = a;
        let g12 = -b.conj();
        let g21 = b;
        let g22 = a.conj();

        // t <- g^H t (rows k, k+1)
        for j in 0..n {
            let x = self.t[(k, j)];
            let y = self.t[(k + 1, j)];
            self.t[(k, j)] = g11.conj() * x + g21.conj() * y;
            self.t[(k + 1, j)] = g12.conj() * x + g22.conj() * y;
        }
        // t <- t g, q <- q g (columns k, k+1)
        for i in 0..n {
            let x = self.t[(i, k)];
            let y = self.t[(i, k + 1)];
            self.t[(i, k)] = x * g11 + y * g21;
            self.t[(i, k + 1)] = x * g12 + y * g22;
            let x = self.q[(i, k)];
            let y = self.q[(i, k + 1)];
            self.q[(i, k)] = x * g11 + y * g21;
            self.q[(i, k + 1)] = x * g12 + y * g22;
        }
        self.t[(k + 1, k)] = Complex64::new(0.0, 0.0);
        self.t[(k, k)] = t22;
        self.t[(k + 1, k + 1)] = t11;
    }
}
