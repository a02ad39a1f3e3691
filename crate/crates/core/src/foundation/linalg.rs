use nalgebra::{DMatrix, Schur, SVD};
use num_complex::Complex64;

use super::{ComplexMatrix, RealMatrix, RealVector};
use crate::error::{Error, Result};

/// A matrix counts as Hurwitz when its spectral abscissa is below `-HURWITZ_MARGIN`.
pub const HURWITZ_MARGIN: f64 = 1e-9;

const RANK_RTOL: f64 = 1e-12;

fn max_qr_iterations(n: usize) -> usize {
    1000 + 100 * n
}

/// Shifted QR Schur factorization `m = q t q^H`, returned as `(q, t)`.
///
/// The QR iteration can cycle on matrices with exact spectral symmetry
/// (Hamiltonians in particular). When it does, the matrix is first moved by
/// a fixed Householder reflection, which breaks the symmetry without
/// changing the spectrum, and the reflection is folded back into `q`.
pub(crate) fn schur_factor<T>(m: DMatrix<T>) -> Result<(DMatrix<T>, DMatrix<T>)>
where
    T: nalgebra::ComplexField<RealField = f64>,
{
    let n = m.nrows();
    let iters = max_qr_iterations(n);
    if let Some(s) = Schur::try_new(m.clone(), f64::EPSILON, iters) {
        return Ok(s.unpack());
    }
    for shift in 1..=3 {
        let v = DMatrix::<f64>::from_fn(n, 1, |i, _| 1.0 + ((i * 7 + shift * 3) % 11) as f64);
        let h = DMatrix::<f64>::identity(n, n) - (&v * v.transpose()) * (2.0 / v.norm_squared());
        let h: DMatrix<T> = h.map(T::from_real);
        let moved = &h * &m * &h;
        if let Some(s) = Schur::try_new(moved, f64::EPSILON, iters) {
            let (q, t) = s.unpack();
            return Ok((h * q, t));
        }
    }
    Err(Error::Convergence)
}

/// All eigenvalues of a real square matrix, with multiplicity.
///
/// Hessenberg reduction followed by shifted QR (real Schur form).
pub fn eigenvalues(m: &RealMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (_, t) = schur_factor(m.clone())?;
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    while k < n {
        if k + 1 < n && t[(k + 1, k)] != 0.0 {
            let (a, b, c, d) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
            let mid = 0.5 * (a + d);
            let disc = 0.25 * (a - d) * (a - d) + b * c;
            if disc < 0.0 {
                let im = (-disc).sqrt();
                out.push(Complex64::new(mid, im));
                out.push(Complex64::new(mid, -im));
            } else {
                let r = disc.sqrt();
                out.push(Complex64::new(mid + r, 0.0));
                out.push(Complex64::new(mid - r, 0.0));
            }
            k += 2;
        } else {
            out.push(Complex64::new(t[(k, k)], 0.0));
            k += 1;
        }
    }
    Ok(out)
}

/// Largest real part over the spectrum. `-inf` for an empty matrix.
pub fn spectral_abscissa(m: &RealMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

pub fn is_hurwitz(m: &RealMatrix) -> Result<bool> {
    Ok(spectral_abscissa(m)? < -HURWITZ_MARGIN)
}

/// Singular values in descending order.
pub fn singular_values(m: &RealMatrix) -> RealVector {
    if m.is_empty() {
        return RealVector::zeros(0);
    }
    SVD::new(m.clone(), false, false).singular_values
}

/// Singular values at or below this are treated as zero.
pub fn rank_threshold(rows: usize, cols: usize, norm2: f64) -> f64 {
    rows.max(cols) as f64 * norm2 * RANK_RTOL
}

pub fn rank(m: &RealMatrix) -> usize {
    let sv = singular_values(m);
    let norm2 = sv.iter().copied().fold(0.0, f64::max);
    let tol = rank_threshold(m.nrows(), m.ncols(), norm2);
    sv.iter().filter(|&&s| s > tol).count()
}

pub fn complex_rank(m: &ComplexMatrix) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = SVD::new(m.clone(), false, false).singular_values;
    let norm2 = sv.iter().copied().fold(0.0, f64::max);
    let tol = rank_threshold(m.nrows(), m.ncols(), norm2);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Orthonormal basis of the null space, one vector per column.
pub fn kernel_basis(m: &RealMatrix) -> RealMatrix {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return RealMatrix::zeros(0, 0);
    }
    if rows == 0 {
        return RealMatrix::identity(cols, cols);
    }
    // Zero rows leave the kernel unchanged and give a full set of right
    // singular vectors for wide inputs.
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let norm2 = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = rank_threshold(rows, cols, norm2);
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= tol)
        .collect();
    let mut basis = RealMatrix::zeros(cols, null.len());
    for (k, &i) in null.iter().enumerate() {
        basis.set_column(k, &v_t.row(i).transpose());
    }
    basis
}

/// Moore–Penrose pseudoinverse with the shared numerical-rank threshold.
pub fn pseudoinverse(m: &RealMatrix) -> RealMatrix {
    let (rows, cols) = m.shape();
    if m.is_empty() {
        return RealMatrix::zeros(cols, rows);
    }
    let svd = SVD::new(m.clone(), true, true);
    let norm2 = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = rank_threshold(rows, cols, norm2);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut out = RealMatrix::zeros(cols, rows);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            out += (v_t.row(i).transpose() * u.column(i).transpose()) / s;
        }
    }
    out
}

/// Induced infinity norm (largest absolute row sum).
pub fn inf_norm(m: &RealMatrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn complex_inf_norm(m: &ComplexMatrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn to_complex(m: &RealMatrix) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}
