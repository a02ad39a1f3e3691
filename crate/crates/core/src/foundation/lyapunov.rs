use num_complex::Complex64;

use super::{spectral_abscissa, ComplexMatrix, ComplexSchur, RealMatrix, HURWITZ_MARGIN};
use crate::error::{Error, Result};

/// Solves `a X + X a^T + q = 0` for symmetric `X` (Bartels–Stewart on the
/// complex Schur form of `a`).
///
/// `a` must be Hurwitz; the solution is then unique and, for PSD `q`, PSD.
pub fn solve_lyapunov(a: &RealMatrix, q: &RealMatrix) -> Result<RealMatrix> {
    let n = a.nrows();
    if !a.is_square() || q.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "Lyapunov equation needs square a and matching q, got {:?} and {:?}",
            a.shape(),
            q.shape()
        )));
    }
    if n == 0 {
        return Ok(RealMatrix::zeros(0, 0));
    }
    let abscissa = spectral_abscissa(a)?;
    if abscissa >= -HURWITZ_MARGIN {
        return Err(Error::NotHurwitz { abscissa });
    }

    let schur = ComplexSchur::from_real(a)?;
    let (u, t) = (&schur.q, &schur.t);
    let qc = q.map(|x| Complex64::new(x, 0.0));
    let c: ComplexMatrix = -(u.adjoint() * qc * u);

    // t y + y t^H = c, solved column by column from the right.
    let mut y = ComplexMatrix::zeros(n, n);
    for j in (0..n).rev() {
        let mut rhs = c.column(j).into_owned();
        for k in (j + 1)..n {
            let coef = t[(j, k)].conj();
            if coef != Complex64::new(0.0, 0.0) {
                rhs -= y.column(k) * coef;
            }
        }
        let shift = t[(j, j)].conj();
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for l in (i + 1)..n {
                acc -= t[(i, l)] * y[(l, j)];
            }
            y[(i, j)] = acc / (t[(i, i)] + shift);
        }
    }

    let x = u * y * u.adjoint();
    let x = x.map(|z| z.re);
    Ok((&x + x.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::inf_norm;
    use nalgebra::dmatrix;

    #[test]
    fn scalar() {
        let x = solve_lyapunov(&dmatrix![-1.0], &dmatrix![1.0]).unwrap();
        assert!((x[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn decoupled() {
        let a = dmatrix![-1.0, 0.0; 0.0, -2.0];
        let x = solve_lyapunov(&a, &RealMatrix::identity(2, 2)).unwrap();
        assert!((x - dmatrix![0.5, 0.0; 0.0, 0.25]).abs().max() < 1e-15);
    }

    #[test]
    fn complex_spectrum_residual() {
        let a = dmatrix![-0.5, 2.0, 0.0; -2.0, -0.5, 1.0; 0.0, 0.0, -3.0];
        let q = dmatrix![2.0, 0.5, 0.0; 0.5, 1.0, 0.1; 0.0, 0.1, 0.3];
        let x = solve_lyapunov(&a, &q).unwrap();
        let res = &a * &x + &x * a.transpose() + &q;
        assert!(inf_norm(&res) < 1e-12 * (1.0 + inf_norm(&q)));
        assert_eq!(x, x.transpose());
    }

    #[test]
    fn rejects_unstable() {
        assert!(matches!(
            solve_lyapunov(&dmatrix![1.0], &dmatrix![1.0]),
            Err(Error::NotHurwitz { .. })
        ));
    }
}
