use num_complex::Complex64;

use super::{
    complex_rank, eigenvalues, spectral_abscissa, ComplexMatrix, ComplexSchur, RealMatrix,
    HURWITZ_MARGIN,
};
use crate::error::{Error, Result};

/// Stabilizing solution of the continuous algebraic Riccati equation.
#[derive(Debug, Clone)]
pub struct AreSolution {
    /// Symmetric PSD `X` with `a^T X + X a - X b b^T X + q = 0`.
    pub x: RealMatrix,
    /// Spectral abscissa of `a - b b^T X`; negative by construction.
    pub closed_loop_abscissa: f64,
}

/// PBH test: returns the first eigenvalue of `a` with `Re >= 0` (up to the
/// Hurwitz margin) at which `[λI - a, b]` loses rank, or `None` if the pair is
/// stabilizable.
pub fn is_stabilizable_pair(a: &RealMatrix, b: &RealMatrix) -> Result<Option<Complex64>> {
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n {
        return Err(Error::Dimension(format!(
            "pair needs square a and b with matching rows, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    for lambda in eigenvalues(a)? {
        if lambda.re < -HURWITZ_MARGIN {
            continue;
        }
        let mut m = ComplexMatrix::zeros(n, n + b.ncols());
        for i in 0..n {
            for j in 0..n {
                let diag = if i == j { lambda } else { Complex64::new(0.0, 0.0) };
                m[(i, j)] = diag - a[(i, j)];
            }
            for j in 0..b.ncols() {
                m[(i, n + j)] = Complex64::new(b[(i, j)], 0.0);
            }
        }
        if complex_rank(&m) < n {
            return Ok(Some(lambda));
        }
    }
    Ok(None)
}

/// Solves `a^T X + X a - X b b^T X + q = 0` for the stabilizing `X`.
///
/// Uses the stable invariant subspace of the Hamiltonian matrix
/// `[[a, -b b^T], [-q, -a^T]]`, obtained from an ordered complex Schur form.
pub fn solve_are(a: &RealMatrix, b: &RealMatrix, q: &RealMatrix) -> Result<AreSolution> {
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n || q.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "Riccati data has inconsistent shapes a {:?}, b {:?}, q {:?}",
            a.shape(),
            b.shape(),
            q.shape()
        )));
    }
    if let Some(lambda) = is_stabilizable_pair(a, b)? {
        return Err(Error::Synthesis(format!(
            "pair is not stabilizable: uncontrollable mode at eigenvalue {lambda}"
        )));
    }
    if n == 0 {
        return Ok(AreSolution {
            x: RealMatrix::zeros(0, 0),
            closed_loop_abscissa: f64::NEG_INFINITY,
        });
    }

    let bbt = b * b.transpose();
    let mut h = RealMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-&bbt));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));

    let mut schur = ComplexSchur::from_real(&h)?;
    let scale = 1.0 + h.abs().max();
    let stable = schur.reorder(|l| l.re < -1e-12 * scale);
    if stable != n {
        return Err(Error::Synthesis(format!(
            "Hamiltonian matrix has {stable} stable eigenvalues, expected {n} \
             (eigenvalues on the imaginary axis)"
        )));
    }

    let u1 = schur.q.view((0, 0), (n, n)).into_owned();
    let u2 = schur.q.view((n, 0), (n, n)).into_owned();
    // X u1 = u2  <=>  u1^T X^T = u2^T
    let lu = u1.transpose().lu();
    let xt = lu.solve(&u2.transpose()).ok_or_else(|| {
        Error::Synthesis("stable invariant subspace is not a graph over the state space".into())
    })?;
    let xc = xt.transpose();
    let imag = xc.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let real_scale = 1.0 + xc.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    if imag > 1e-6 * real_scale {
        return Err(Error::Synthesis(format!(
            "Riccati solution has an imaginary part of size {imag:e}"
        )));
    }
    let x = xc.map(|z| z.re);
    let x = (&x + x.transpose()) * 0.5;

    let closed_loop = a - &bbt * &x;
    let closed_loop_abscissa = spectral_abscissa(&closed_loop)?;
    if closed_loop_abscissa >= -HURWITZ_MARGIN {
        return Err(Error::Synthesis(format!(
            "Riccati closed loop is not Hurwitz (abscissa {closed_loop_abscissa:e})"
        )));
    }
    Ok(AreSolution {
        x,
        closed_loop_abscissa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn scalar_unstable_plant() {
        let sol = solve_are(&dmatrix![1.0], &dmatrix![1.0], &dmatrix![1.0]).unwrap();
        assert!((sol.x[(0, 0)] - (1.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!((sol.closed_loop_abscissa + 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn stable_plant_zero_cost() {
        let sol = solve_are(&dmatrix![-1.0], &dmatrix![1.0], &dmatrix![0.0]).unwrap();
        assert!(sol.x[(0, 0)].abs() < 1e-14);
    }

    #[test]
    fn repeated_eigenvalues() {
        let a = RealMatrix::identity(2, 2) * 2.0;
        let b = RealMatrix::identity(2, 2);
        let sol = solve_are(&a, &b, &RealMatrix::identity(2, 2)).unwrap();
        let expect = 2.0 + 5f64.sqrt();
        assert!((sol.x.clone() - RealMatrix::identity(2, 2) * expect).abs().max() < 1e-10);
    }

    #[test]
    fn uncontrollable_unstable_mode_is_rejected() {
        let a = dmatrix![1.0, 0.0; 0.0, -1.0];
        let b = dmatrix![0.0; 1.0];
        let err = solve_are(&a, &b, &RealMatrix::identity(2, 2)).unwrap_err();
        assert!(matches!(err, Error::Synthesis(_)));
    }

    #[test]
    fn pbh_reports_failing_eigenvalue() {
        let a = dmatrix![1.0, 0.0; 0.0, -1.0];
        let b = dmatrix![0.0; 1.0];
        let lambda = is_stabilizable_pair(&a, &b).unwrap().unwrap();
        assert!((lambda - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(is_stabilizable_pair(&a, &dmatrix![1.0; 0.0]).unwrap().is_none());
    }
}
