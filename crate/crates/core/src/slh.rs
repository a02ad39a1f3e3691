//! Scattering, coupling and Hamiltonian parameters `(S, Λ, R)`.
//!
//! `Λ` and `R` act on the mode-interleaved quadrature vector
//! `x = (q₁, p₁, q₂, p₂, …)`, so `L = Λx` and `H = ½xᵀRx`. State-space
//! matrices use the block ordering `(q₁, …, qₙ, p₁, …, pₙ)`; the permutation
//! from [`permutation_p`] converts between the two.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::{complex_inf_norm, inf_norm, to_complex, ComplexMatrix, RealMatrix};
use crate::quantum::{symplectic_form, QuantumSystem};

const UNITARY_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlhTriple {
    #[serde(rename = "S", with = "crate::json::complex")]
    s: ComplexMatrix,
    #[serde(rename = "Lambda", with = "crate::json::complex")]
    lambda: ComplexMatrix,
    #[serde(rename = "R", with = "crate::json::real")]
    r: RealMatrix,
}

impl SlhTriple {
    pub fn new(s: ComplexMatrix, lambda: ComplexMatrix, r: RealMatrix) -> Result<Self> {
        let m = s.nrows();
        if !s.is_square() || lambda.nrows() != m {
            return Err(Error::Dimension(format!(
                "S is {:?} and Lambda is {:?}; need S square with one row per Lambda row",
                s.shape(),
                lambda.shape()
            )));
        }
        if !r.is_square() || r.nrows() != lambda.ncols() || !r.nrows().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "R is {:?} and Lambda is {:?}; need R square, even, matching Lambda's columns",
                r.shape(),
                lambda.shape()
            )));
        }
        let id = ComplexMatrix::identity(m, m);
        let dev = complex_inf_norm(&(s.adjoint() * &s - &id))
            .max(complex_inf_norm(&(&s * s.adjoint() - &id)));
        if dev > UNITARY_TOL {
            return Err(Error::Parameter(format!("S is not unitary (deviation {dev:e})")));
        }
        let asym = inf_norm(&(&r - r.transpose()));
        if asym > SYMMETRY_TOL * (1.0 + inf_norm(&r)) {
            return Err(Error::Parameter(format!("R is not symmetric (deviation {asym:e})")));
        }
        Ok(Self { s, lambda, r })
    }

    /// `(I, 0, 0)` with `channels` fields and `modes` oscillators.
    pub fn identity(channels: usize, modes: usize) -> Self {
        Self {
            s: ComplexMatrix::identity(channels, channels),
            lambda: ComplexMatrix::zeros(channels, 2 * modes),
            r: RealMatrix::zeros(2 * modes, 2 * modes),
        }
    }

    pub fn s(&self) -> &ComplexMatrix {
        &self.s
    }
    pub fn lambda(&self) -> &ComplexMatrix {
        &self.lambda
    }
    pub fn r(&self) -> &RealMatrix {
        &self.r
    }
    pub fn channels(&self) -> usize {
        self.s.nrows()
    }
    pub fn modes(&self) -> usize {
        self.r.nrows() / 2
    }
}

/// `L = αa + βa*` for one mode, with `a = (q + ip)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingRow {
    pub alpha: Complex64,
    pub beta: Complex64,
}

/// Coefficient of `x_kᵀ(·)x_j` in the direct coupling Hamiltonian between modes `j < k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectCoupling {
    pub j: usize,
    pub k: usize,
    #[serde(with = "crate::json::real")]
    pub coefficient: RealMatrix,
}

/// Permutation taking `(f₁, …, f₂ₙ)` to `(f₁, f₁₊ₙ, f₂, f₂₊ₙ, …, fₙ, f₂ₙ)`.
pub fn permutation_p(two_n: usize) -> Result<RealMatrix> {
    if !two_n.is_multiple_of(2) {
        return Err(Error::Dimension(format!("permutation size must be even, got {two_n}")));
    }
    let n = two_n / 2;
    let mut p = RealMatrix::zeros(two_n, two_n);
    for k in 0..n {
        p[(2 * k, k)] = 1.0;
        p[(2 * k + 1, k + n)] = 1.0;
    }
    Ok(p)
}

fn interleave(n: usize) -> RealMatrix {
    permutation_p(2 * n).expect("even by construction")
}

/// `R` in block quadrature ordering: `¼(-JÃ + ÃᵀJ)`.
pub fn extract_r_blocks(q: &QuantumSystem) -> RealMatrix {
    let j = symplectic_form(q.n());
    let a = q.atil();
    let r = (-(&j * a) + a.transpose() * &j) * 0.25;
    (&r + r.transpose()) * 0.5
}

/// Hamiltonian matrix `R` in interleaved ordering.
pub fn extract_r(q: &QuantumSystem) -> RealMatrix {
    let p = interleave(q.n());
    let r = &p * extract_r_blocks(q) * p.transpose();
    (&r + r.transpose()) * 0.5
}

/// Coupling matrix `Λ` in block quadrature ordering.
///
/// Row `k` is `-(i/2)(G_k + iG_{k+m})` with `G = B̃ᵀJ` and `m` channels; field
/// channel `k` carries input quadratures `w_k` and `w_{k+m}`.
pub fn extract_lambda_blocks(q: &QuantumSystem) -> ComplexMatrix {
    let g = q.btil().transpose() * symplectic_form(q.n());
    let m = q.channels();
    let half = Complex64::new(0.0, -0.5);
    ComplexMatrix::from_fn(m, 2 * q.n(), |k, c| {
        half * Complex64::new(g[(k, c)], g[(k + m, c)])
    })
}

/// Coupling matrix `Λ` in interleaved ordering.
pub fn extract_lambda(q: &QuantumSystem) -> ComplexMatrix {
    extract_lambda_blocks(q) * to_complex(&interleave(q.n()).transpose())
}

/// Scattering matrix is the identity for state-space systems.
pub fn to_slh(q: &QuantumSystem) -> SlhTriple {
    let m = q.channels();
    SlhTriple {
        s: ComplexMatrix::identity(m, m),
        lambda: extract_lambda(q),
        r: extract_r(q),
    }
}

/// `(α, β) = (λ_q - iλ_p, λ_q + iλ_p)` for one `[λ_q, λ_p]` pair.
pub fn ladder_coefficients(lambda_q: Complex64, lambda_p: Complex64) -> CouplingRow {
    let i = Complex64::i();
    CouplingRow {
        alpha: lambda_q - i * lambda_p,
        beta: lambda_q + i * lambda_p,
    }
}

/// Ladder coefficients of channel `row` on mode `mode` of an interleaved `Λ`.
pub fn mode_coupling(lambda: &ComplexMatrix, row: usize, mode: usize) -> CouplingRow {
    ladder_coefficients(lambda[(row, 2 * mode)], lambda[(row, 2 * mode + 1)])
}

fn im(m: &ComplexMatrix) -> RealMatrix {
    m.map(|z| z.im)
}

/// Cascade `g2 ◁ g1`: outputs of `g1` feed the inputs of `g2`.
///
/// The result acts on the joint state `[x₁; x₂]`.
pub fn series_product(g2: &SlhTriple, g1: &SlhTriple) -> Result<SlhTriple> {
    if g1.channels() != g2.channels() {
        return Err(Error::Dimension(format!(
            "series product needs equal channel counts, got {} and {}",
            g2.channels(),
            g1.channels()
        )));
    }
    let m = g1.channels();
    let (n1, n2) = (g1.r.nrows(), g2.r.nrows());
    let s = &g2.s * &g1.s;

    let s2l1 = &g2.s * &g1.lambda;
    let mut lambda = ComplexMatrix::zeros(m, n1 + n2);
    lambda.view_mut((0, 0), (m, n1)).copy_from(&s2l1);
    lambda.view_mut((0, n1), (m, n2)).copy_from(&g2.lambda);

    // (1/2i)(L₂†S₂L₁ - L₁†S₂†L₂) = x₂ᵀ Im(Λ₂ᴴS₂Λ₁) x₁
    let cross = im(&(g2.lambda.adjoint() * &s2l1));
    let mut r = RealMatrix::zeros(n1 + n2, n1 + n2);
    r.view_mut((0, 0), (n1, n1)).copy_from(&g1.r);
    r.view_mut((n1, n1), (n2, n2)).copy_from(&g2.r);
    r.view_mut((n1, 0), (n2, n1)).copy_from(&cross);
    r.view_mut((0, n1), (n1, n2)).copy_from(&cross.transpose());
    SlhTriple::new(s, lambda, r)
}

/// `R_jkᵀ - Im(Λ_kᴴΛ_j)` for every mode pair `j < k`, where `Λ_j` is the
/// two-column block of `Λ` belonging to mode `j`.
pub fn direct_coupling_coefficients(slh: &SlhTriple) -> Vec<DirectCoupling> {
    let n = slh.modes();
    let m = slh.channels();
    let mut out = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            let lj = slh.lambda.view((0, 2 * j), (m, 2));
            let lk = slh.lambda.view((0, 2 * k), (m, 2));
            let rjk = slh.r.view((2 * j, 2 * k), (2, 2)).transpose();
            out.push(DirectCoupling {
                j,
                k,
                coefficient: rjk - im(&(lk.adjoint() * lj)),
            });
        }
    }
    out
}

/// Recovers `(Ã, B̃)` in block quadrature ordering from `(R, Λ)`.
pub fn reconstruct_state_space(slh: &SlhTriple) -> Result<(RealMatrix, RealMatrix)> {
    let n = slh.modes();
    let m = slh.channels();
    if slh.lambda.ncols() != 2 * n {
        return Err(Error::Dimension("Lambda columns do not match R".into()));
    }
    let p = interleave(n);
    let r = p.transpose() * &slh.r * &p;
    let lambda = &slh.lambda * to_complex(&p);
    let j = symplectic_form(n);
    let atil = &j * (r + im(&(lambda.adjoint() * &lambda))) * 2.0;

    // Λ_k = (G_{k+m} - iG_k)/2 with G = B̃ᵀJ, and B̃ = JGᵀ.
    let mut g = RealMatrix::zeros(2 * m, 2 * n);
    for k in 0..m {
        for c in 0..2 * n {
            g[(k, c)] = -2.0 * lambda[(k, c)].im;
            g[(k + m, c)] = 2.0 * lambda[(k, c)].re;
        }
    }
    let btil = &j * g.transpose();
    Ok((atil, btil))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::scalar_quantum;
    use nalgebra::{dmatrix, dvector};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn permutation_rule() {
        assert_eq!(permutation_p(2).unwrap(), RealMatrix::identity(2, 2));
        let p4 = permutation_p(4).unwrap();
        assert_eq!(p4 * dvector![1.0, 2.0, 3.0, 4.0], dvector![1.0, 3.0, 2.0, 4.0]);
        let p6 = permutation_p(6).unwrap();
        assert_eq!(
            &p6 * dvector![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            dvector![1.0, 4.0, 2.0, 5.0, 3.0, 6.0]
        );
        assert_eq!(&p6 * p6.transpose(), RealMatrix::identity(6, 6));
        assert!(permutation_p(3).is_err());
    }

    #[test]
    fn scalar_parameters() {
        let q = scalar_quantum();
        assert!(inf_norm(&extract_r(&q)) < 1e-12);
        let l = extract_lambda(&q);
        let expect = dmatrix![c(-1.0, 0.0), c(0.0, -0.5); c(0.5, 0.0), c(0.0, 0.0)];
        assert!(complex_inf_norm(&(l - expect)) < 1e-12);
    }

    #[test]
    fn rotation_hamiltonian() {
        let q = QuantumSystem::new(
            symplectic_form(1),
            RealMatrix::zeros(2, 2),
            RealMatrix::zeros(2, 2),
            RealMatrix::zeros(2, 2),
        )
        .unwrap();
        assert_eq!(extract_r(&q), RealMatrix::identity(2, 2) * 0.5);
    }

    #[test]
    fn ladder_examples() {
        let r = ladder_coefficients(c(-1.0, 0.0), c(0.0, -0.5));
        assert_eq!((r.alpha, r.beta), (c(-1.5, 0.0), c(-0.5, 0.0)));
        let r = ladder_coefficients(c(0.5, 0.0), c(0.0, 0.0));
        assert_eq!((r.alpha, r.beta), (c(0.5, 0.0), c(0.5, 0.0)));
        let r = ladder_coefficients(c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!((r.alpha, r.beta), (c(0.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn scalar_reconstruction() {
        let q = scalar_quantum();
        let (a, b) = reconstruct_state_space(&to_slh(&q)).unwrap();
        assert!((a - q.atil()).abs().max() < 1e-12);
        assert!((b - q.btil()).abs().max() < 1e-12);
        let (a, b) = reconstruct_state_space(&SlhTriple::identity(2, 1)).unwrap();
        assert_eq!(a, RealMatrix::zeros(2, 2));
        assert_eq!(b, RealMatrix::zeros(2, 4));
    }

    #[test]
    fn series_with_identity() {
        let g = to_slh(&scalar_quantum());
        let joint = series_product(&SlhTriple::identity(2, 1), &g).unwrap();
        assert_eq!(joint.lambda().view((0, 0), (2, 2)), g.lambda().view((0, 0), (2, 2)));
        assert!(joint.lambda().view((0, 2), (2, 2)).iter().all(|z| *z == c(0.0, 0.0)));
        assert_eq!(joint.r().view((0, 0), (2, 2)).into_owned(), *g.r());
        assert!(joint.r().view((2, 0), (2, 4)).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn series_phases_multiply() {
        let (p1, p2) = (0.3, -1.1);
        let g1 = SlhTriple::new(
            dmatrix![Complex64::from_polar(1.0, p1)],
            ComplexMatrix::zeros(1, 2),
            RealMatrix::zeros(2, 2),
        )
        .unwrap();
        let g2 = SlhTriple::new(
            dmatrix![Complex64::from_polar(1.0, p2)],
            ComplexMatrix::zeros(1, 2),
            RealMatrix::zeros(2, 2),
        )
        .unwrap();
        let s = series_product(&g2, &g1).unwrap().s()[(0, 0)];
        assert!((s - Complex64::from_polar(1.0, p1 + p2)).norm() < 1e-15);
        assert!(series_product(&g2, &SlhTriple::identity(2, 1)).is_err());
    }

    #[test]
    fn single_mode_has_no_direct_coupling() {
        assert!(direct_coupling_coefficients(&to_slh(&scalar_quantum())).is_empty());
    }

    #[test]
    fn validation_of_triple() {
        let bad_s = SlhTriple::new(dmatrix![c(2.0, 0.0)], ComplexMatrix::zeros(1, 2), RealMatrix::zeros(2, 2));
        assert!(matches!(bad_s, Err(Error::Parameter(_))));
        let bad_r = SlhTriple::new(
            dmatrix![c(1.0, 0.0)],
            ComplexMatrix::zeros(1, 2),
            dmatrix![0.0, 1.0; 0.0, 0.0],
        );
        assert!(matches!(bad_r, Err(Error::Parameter(_))));
        let bad_dim = SlhTriple::new(dmatrix![c(1.0, 0.0)], ComplexMatrix::zeros(1, 3), RealMatrix::zeros(2, 2));
        assert!(matches!(bad_dim, Err(Error::Dimension(_))));
    }
}
