//! Linear quantum stochastic systems in real quadrature form
//!
//! ```text
//! dx = Ã x dt + B̃ dw
//! dz = C̃ x dt + D̃ dw
//! ```
//!
//! The state is ordered `x = (q₁..qₙ, p₁..pₙ)` with `[qⱼ, pₖ] = 2iδⱼₖ`, and
//! the field quadratures of channel `k` are `w_k` and `w_{k + n_w/2}`. The
//! commutation matrix and the Itô matrix are always the canonical ones.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::resolvent_times;
use crate::error::{Error, Result};
use crate::foundation::{inf_norm, to_complex, ComplexMatrix, RealMatrix};
use crate::json;

pub const DEFAULT_PR_TOLERANCE: f64 = 1e-8;

/// How the classical noise inputs sit inside `w = [v₁; v₂; u₁; u₂]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelLayout {
    pub n_v1: usize,
    pub n_v2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuantum", into = "RawQuantum")]
pub struct QuantumSystem {
    atil: RealMatrix,
    btil: RealMatrix,
    ctil: RealMatrix,
    dtil: RealMatrix,
    layout: Option<ChannelLayout>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuantum {
    #[serde(rename = "Atil", with = "json::real")]
    atil: RealMatrix,
    #[serde(rename = "Btil", with = "json::real")]
    btil: RealMatrix,
    #[serde(rename = "Ctil", with = "json::real")]
    ctil: RealMatrix,
    #[serde(rename = "Dtil", with = "json::real")]
    dtil: RealMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layout: Option<ChannelLayout>,
}

impl TryFrom<RawQuantum> for QuantumSystem {
    type Error = Error;
    fn try_from(r: RawQuantum) -> Result<Self> {
        let q = QuantumSystem::new(r.atil, r.btil, r.ctil, r.dtil)?;
        match r.layout {
            Some(l) => q.with_layout(l),
            None => Ok(q),
        }
    }
}

impl From<QuantumSystem> for RawQuantum {
    fn from(q: QuantumSystem) -> Self {
        RawQuantum {
            atil: q.atil,
            btil: q.btil,
            ctil: q.ctil,
            dtil: q.dtil,
            layout: q.layout,
        }
    }
}

impl QuantumSystem {
    pub fn new(atil: RealMatrix, btil: RealMatrix, ctil: RealMatrix, dtil: RealMatrix) -> Result<Self> {
        let two_n = atil.nrows();
        let mut problems = Vec::new();
        if !atil.is_square() || !two_n.is_multiple_of(2) {
            problems.push(format!("Atil must be square of even size, got {:?}", atil.shape()));
        }
        if btil.nrows() != two_n {
            problems.push(format!("Btil must have {two_n} rows, got {}", btil.nrows()));
        }
        let n_w = btil.ncols();
        if !n_w.is_multiple_of(2) {
            problems.push(format!("n_w must be even, got {n_w}"));
        }
        if ctil.ncols() != two_n {
            problems.push(format!("Ctil must have {two_n} columns, got {}", ctil.ncols()));
        }
        let n_z = ctil.nrows();
        if !n_z.is_multiple_of(2) {
            problems.push(format!("n_z must be even, got {n_z}"));
        }
        if n_z > n_w {
            problems.push(format!("n_z = {n_z} exceeds n_w = {n_w}"));
        }
        if dtil.shape() != (n_z, n_w) {
            problems.push(format!("Dtil must be {n_z}x{n_w}, got {:?}", dtil.shape()));
        }
        if !problems.is_empty() {
            return Err(Error::Dimension(problems.join("; ")));
        }
        Ok(Self {
            atil,
            btil,
            ctil,
            dtil,
            layout: None,
        })
    }

    /// Attaches the classical channel split; it must cover exactly `n_w / 2` channels.
    pub fn with_layout(mut self, layout: ChannelLayout) -> Result<Self> {
        if 2 * (layout.n_v1 + layout.n_v2) != self.n_w() {
            return Err(Error::Dimension(format!(
                "layout {layout:?} does not cover n_w = {}",
                self.n_w()
            )));
        }
        self.layout = Some(layout);
        Ok(self)
    }

    pub fn atil(&self) -> &RealMatrix {
        &self.atil
    }
    pub fn btil(&self) -> &RealMatrix {
        &self.btil
    }
    pub fn ctil(&self) -> &RealMatrix {
        &self.ctil
    }
    pub fn dtil(&self) -> &RealMatrix {
        &self.dtil
    }
    pub fn layout(&self) -> Option<ChannelLayout> {
        self.layout
    }
    /// Number of oscillators.
    pub fn n(&self) -> usize {
        self.atil.nrows() / 2
    }
    pub fn n_w(&self) -> usize {
        self.btil.ncols()
    }
    pub fn n_z(&self) -> usize {
        self.ctil.nrows()
    }
    /// Number of field channels, `n_w / 2`.
    pub fn channels(&self) -> usize {
        self.n_w() / 2
    }
}

/// `J_n = [[0, I], [-I, 0]]` of size `2n`.
pub fn symplectic_form(n: usize) -> RealMatrix {
    let mut j = RealMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// Canonical Itô matrix `F = I + i J_{n_w/2}`.
pub fn ito_matrix(n_w: usize) -> Result<ComplexMatrix> {
    if !n_w.is_multiple_of(2) {
        return Err(Error::Dimension(format!("n_w must be even, got {n_w}")));
    }
    let j = symplectic_form(n_w / 2);
    Ok(ComplexMatrix::from_fn(n_w, n_w, |r, c| {
        Complex64::new(if r == c { 1.0 } else { 0.0 }, j[(r, c)])
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalStructures {
    pub j: RealMatrix,
    pub f: ComplexMatrix,
}

impl CanonicalStructures {
    pub fn new(n: usize, n_w: usize) -> Result<Self> {
        Ok(Self {
            j: symplectic_form(n),
            f: ito_matrix(n_w)?,
        })
    }
}

/// Residuals of the three realizability constraints (induced ∞-norms).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrReport {
    /// `‖ÃJ + JÃᵀ + B̃JB̃ᵀ‖`
    pub residual1: f64,
    /// `‖B̃JD̃ᵀ + JC̃ᵀ‖`
    pub residual2: f64,
    /// `‖D̃JD̃ᵀ - J‖`
    pub residual3: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn check_physical_realizability(q: &QuantumSystem, tol: f64) -> PrReport {
    let jn = symplectic_form(q.n());
    let jw = symplectic_form(q.channels());
    let jz = symplectic_form(q.n_z() / 2);
    let residual1 = commutation_flow_residual(q);
    let residual2 = inf_norm(&(q.btil() * &jw * q.dtil().transpose() + &jn * q.ctil().transpose()));
    let residual3 = inf_norm(&(q.dtil() * &jw * q.dtil().transpose() - jz));
    PrReport {
        residual1,
        residual2,
        residual3,
        tolerance: tol,
        pass: residual1 < tol && residual2 < tol && residual3 < tol,
    }
}

/// `max(1, ‖Ã‖, ‖B̃‖, ‖C̃‖, ‖D̃‖)²`: the residuals are quadratic in the
/// entries, so absolute tolerances are multiplied by this for large systems.
pub fn realizability_scale(q: &QuantumSystem) -> f64 {
    [q.atil(), q.btil(), q.ctil(), q.dtil()]
        .iter()
        .map(|m| inf_norm(m))
        .fold(1.0, f64::max)
        .powi(2)
}

/// Norm of the generator of the commutation-matrix flow at the canonical
/// value; zero exactly when the first realizability constraint holds.
pub fn commutation_flow_residual(q: &QuantumSystem) -> f64 {
    let jn = symplectic_form(q.n());
    let jw = symplectic_form(q.channels());
    let a = q.atil();
    inf_norm(&(a * &jn + &jn * a.transpose() + q.btil() * jw * q.btil().transpose()))
}

/// `ΞQ(s) = C̃(sI - Ã)⁻¹B̃ + D̃`.
pub fn quantum_transfer(q: &QuantumSystem, s: Complex64) -> Result<ComplexMatrix> {
    let g = resolvent_times(q.atil(), q.btil(), s)?;
    Ok(to_complex(q.ctil()) * g + to_complex(q.dtil()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::scalar_quantum;
    use nalgebra::dmatrix;

    #[test]
    fn symplectic_identities() {
        for n in 1..5 {
            let j = symplectic_form(n);
            assert_eq!(&j * &j, -RealMatrix::identity(2 * n, 2 * n));
            assert_eq!(j.transpose(), -&j);
        }
    }

    #[test]
    fn ito_matrix_is_hermitian_with_identity_real_part() {
        let f = ito_matrix(4).unwrap();
        assert_eq!(f.adjoint(), f);
        let two = &f + f.map(|z| z.conj());
        assert_eq!(two, to_complex(&(RealMatrix::identity(4, 4) * 2.0)));
        assert!(ito_matrix(3).is_err());
    }

    #[test]
    fn scalar_is_realizable() {
        let r = check_physical_realizability(&scalar_quantum(), DEFAULT_PR_TOLERANCE);
        assert!(r.pass);
        assert!(r.residual1 < 1e-12 && r.residual2 < 1e-12 && r.residual3 < 1e-12);
    }

    #[test]
    fn pure_output_without_input_fails() {
        let q = QuantumSystem::new(
            RealMatrix::zeros(2, 2),
            RealMatrix::zeros(2, 2),
            RealMatrix::identity(2, 2),
            RealMatrix::zeros(2, 2),
        )
        .unwrap();
        let r = check_physical_realizability(&q, DEFAULT_PR_TOLERANCE);
        assert!(!r.pass);
        assert_eq!(r.residual2, 1.0);
    }

    #[test]
    fn drift_perturbations() {
        let base = scalar_quantum();
        // For one oscillator ÃJ + JÃᵀ = tr(Ã) J, so only diagonal entries matter.
        let mut a = base.atil().clone();
        a[(0, 0)] += 0.1;
        let q = QuantumSystem::new(a, base.btil().clone(), base.ctil().clone(), base.dtil().clone())
            .unwrap();
        let r = check_physical_realizability(&q, DEFAULT_PR_TOLERANCE);
        assert!(!r.pass);
        assert!((r.residual1 - 0.1).abs() < 1e-15);

        let mut a = base.atil().clone();
        a[(0, 1)] += 0.1;
        let q = QuantumSystem::new(a, base.btil().clone(), base.ctil().clone(), base.dtil().clone())
            .unwrap();
        assert!(commutation_flow_residual(&q) < 1e-15);
    }

    #[test]
    fn contraction_breaks_commutation() {
        let q = QuantumSystem::new(
            -RealMatrix::identity(2, 2),
            RealMatrix::zeros(2, 2),
            RealMatrix::zeros(2, 2),
            RealMatrix::zeros(2, 2),
        )
        .unwrap();
        assert_eq!(commutation_flow_residual(&q), 2.0);
    }

    #[test]
    fn scalar_transfer_at_zero() {
        let t = quantum_transfer(&scalar_quantum(), Complex64::new(0.0, 0.0)).unwrap();
        let expect = to_complex(&dmatrix![1.0, 1.0, 0.0, 0.0; 0.0, 0.0, 0.0, 1.0]);
        assert!((t - expect).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn zero_output_map_gives_feedthrough() {
        let base = scalar_quantum();
        let q = QuantumSystem::new(
            base.atil().clone(),
            base.btil().clone(),
            RealMatrix::zeros(2, 2),
            base.dtil().clone(),
        )
        .unwrap();
        let t = quantum_transfer(&q, Complex64::new(0.7, -3.0)).unwrap();
        assert_eq!(t, to_complex(base.dtil()));
    }

    #[test]
    fn dimension_rules() {
        assert!(QuantumSystem::new(
            RealMatrix::zeros(3, 3),
            RealMatrix::zeros(3, 2),
            RealMatrix::zeros(2, 3),
            RealMatrix::zeros(2, 2)
        )
        .is_err());
        // n_z > n_w
        assert!(QuantumSystem::new(
            RealMatrix::zeros(2, 2),
            RealMatrix::zeros(2, 2),
            RealMatrix::zeros(4, 2),
            RealMatrix::zeros(4, 2)
        )
        .is_err());
    }
}
