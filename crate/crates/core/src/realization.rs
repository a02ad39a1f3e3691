//! Construction of a physically realizable quantum system that contains a
//! given classical system as an invariant commutative subsystem.
//!
//! The quantum system has `2n` state quadratures `x = [ξ; θ]`, input fields
//! `w = [v₁; v₂; u₁; u₂]` and outputs `z = [y; y']`, with the block structure
//!
//! ```text
//! Ã = [A  0 ]   B̃ = [B  0  0  0 ]   C̃ = [C  0 ]   D̃ = [0  D  0  0 ]
//!     [A₁ A₂]        [B₁ B₂ B₃ B₄]        [C₁ C₂]        [D₁ D₂ D₃ D₄]
//! ```
//!
//! `A₂`, `B₄`, `D₄`, `C₁`, `C₂` and `A₁` are fixed by the realizability
//! constraints once the free blocks are chosen.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{classical_transfer, ClassicalSystem};
use crate::error::{Error, Result};
use crate::foundation::{
    complex_inf_norm, inf_norm, is_hurwitz, pseudoinverse, rank, solve_are,
    spectral_abscissa, to_complex, RealMatrix,
};
use crate::quantum::{
    check_physical_realizability, quantum_transfer, realizability_scale, ChannelLayout, QuantumSystem,
    DEFAULT_PR_TOLERANCE,
};

const PARAM_TOL: f64 = 1e-10;

/// How the block `B₃` (and hence `A₂ = -Aᵀ - B₃Bᵀ`) is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum B3Strategy {
    /// `Pseudoinverse` when `B` has full row rank, otherwise `Riccati`.
    Auto,
    /// `B₃ = (-A - Aᵀ)(Bᵀ)⁺`, which makes `A₂ = A` when `BBᵀ` is invertible.
    Pseudoinverse,
    /// `B₃ = X B` with `X` the stabilizing Riccati solution for `(-A, B)`, `Q = I`.
    Riccati,
    /// Caller-supplied `B₃`, checked for a Hurwitz `A₂`.
    Explicit(RealMatrix),
}

impl B3Strategy {
    /// Replaces `Auto` by the concrete strategy it stands for.
    pub fn resolve(&self, sys: &ClassicalSystem) -> B3Strategy {
        match self {
            B3Strategy::Auto if rank(sys.b()) == sys.n() => B3Strategy::Pseudoinverse,
            B3Strategy::Auto => B3Strategy::Riccati,
            other => other.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            B3Strategy::Auto => "auto",
            B3Strategy::Pseudoinverse => "pseudoinverse",
            B3Strategy::Riccati => "riccati",
            B3Strategy::Explicit(_) => "explicit",
        }
    }
}

/// The free choices left open by the construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeParameters {
    /// `n × n_v1`
    pub b1: RealMatrix,
    /// `n × n_v2`
    pub b2: RealMatrix,
    pub b3: B3Strategy,
    /// `n_v2 × n`, columns in `ker D`; shifts `B₄` by `N₁ᵀ`.
    pub n1: RealMatrix,
    /// `n_v2 × n_y`, columns in `ker D`; shifts `D₄` by `N₂ᵀ`.
    pub n2: RealMatrix,
    /// Symmetric `n × n` part of `A₁`.
    pub xi: RealMatrix,
    /// `n_y × n_v1`
    pub d1: RealMatrix,
    /// `n_y × n_v2`
    pub d2: RealMatrix,
    /// `n_y × n_v1`
    pub d3: RealMatrix,
}

impl FreeParameters {
    /// All free blocks zero, `B₃` chosen automatically.
    pub fn zeros(sys: &ClassicalSystem) -> Self {
        let (n, v1, v2, y) = (sys.n(), sys.n_v1(), sys.n_v2(), sys.n_y());
        Self {
            b1: RealMatrix::zeros(n, v1),
            b2: RealMatrix::zeros(n, v2),
            b3: B3Strategy::Auto,
            n1: RealMatrix::zeros(v2, n),
            n2: RealMatrix::zeros(v2, y),
            xi: RealMatrix::zeros(n, n),
            d1: RealMatrix::zeros(y, v1),
            d2: RealMatrix::zeros(y, v2),
            d3: RealMatrix::zeros(y, v1),
        }
    }

    pub fn with_b3(mut self, b3: B3Strategy) -> Self {
        self.b3 = b3;
        self
    }

    /// Shape, symmetry and kernel checks. The bilinear `D` constraint needs
    /// `D₄` and is checked during construction.
    pub fn check(&self, sys: &ClassicalSystem) -> Result<()> {
        let (n, v1, v2, y) = (sys.n(), sys.n_v1(), sys.n_v2(), sys.n_y());
        let shapes = [
            ("B1", &self.b1, (n, v1)),
            ("B2", &self.b2, (n, v2)),
            ("N1", &self.n1, (v2, n)),
            ("N2", &self.n2, (v2, y)),
            ("Xi", &self.xi, (n, n)),
            ("D1", &self.d1, (y, v1)),
            ("D2", &self.d2, (y, v2)),
            ("D3", &self.d3, (y, v1)),
        ];
        let wrong: Vec<String> = shapes
            .iter()
            .filter(|(_, m, s)| m.shape() != *s)
            .map(|(name, m, s)| format!("{name} is {:?}, expected {s:?}", m.shape()))
            .collect();
        if !wrong.is_empty() {
            return Err(Error::Dimension(wrong.join("; ")));
        }
        if let B3Strategy::Explicit(b3) = &self.b3 {
            if b3.shape() != (n, v1) {
                return Err(Error::Dimension(format!(
                    "B3 is {:?}, expected {:?}",
                    b3.shape(),
                    (n, v1)
                )));
            }
        }
        let asym = inf_norm(&(&self.xi - self.xi.transpose()));
        if asym > PARAM_TOL * (1.0 + inf_norm(&self.xi)) {
            return Err(Error::Parameter(format!("Xi is not symmetric (‖Xi - Xiᵀ‖ = {asym:e})")));
        }
        for (name, m) in [("N1", &self.n1), ("N2", &self.n2)] {
            let res = inf_norm(&(sys.d() * m));
            if res > PARAM_TOL * (1.0 + inf_norm(sys.d()) * inf_norm(m)) {
                return Err(Error::Parameter(format!(
                    "columns of {name} are not in ker D (‖D·{name}‖ = {res:e})"
                )));
            }
        }
        Ok(())
    }
}

/// Output and input selections picking `y` out of `z` and `v` out of `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionMatrices {
    /// `[I, 0]`, `n_y × 2n_y`
    pub mo: RealMatrix,
    /// `[I, 0]ᵀ`, `2n_v × n_v`
    pub mi: RealMatrix,
}

impl SelectionMatrices {
    pub fn new(n_y: usize, n_v: usize) -> Self {
        Self {
            mo: RealMatrix::identity(n_y, 2 * n_y),
            mi: RealMatrix::identity(2 * n_v, n_v),
        }
    }
}

/// Chooses `B₃` so that `A₂ = -Aᵀ - B₃Bᵀ` is Hurwitz.
pub fn select_b3(sys: &ClassicalSystem, strategy: &B3Strategy) -> Result<RealMatrix> {
    let a = sys.a();
    let b = sys.b();
    let b3 = match strategy.resolve(sys) {
        B3Strategy::Pseudoinverse => {
            if rank(b) < sys.n() {
                return Err(Error::Synthesis(
                    "pseudoinverse choice of B3 needs B of full row rank".into(),
                ));
            }
            (-a - a.transpose()) * pseudoinverse(&b.transpose())
        }
        B3Strategy::Riccati => {
            let sol = solve_are(&(-a), b, &RealMatrix::identity(sys.n(), sys.n()))?;
            sol.x * b
        }
        B3Strategy::Explicit(m) => {
            if m.shape() != b.shape() {
                return Err(Error::Dimension(format!(
                    "B3 is {:?}, expected {:?}",
                    m.shape(),
                    b.shape()
                )));
            }
            m
        }
        B3Strategy::Auto => unreachable!("resolve never returns Auto"),
    };
    let a2 = -a.transpose() - &b3 * b.transpose();
    let abscissa = spectral_abscissa(&a2)?;
    if !is_hurwitz(&a2)? {
        return Err(Error::Synthesis(format!(
            "A2 = -Aᵀ - B3 Bᵀ is not Hurwitz (spectral abscissa {abscissa:e})"
        )));
    }
    Ok(b3)
}

/// Builds the quantum embedding of `sys` for the given free parameters.
pub fn construct(sys: &ClassicalSystem, fp: &FreeParameters) -> Result<QuantumSystem> {
    sys.validate().into_result()?;
    fp.check(sys)?;
    let (n, v1, v2, y) = (sys.n(), sys.n_v1(), sys.n_v2(), sys.n_y());
    let nv = v1 + v2;
    let (a, b, c, d) = (sys.a(), sys.b(), sys.c(), sys.d());

    let b3 = select_b3(sys, &fp.b3)?;
    let a2 = -a.transpose() - &b3 * b.transpose();

    // (DDᵀ)⁻¹D
    let dd_inv_d = (d * d.transpose())
        .lu()
        .solve(d)
        .ok_or_else(|| Error::Synthesis("D Dᵀ is singular".into()))?;
    let b4 = -(c.transpose() * &dd_inv_d) + fp.n1.transpose();
    let d4 = &dd_inv_d + fp.n2.transpose();

    let (d1, d2, d3) = (&fp.d1, &fp.d2, &fp.d3);
    let bilinear = -(d3 * d1.transpose()) - &d4 * d2.transpose()
        + d1 * d3.transpose()
        + d2 * d4.transpose();
    let scale = 1.0 + [d1, d2, d3, &d4].iter().map(|m| inf_norm(m)).fold(0.0, f64::max).powi(2);
    if inf_norm(&bilinear) > PARAM_TOL * scale {
        return Err(Error::Parameter(format!(
            "D1..D4 violate -D3D1ᵀ - D4D2ᵀ + D1D3ᵀ + D2D4ᵀ = 0 (residual {:e})",
            inf_norm(&bilinear)
        )));
    }

    let (b1, b2) = (&fp.b1, &fp.b2);
    let c2 = -(d3 * b.transpose());
    let c1 = &d4 * b2.transpose() + d3 * b1.transpose() - d2 * b4.transpose() - d1 * b3.transpose();
    let a1 = &fp.xi
        + (&b3 * b1.transpose() - b1 * b3.transpose() - b2 * b4.transpose() + &b4 * b2.transpose())
            * 0.5;

    let mut atil = RealMatrix::zeros(2 * n, 2 * n);
    atil.view_mut((0, 0), (n, n)).copy_from(a);
    atil.view_mut((n, 0), (n, n)).copy_from(&a1);
    atil.view_mut((n, n), (n, n)).copy_from(&a2);

    let mut btil = RealMatrix::zeros(2 * n, 2 * nv);
    btil.view_mut((0, 0), (n, v1)).copy_from(b);
    btil.view_mut((n, 0), (n, v1)).copy_from(b1);
    btil.view_mut((n, v1), (n, v2)).copy_from(b2);
    btil.view_mut((n, nv), (n, v1)).copy_from(&b3);
    btil.view_mut((n, nv + v1), (n, v2)).copy_from(&b4);

    let mut ctil = RealMatrix::zeros(2 * y, 2 * n);
    ctil.view_mut((0, 0), (y, n)).copy_from(c);
    ctil.view_mut((y, 0), (y, n)).copy_from(&c1);
    ctil.view_mut((y, n), (y, n)).copy_from(&c2);

    let mut dtil = RealMatrix::zeros(2 * y, 2 * nv);
    dtil.view_mut((0, v1), (y, v2)).copy_from(d);
    dtil.view_mut((y, 0), (y, v1)).copy_from(d1);
    dtil.view_mut((y, v1), (y, v2)).copy_from(d2);
    dtil.view_mut((y, nv), (y, v1)).copy_from(d3);
    dtil.view_mut((y, nv + v1), (y, v2)).copy_from(&d4);

    // Adding +0 turns negative zeros from sign flips into plain zeros.
    let clean = |m: RealMatrix| m.map(|x| x + 0.0);
    let q = QuantumSystem::new(clean(atil), clean(btil), clean(ctil), clean(dtil))?
        .with_layout(ChannelLayout { n_v1: v1, n_v2: v2 })?;

    let pr = check_physical_realizability(&q, DEFAULT_PR_TOLERANCE * realizability_scale(&q));
    if !pr.pass {
        return Err(Error::NotRealizable(pr.residual1, pr.residual2, pr.residual3));
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub s: Complex64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub points: Vec<PointError>,
}

pub const EMBEDDING_TOLERANCE: f64 = 1e-8;

/// Compares `M_o ΞQ(s) M_i` with `ΞC(s)` at each sample point.
pub fn verify_embedding(
    sys: &ClassicalSystem,
    q: &QuantumSystem,
    sample_points: &[Complex64],
) -> Result<EmbeddingReport> {
    if q.n_z() != 2 * sys.n_y() || q.n_w() != 2 * sys.n_v() {
        return Err(Error::Dimension(format!(
            "quantum system has n_z = {}, n_w = {}; expected {} and {}",
            q.n_z(),
            q.n_w(),
            2 * sys.n_y(),
            2 * sys.n_v()
        )));
    }
    let sel = SelectionMatrices::new(sys.n_y(), sys.n_v());
    let mo = to_complex(&sel.mo);
    let mi = to_complex(&sel.mi);
    let mut points = Vec::with_capacity(sample_points.len());
    for &s in sample_points {
        let xc = classical_transfer(sys, s)?;
        let xq = quantum_transfer(q, s)?;
        let diff = &mo * xq * &mi - &xc;
        points.push(PointError {
            s,
            relative_error: complex_inf_norm(&diff) / (1.0 + complex_inf_norm(&xc)),
        });
    }
    let max_relative_error = points.iter().map(|p| p.relative_error).fold(0.0, f64::max);
    Ok(EmbeddingReport {
        max_relative_error,
        tolerance: EMBEDDING_TOLERANCE,
        pass: max_relative_error < EMBEDDING_TOLERANCE,
        points,
    })
}

/// Deterministic sample points with `Re s ∈ [0.1, 10]`, `|Im s| ≤ 10`.
pub fn default_sample_points(count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Complex64::new(rng.random_range(0.1..=10.0), rng.random_range(-10.0..=10.0)))
        .collect()
}

fn structure_violations(q: &QuantumSystem, n_v1: usize) -> Vec<String> {
    let n = q.n();
    let n_y = q.n_z() / 2;
    let n_v = q.channels();
    let nonzero = |m: &RealMatrix, r: (usize, usize), s: (usize, usize)| {
        m.view(r, s).iter().any(|&x| x != 0.0)
    };
    let mut out = Vec::new();
    if nonzero(q.atil(), (0, n), (n, n)) {
        out.push("Atil upper-right block is nonzero".to_string());
    }
    if nonzero(q.btil(), (0, n_v1), (n, q.n_w() - n_v1)) {
        out.push("Btil top row block is nonzero beyond B".to_string());
    }
    if nonzero(q.ctil(), (0, n), (n_y, n)) {
        out.push("Ctil upper-right block is nonzero".to_string());
    }
    if nonzero(q.dtil(), (0, 0), (n_y, n_v1)) {
        out.push("Dtil top row block is nonzero in the v1 columns".to_string());
    }
    if nonzero(q.dtil(), (0, n_v), (n_y, n_v)) {
        out.push("Dtil top row block is nonzero in the u columns".to_string());
    }
    out
}

/// Reads back `(A, B, C, D)` from a system with the embedding block structure.
///
/// Uses the attached channel layout when present; otherwise the split of
/// `v` into `v₁` and `v₂` is inferred and must be unique.
pub fn commutative_subsystem(q: &QuantumSystem) -> Result<ClassicalSystem> {
    let n = q.n();
    let n_y = q.n_z() / 2;
    let n_v = q.channels();
    if n == 0 || n_y == 0 || n_v < 2 {
        return Err(Error::NotAnEmbedding(vec![format!(
            "dimensions n = {n}, n_y = {n_y}, n_v = {n_v} cannot hold a classical system"
        )]));
    }
    let n_v1 = match q.layout() {
        Some(layout) => {
            let v = structure_violations(q, layout.n_v1);
            if !v.is_empty() {
                return Err(Error::NotAnEmbedding(v));
            }
            layout.n_v1
        }
        None => {
            let fits: Vec<usize> = (1..n_v)
                .filter(|&k| structure_violations(q, k).is_empty())
                .collect();
            match fits.as_slice() {
                [k] => *k,
                [] => {
                    // Report against the most balanced split for a readable message.
                    return Err(Error::NotAnEmbedding(structure_violations(q, n_v / 2)));
                }
                many => {
                    return Err(Error::NotAnEmbedding(vec![format!(
                        "channel split is ambiguous (n_v1 could be any of {many:?}); attach a layout"
                    )]))
                }
            }
        }
    };
    ClassicalSystem::new(
        q.atil().view((0, 0), (n, n)).into_owned(),
        q.btil().view((0, 0), (n, n_v1)).into_owned(),
        q.ctil().view((0, 0), (n_y, n)).into_owned(),
        q.dtil().view((0, n_v1), (n_y, n_v - n_v1)).into_owned(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{scalar_classical, scalar_quantum};
    use crate::foundation::kernel_basis;
    use nalgebra::dmatrix;

    #[test]
    fn pseudoinverse_b3_for_scalar_system() {
        let sys = scalar_classical();
        let b3 = select_b3(&sys, &B3Strategy::Pseudoinverse).unwrap();
        assert_eq!(b3, dmatrix![2.0]);
    }

    #[test]
    fn riccati_b3_for_scalar_system() {
        let sys = scalar_classical();
        let b3 = select_b3(&sys, &B3Strategy::Riccati).unwrap();
        assert!((b3[(0, 0)] - (1.0 + 2f64.sqrt())).abs() < 1e-12);
        let a2 = -sys.a().transpose() - &b3 * sys.b().transpose();
        assert!((a2[(0, 0)] + 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pseudoinverse_b3_diagonal() {
        let sys = ClassicalSystem::new(
            RealMatrix::identity(2, 2) * -2.0,
            RealMatrix::identity(2, 2),
            dmatrix![1.0, 0.0],
            dmatrix![1.0],
        )
        .unwrap();
        let b3 = select_b3(&sys, &B3Strategy::Pseudoinverse).unwrap();
        assert!((b3 - RealMatrix::identity(2, 2) * 4.0).abs().max() < 1e-14);
    }

    #[test]
    fn explicit_b3_must_stabilize() {
        let sys = scalar_classical();
        // A2 = 1 - 0.5 = 0.5
        let err = select_b3(&sys, &B3Strategy::Explicit(dmatrix![0.5])).unwrap_err();
        assert!(matches!(err, Error::Synthesis(_)));
    }

    #[test]
    fn scalar_construction_is_exact() {
        let sys = scalar_classical();
        let fp = FreeParameters::zeros(&sys).with_b3(B3Strategy::Explicit(dmatrix![2.0]));
        let q = construct(&sys, &fp).unwrap();
        let expect = scalar_quantum();
        assert_eq!(q.atil(), expect.atil());
        assert_eq!(q.btil(), expect.btil());
        assert_eq!(q.ctil(), expect.ctil());
        assert_eq!(q.dtil(), expect.dtil());
    }

    #[test]
    fn zero_parameters_give_zero_coupling_blocks() {
        let sys = ClassicalSystem::new(
            dmatrix![-1.0, 0.5; -0.3, -2.0],
            dmatrix![1.0, 0.0; 0.2, 1.0],
            dmatrix![1.0, -1.0],
            dmatrix![0.5, 2.0],
        )
        .unwrap();
        let q = construct(&sys, &FreeParameters::zeros(&sys)).unwrap();
        let n = 2;
        assert!(q.atil().view((n, 0), (n, n)).iter().all(|&x| x == 0.0));
        assert!(q.ctil().view((1, 0), (1, 2 * n)).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rejection_names_assumption() {
        let sys = ClassicalSystem::new(dmatrix![1.0], dmatrix![1.0], dmatrix![1.0], dmatrix![1.0])
            .unwrap();
        let err = construct(&sys, &FreeParameters::zeros(&sys)).unwrap_err();
        assert_eq!(err, Error::Assumption(vec![crate::error::AssumptionFailure::NotHurwitz]));
    }

    #[test]
    fn bad_free_parameters() {
        let sys = scalar_classical();
        let mut fp = FreeParameters::zeros(&sys);
        fp.n1 = dmatrix![1.0]; // not in ker D = {0}
        assert!(matches!(construct(&sys, &fp), Err(Error::Parameter(_))));

        let mut fp = FreeParameters::zeros(&sys);
        fp.d1 = dmatrix![1.0];
        fp.d3 = dmatrix![0.0];
        fp.d2 = dmatrix![0.0];
        // -D3D1ᵀ - D4D2ᵀ + D1D3ᵀ + D2D4ᵀ = 0 holds; now break it
        assert!(construct(&sys, &fp).is_ok());
        fp.d3 = dmatrix![1.0];
        fp.d1 = dmatrix![0.0];
        fp.d2 = dmatrix![0.0];
        assert!(construct(&sys, &fp).is_ok());
        let mut fp = FreeParameters::zeros(&sys);
        fp.d2 = dmatrix![1.0];
        assert!(construct(&sys, &fp).is_ok()); // D2D4ᵀ - D4D2ᵀ = 0 for scalars

        let sys2 = ClassicalSystem::new(
            dmatrix![-1.0],
            dmatrix![1.0],
            dmatrix![1.0; 0.0],
            dmatrix![1.0, 0.0; 0.0, 1.0],
        )
        .unwrap();
        let mut fp = FreeParameters::zeros(&sys2);
        fp.d2 = dmatrix![0.0, 1.0; 0.0, 0.0];
        assert!(matches!(construct(&sys2, &fp), Err(Error::Parameter(_))));

        let mut fp = FreeParameters::zeros(&sys2);
        fp.xi = dmatrix![1.0, 2.0];
        assert!(matches!(construct(&sys2, &fp), Err(Error::Dimension(_))));
    }

    #[test]
    fn embedding_identity_on_scalar() {
        let sys = scalar_classical();
        let q = scalar_quantum();
        let pts = [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(2.0, 3.0),
        ];
        let r = verify_embedding(&sys, &q, &pts).unwrap();
        assert!(r.pass && r.max_relative_error < 1e-12);
        assert!(matches!(
            verify_embedding(&sys, &q, &[Complex64::new(-1.0, 0.0)]),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn subsystem_extraction() {
        let back = commutative_subsystem(&scalar_quantum()).unwrap();
        assert_eq!(back, scalar_classical());

        let generic = QuantumSystem::new(
            dmatrix![-1.0, 1.0; -1.0, -1.0],
            RealMatrix::zeros(2, 4),
            RealMatrix::zeros(2, 2),
            RealMatrix::zeros(2, 4),
        )
        .unwrap();
        match commutative_subsystem(&generic) {
            Err(Error::NotAnEmbedding(v)) => assert!(v.iter().any(|s| s.contains("Atil"))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sample_points_in_region() {
        let pts = default_sample_points(20, 1);
        assert_eq!(pts.len(), 20);
        assert!(pts.iter().all(|s| s.re >= 0.1 && s.re <= 10.0 && s.im.abs() <= 10.0));
        assert_eq!(pts, default_sample_points(20, 1));
    }

    #[test]
    fn kernel_parameters_are_accepted() {
        let sys = ClassicalSystem::new(
            dmatrix![-1.0],
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![1.0, 1.0],
        )
        .unwrap();
        let k = kernel_basis(sys.d());
        let mut fp = FreeParameters::zeros(&sys);
        fp.n1 = &k * 0.7;
        fp.n2 = &k * -1.3;
        let q = construct(&sys, &fp).unwrap();
        assert!(check_physical_realizability(&q, 1e-12).pass);
    }
}
