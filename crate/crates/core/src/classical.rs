//! Classical linear stochastic systems
//!
//! ```text
//! dξ = A ξ dt + B dv₁
//! dy = C ξ dt + D dv₂
//! ```
//!
//! with `v₁`, `v₂` independent standard Wiener processes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AssumptionFailure, Error, Result};
use crate::foundation::{
    eigenvalues, is_stabilizable_pair, rank_threshold, singular_values, solve_lyapunov,
    spectral_abscissa, to_complex, ComplexMatrix, RealMatrix, RealVector, HURWITZ_MARGIN,
};
use crate::json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawClassical", into = "RawClassical")]
pub struct ClassicalSystem {
    a: RealMatrix,
    b: RealMatrix,
    c: RealMatrix,
    d: RealMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClassical {
    #[serde(rename = "A", with = "json::real")]
    a: RealMatrix,
    #[serde(rename = "B", with = "json::real")]
    b: RealMatrix,
    #[serde(rename = "C", with = "json::real")]
    c: RealMatrix,
    #[serde(rename = "D", with = "json::real")]
    d: RealMatrix,
}

impl TryFrom<RawClassical> for ClassicalSystem {
    type Error = Error;
    fn try_from(r: RawClassical) -> Result<Self> {
        ClassicalSystem::new(r.a, r.b, r.c, r.d)
    }
}

impl From<ClassicalSystem> for RawClassical {
    fn from(s: ClassicalSystem) -> Self {
        RawClassical {
            a: s.a,
            b: s.b,
            c: s.c,
            d: s.d,
        }
    }
}

impl ClassicalSystem {
    pub fn new(a: RealMatrix, b: RealMatrix, c: RealMatrix, d: RealMatrix) -> Result<Self> {
        let n = a.nrows();
        let mut problems = Vec::new();
        if n == 0 || !a.is_square() {
            problems.push(format!("A must be square and non-empty, got {:?}", a.shape()));
        }
        if b.nrows() != n || b.ncols() == 0 {
            problems.push(format!("B must be {n}x(n_v1 >= 1), got {:?}", b.shape()));
        }
        if c.ncols() != n || c.nrows() == 0 {
            problems.push(format!("C must be (n_y >= 1)x{n}, got {:?}", c.shape()));
        }
        if d.nrows() != c.nrows() || d.ncols() == 0 {
            problems.push(format!(
                "D must be {}x(n_v2 >= 1), got {:?}",
                c.nrows(),
                d.shape()
            ));
        }
        if !problems.is_empty() {
            return Err(Error::Dimension(problems.join("; ")));
        }
        if [&a, &b, &c, &d].iter().any(|m| m.iter().any(|x| !x.is_finite())) {
            return Err(Error::Parameter("system matrices must be finite".into()));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn a(&self) -> &RealMatrix {
        &self.a
    }
    pub fn b(&self) -> &RealMatrix {
        &self.b
    }
    pub fn c(&self) -> &RealMatrix {
        &self.c
    }
    pub fn d(&self) -> &RealMatrix {
        &self.d
    }
    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    pub fn n_v1(&self) -> usize {
        self.b.ncols()
    }
    pub fn n_v2(&self) -> usize {
        self.d.ncols()
    }
    pub fn n_v(&self) -> usize {
        self.n_v1() + self.n_v2()
    }
    pub fn n_y(&self) -> usize {
        self.c.nrows()
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HurwitzCheck {
    pub passed: bool,
    pub spectral_abscissa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilizabilityCheck {
    pub passed: bool,
    /// Eigenvalue of `-A` at which the PBH rank test failed.
    pub failing_eigenvalue: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankCheck {
    pub passed: bool,
    pub singular_values: Vec<f64>,
}

/// Outcome of the three embedding preconditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub hurwitz: HurwitzCheck,
    pub stabilizable: StabilizabilityCheck,
    pub d_full_row_rank: RankCheck,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn failures(&self) -> Vec<AssumptionFailure> {
        let mut out = Vec::new();
        if !self.hurwitz.passed {
            out.push(AssumptionFailure::NotHurwitz);
        }
        if !self.stabilizable.passed {
            out.push(AssumptionFailure::NotStabilizable);
        }
        if !self.d_full_row_rank.passed {
            out.push(AssumptionFailure::DRowRankDeficient);
        }
        out
    }

    /// `Ok(())` when every check passed, otherwise the named failures.
    pub fn into_result(self) -> Result<()> {
        let failures = self.failures();
        if failures.is_empty() {
            Ok(())
        } else {
            Err(Error::Assumption(failures))
        }
    }
}

pub fn validate(sys: &ClassicalSystem) -> ValidationReport {
    // Eigenvalue failures (non-convergence) are reported as failed checks.
    let abscissa = spectral_abscissa(sys.a()).unwrap_or(f64::NAN);
    let hurwitz = HurwitzCheck {
        passed: abscissa < -HURWITZ_MARGIN,
        spectral_abscissa: abscissa,
    };

    let neg_a = -sys.a();
    let stabilizable = match is_stabilizable_pair(&neg_a, sys.b()) {
        Ok(None) => StabilizabilityCheck {
            passed: true,
            failing_eigenvalue: None,
        },
        Ok(Some(lambda)) => StabilizabilityCheck {
            passed: false,
            failing_eigenvalue: Some(lambda),
        },
        Err(_) => StabilizabilityCheck {
            passed: false,
            failing_eigenvalue: None,
        },
    };

    let sv: Vec<f64> = singular_values(sys.d()).iter().copied().collect();
    let norm2 = sv.first().copied().unwrap_or(0.0);
    let tol = rank_threshold(sys.d().nrows(), sys.d().ncols(), norm2);
    let rank = sv.iter().filter(|&&s| s > tol).count();
    let d_full_row_rank = RankCheck {
        passed: rank == sys.n_y(),
        singular_values: sv,
    };

    ValidationReport {
        hurwitz,
        stabilizable,
        d_full_row_rank,
    }
}

/// `ΞC(s) = [C (sI - A)⁻¹ B, D]`, columns ordered as the noise inputs `[v₁; v₂]`.
pub fn classical_transfer(sys: &ClassicalSystem, s: Complex64) -> Result<ComplexMatrix> {
    let g = resolvent_times(sys.a(), sys.b(), s)?;
    let cg = to_complex(sys.c()) * g;
    let mut out = ComplexMatrix::zeros(sys.n_y(), sys.n_v());
    out.view_mut((0, 0), (sys.n_y(), sys.n_v1())).copy_from(&cg);
    out.view_mut((0, sys.n_v1()), (sys.n_y(), sys.n_v2()))
        .copy_from(&to_complex(sys.d()));
    Ok(out)
}

/// `(sI - a)⁻¹ b`, rejecting `s` on (or numerically at) the spectrum of `a`.
pub(crate) fn resolvent_times(a: &RealMatrix, b: &RealMatrix, s: Complex64) -> Result<ComplexMatrix> {
    let n = a.nrows();
    let scale = 1.0 + a.abs().max();
    if eigenvalues(a)?.iter().any(|l| (s - l).norm() <= 1e-10 * scale) {
        return Err(Error::Pole(s));
    }
    let mut m = -to_complex(a);
    for i in 0..n {
        m[(i, i)] += s;
    }
    m.lu().solve(&to_complex(b)).ok_or(Error::Pole(s))
}

/// Stationary state covariance with unit-intensity inputs: `AΣ + ΣAᵀ + BBᵀ = 0`.
pub fn classical_steady_covariance(sys: &ClassicalSystem) -> Result<RealMatrix> {
    solve_lyapunov(sys.a(), &(sys.b() * sys.b().transpose()))
}

/// Gaussian law of `ξ(0)`; defaults to zero mean and identity covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    #[serde(with = "json::vector")]
    pub mean: RealVector,
    #[serde(with = "json::real")]
    pub cov: RealMatrix,
}

impl InitialState {
    pub fn standard(n: usize) -> Self {
        Self {
            mean: RealVector::zeros(n),
            cov: RealMatrix::identity(n, n),
        }
    }
}
