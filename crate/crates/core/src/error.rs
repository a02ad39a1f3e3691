use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// One of the three structural requirements a classical system must meet
/// before it can be embedded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AssumptionFailure {
    /// `A` has an eigenvalue with non-negative real part.
    NotHurwitz,
    /// `(-A, B)` fails the PBH stabilizability test.
    NotStabilizable,
    /// `D` does not have full row rank.
    DRowRankDeficient,
}

impl fmt::Display for AssumptionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AssumptionFailure::NotHurwitz => "A is not Hurwitz",
            AssumptionFailure::NotStabilizable => "(-A, B) is not stabilizable",
            AssumptionFailure::DRowRankDeficient => "D is not of full row rank",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hurwitz (spectral abscissa {abscissa:e})")]
    NotHurwitz { abscissa: f64 },

    #[error("synthesis failed: {0}")]
    Synthesis(String),

    #[error("evaluation point s = {0} is a pole of the system; pick another sample point")]
    Pole(Complex64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("classical system rejected: {}", join(.0))]
    Assumption(Vec<AssumptionFailure>),

    #[error("quantum system lacks the embedding block structure: {}", .0.join("; "))]
    NotAnEmbedding(Vec<String>),

    #[error("quantum system is not physically realizable (residuals {0:e}, {1:e}, {2:e})")]
    NotRealizable(f64, f64, f64),

    #[error("eigenvalue iteration failed to converge")]
    Convergence,
}

fn join(items: &[AssumptionFailure]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}
