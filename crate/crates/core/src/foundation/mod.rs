//! Dense numerics shared by every other module: spectra, numerical rank,
//! kernels and pseudoinverses, the continuous Lyapunov and algebraic Riccati
//! equations, and a fixed-step Runge–Kutta integrator.
//!
//! Matrices are `nalgebra` dynamic matrices. All routines are pure functions
//! of their inputs.

mod linalg;
mod lyapunov;
mod ode;
mod riccati;
mod schur;

pub use linalg::{
    complex_inf_norm, complex_rank, eigenvalues, inf_norm, is_hurwitz, kernel_basis,
    pseudoinverse, rank, rank_threshold, singular_values, spectral_abscissa, to_complex,
    HURWITZ_MARGIN,
};
pub use lyapunov::solve_lyapunov;
pub use ode::{integrate_ode, time_grid, Trajectory};
pub use riccati::{is_stabilizable_pair, solve_are, AreSolution};
pub use schur::ComplexSchur;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type RealMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;
pub type RealVector = DVector<f64>;
