//! Reference systems and random generators shared by tests and the CLI.

use nalgebra::dmatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::classical::ClassicalSystem;
use crate::foundation::{kernel_basis, spectral_abscissa, RealMatrix};
use crate::quantum::{ChannelLayout, QuantumSystem};
use crate::realization::{B3Strategy, FreeParameters};

/// `dξ = -ξ dt + dv₁`, `dy = ξ dt + dv₂`.
pub fn scalar_classical() -> ClassicalSystem {
    ClassicalSystem::new(dmatrix![-1.0], dmatrix![1.0], dmatrix![1.0], dmatrix![1.0])
        .expect("valid scalar system")
}

/// Embedding of [`scalar_classical`] with `B₃ = 2` and all other free blocks zero.
pub fn scalar_quantum() -> QuantumSystem {
    QuantumSystem::new(
        dmatrix![-1.0, 0.0; 0.0, -1.0],
        dmatrix![1.0, 0.0, 0.0, 0.0; 0.0, 0.0, 2.0, -1.0],
        dmatrix![1.0, 0.0; 0.0, 0.0],
        dmatrix![0.0, 1.0, 0.0, 0.0; 0.0, 0.0, 0.0, 1.0],
    )
    .and_then(|q| q.with_layout(ChannelLayout { n_v1: 1, n_v2: 1 }))
    .expect("valid quantum system")
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> RealMatrix {
    RealMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Random system satisfying all standing assumptions, with
/// `n ≤ 4`, `n_v1, n_v2, n_y ≤ 3` and `n_y ≤ n_v2`.
pub fn random_stable_system<R: Rng + ?Sized>(rng: &mut R) -> ClassicalSystem {
    loop {
        let n = rng.random_range(1..=4);
        let v1 = rng.random_range(1..=3);
        let y = rng.random_range(1..=3);
        let v2 = rng.random_range(y..=3);
        let m = gaussian_matrix(rng, n, n);
        let Ok(alpha) = spectral_abscissa(&m) else { continue };
        let margin: f64 = rng.random_range(0.1..1.0);
        let a = m - RealMatrix::identity(n, n) * (alpha + margin);
        let sys = ClassicalSystem::new(
            a,
            gaussian_matrix(rng, n, v1),
            gaussian_matrix(rng, y, n),
            gaussian_matrix(rng, y, v2),
        );
        if let Ok(sys) = sys {
            if sys.validate().passed() {
                return sys;
            }
        }
    }
}

/// Random free parameters satisfying the kernel and bilinear constraints.
///
/// `D₁ = c₁D₃` and `D₂ = c₂D₄` make the bilinear constraint hold identically.
pub fn random_free_parameters<R: Rng + ?Sized>(rng: &mut R, sys: &ClassicalSystem) -> FreeParameters {
    let (n, v1, v2, y) = (sys.n(), sys.n_v1(), sys.n_v2(), sys.n_y());
    let d = sys.d();
    let kernel = kernel_basis(d);
    let k = kernel.ncols();
    let n1 = &kernel * gaussian_matrix(rng, k, n);
    let n2 = &kernel * gaussian_matrix(rng, k, y);
    let dd_inv_d = (d * d.transpose()).lu().solve(d).expect("D has full row rank");
    let d4 = dd_inv_d + n2.transpose();
    let d3 = gaussian_matrix(rng, y, v1);
    let c1: f64 = rng.sample(StandardNormal);
    let c2: f64 = rng.sample(StandardNormal);
    let x = gaussian_matrix(rng, n, n);
    FreeParameters {
        b1: gaussian_matrix(rng, n, v1),
        b2: gaussian_matrix(rng, n, v2),
        b3: B3Strategy::Auto,
        n1,
        n2,
        xi: (&x + x.transpose()) * 0.5,
        d1: &d3 * c1,
        d2: d4 * c2,
        d3,
    }
}
