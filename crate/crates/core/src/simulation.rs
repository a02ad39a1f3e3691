//! Gaussian states, moment propagation and seeded sample paths.
//!
//! Sample paths treat the field increments as classical Wiener increments
//! with identity covariance (the symmetric part of the Itô matrix). This is
//! exact for the commutative `ξ` block; for the `θ` block it reproduces
//! second moments only.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{classical_steady_covariance, ClassicalSystem, InitialState};
use crate::error::{Error, Result};
use crate::foundation::{
    inf_norm, integrate_ode, solve_lyapunov, time_grid, RealMatrix, RealVector,
};
use crate::json::fmt17;
use crate::quantum::{symplectic_form, QuantumSystem};

const SYMMETRY_TOL: f64 = 1e-12;
const ADMISSIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    #[serde(with = "crate::json::vector")]
    pub mean: RealVector,
    #[serde(with = "crate::json::real")]
    pub cov: RealMatrix,
}

impl GaussianState {
    /// Checks shape, symmetry and `cov + iJ ⪰ 0`.
    pub fn new(mean: RealVector, cov: RealMatrix) -> Result<Self> {
        let dim = mean.len();
        if !dim.is_multiple_of(2) || cov.shape() != (dim, dim) {
            return Err(Error::Dimension(format!(
                "Gaussian state needs an even mean length and matching covariance, got {} and {:?}",
                dim,
                cov.shape()
            )));
        }
        check_symmetric(&cov, "covariance")?;
        let state = Self { mean, cov };
        let lmin = state.admissibility();
        if lmin < -ADMISSIBILITY_TOL {
            return Err(Error::Parameter(format!(
                "covariance violates the uncertainty relation (smallest eigenvalue of cov + iJ is {lmin:e})"
            )));
        }
        Ok(state)
    }

    pub fn vacuum(n: usize) -> Self {
        Self {
            mean: RealVector::zeros(2 * n),
            cov: RealMatrix::identity(2 * n, 2 * n),
        }
    }

    /// Smallest eigenvalue of the Hermitian matrix `cov + iJ`.
    pub fn admissibility(&self) -> f64 {
        let n = self.mean.len() / 2;
        let j = symplectic_form(n);
        let h = self.cov.zip_map(&j, Complex64::new);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn check_symmetric(m: &RealMatrix, what: &str) -> Result<()> {
    let asym = inf_norm(&(m - m.transpose()));
    if asym > SYMMETRY_TOL * (1.0 + inf_norm(m)) {
        return Err(Error::Parameter(format!("{what} is not symmetric (deviation {asym:e})")));
    }
    Ok(())
}

/// Oscillator state whose position block reproduces the classical law.
///
/// The momentum block is `sI` with `s = 1/λ_min(cov_c)`, the smallest
/// isotropic choice allowed by `[q, p] = 2i`. A singular `cov_c` is first
/// shifted by `10⁻¹² tr(cov_c)/n`; the returned covariance holds the shifted block.
pub fn augment_state(mean_c: &RealVector, cov_c: &RealMatrix) -> Result<GaussianState> {
    let n = mean_c.len();
    if cov_c.shape() != (n, n) || n == 0 {
        return Err(Error::Dimension(format!(
            "classical mean of length {n} needs an {n}x{n} covariance, got {:?}",
            cov_c.shape()
        )));
    }
    check_symmetric(cov_c, "classical covariance")?;
    let sym = (cov_c + cov_c.transpose()) * 0.5;
    let mut lmin = sym.symmetric_eigenvalues().min();
    let trace = sym.trace();
    let eps = if trace > 0.0 { 1e-12 * trace / n as f64 } else { 1e-12 };
    if lmin < -ADMISSIBILITY_TOL * (1.0 + trace.abs()) {
        return Err(Error::Parameter(format!(
            "classical covariance is not positive semidefinite (eigenvalue {lmin:e})"
        )));
    }
    let mut block = sym;
    if lmin <= eps {
        for i in 0..n {
            block[(i, i)] += eps;
        }
        lmin = block.symmetric_eigenvalues().min();
    }
    let s = 1.0 / lmin;
    let mut cov = RealMatrix::zeros(2 * n, 2 * n);
    cov.view_mut((0, 0), (n, n)).copy_from(&block);
    for i in n..2 * n {
        cov[(i, i)] = s;
    }
    let mut mean = RealVector::zeros(2 * n);
    mean.rows_mut(0, n).copy_from(mean_c);
    Ok(GaussianState { mean, cov })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentFlow {
    pub times: Vec<f64>,
    pub means: Vec<RealVector>,
    pub covs: Vec<RealMatrix>,
}

impl MomentFlow {
    /// One line per time step: `t`, the mean, then the upper triangle of the covariance.
    pub fn to_csv(&self) -> String {
        let dim = self.means.first().map_or(0, RealVector::len);
        let mut out = String::from("t");
        for i in 0..dim {
            let _ = write!(out, ",m{i}");
        }
        for i in 0..dim {
            for j in i..dim {
                let _ = write!(out, ",S{i}_{j}");
            }
        }
        out.push('\n');
        for ((t, m), s) in self.times.iter().zip(&self.means).zip(&self.covs) {
            out.push_str(&fmt17(*t));
            for x in m.iter() {
                out.push(',');
                out.push_str(&fmt17(*x));
            }
            for i in 0..dim {
                for j in i..dim {
                    out.push(',');
                    out.push_str(&fmt17(s[(i, j)]));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn last_cov(&self) -> &RealMatrix {
        self.covs.last().expect("flow holds at least the initial state")
    }
}

fn pack(v: &RealVector, m: &RealMatrix) -> RealVector {
    RealVector::from_iterator(v.len() + m.len(), v.iter().chain(m.iter()).copied())
}

fn unpack(x: &RealVector, dim: usize) -> (RealVector, RealMatrix) {
    let v = x.rows(0, dim).into_owned();
    let m = RealMatrix::from_column_slice(dim, dim, &x.as_slice()[dim..]);
    (v, m)
}

fn moment_flow(
    a: &RealMatrix,
    b: &RealMatrix,
    mean: &RealVector,
    cov: &RealMatrix,
    t_span: (f64, f64),
    step: f64,
) -> Result<MomentFlow> {
    let dim = a.nrows();
    let bb = b * b.transpose();
    let bb = (&bb + bb.transpose()) * 0.5;
    let field = |_t: f64, x: &RealVector| {
        let (m, s) = unpack(x, dim);
        let as_ = a * &s;
        // M + Mᵀ keeps the derivative exactly symmetric.
        let ds = &as_ + as_.transpose() + &bb;
        pack(&(a * m), &ds)
    };
    let traj = integrate_ode(field, &pack(mean, cov), t_span, step)?;
    let (means, covs) = traj.states.iter().map(|x| unpack(x, dim)).unzip();
    Ok(MomentFlow {
        times: traj.times,
        means,
        covs,
    })
}

/// RK4 for `ṁ = Ãm`, `Σ̇ = ÃΣ + ΣÃᵀ + B̃B̃ᵀ`.
pub fn propagate_moments(
    q: &QuantumSystem,
    g0: &GaussianState,
    t_span: (f64, f64),
    step: f64,
) -> Result<MomentFlow> {
    let dim = 2 * q.n();
    if g0.mean.len() != dim {
        return Err(Error::Dimension(format!(
            "initial state has dimension {}, system has {dim}",
            g0.mean.len()
        )));
    }
    moment_flow(q.atil(), q.btil(), &g0.mean, &g0.cov, t_span, step)
}

/// RK4 for the classical moments `ṁ = Am`, `Σ̇ = AΣ + ΣAᵀ + BBᵀ`.
pub fn classical_moments(
    sys: &ClassicalSystem,
    init: &InitialState,
    t_span: (f64, f64),
    step: f64,
) -> Result<MomentFlow> {
    let n = sys.n();
    if init.mean.len() != n || init.cov.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "initial state has dimension {} / {:?}, system has {n}",
            init.mean.len(),
            init.cov.shape()
        )));
    }
    moment_flow(sys.a(), sys.b(), &init.mean, &init.cov, t_span, step)
}

/// Largest gap between the leading `n`-dimensional block of `quantum` and
/// `classical`, over all shared time points and over means and covariances.
pub fn moment_block_difference(quantum: &MomentFlow, classical: &MomentFlow) -> Result<f64> {
    let n = classical.means.first().map_or(0, RealVector::len);
    if quantum.times != classical.times || quantum.means.first().map_or(0, RealVector::len) < n {
        return Err(Error::Dimension("moment flows are on different grids or sizes".into()));
    }
    let mut worst = 0.0f64;
    for k in 0..classical.times.len() {
        let dm = (quantum.means[k].rows(0, n) - &classical.means[k]).amax();
        let ds = inf_norm(&(quantum.covs[k].view((0, 0), (n, n)) - &classical.covs[k]));
        worst = worst.max(dm).max(ds);
    }
    Ok(worst)
}

/// Stationary covariance `ÃΣ + ΣÃᵀ + B̃B̃ᵀ = 0`.
pub fn steady_covariance(q: &QuantumSystem) -> Result<RealMatrix> {
    solve_lyapunov(q.atil(), &(q.btil() * q.btil().transpose()))
}

/// `‖Σ_Q[ξ, ξ] - Σ_C‖∞` between the stationary covariances.
pub fn steady_block_difference(sys: &ClassicalSystem, q: &QuantumSystem) -> Result<f64> {
    let n = sys.n();
    let sq = steady_covariance(q)?;
    let sc = classical_steady_covariance(sys)?;
    Ok(inf_norm(&(sq.view((0, 0), (n, n)) - sc)))
}

/// Integrates `K̇ = ÃK + KÃᵀ + B̃JB̃ᵀ` from `K(0) = J` and returns `max_t ‖K(t) - J‖∞`.
///
/// The flow is integrated for `E = K - J`, which obeys
/// `Ė = ÃE + EÃᵀ + (ÃJ + JÃᵀ + B̃JB̃ᵀ)` from `E(0) = 0`; the forcing term is
/// formed once, so rounding is relative to the deviation rather than to `J`.
pub fn skew_flow_check(q: &QuantumSystem, t_span: (f64, f64), step: f64) -> Result<f64> {
    let dim = 2 * q.n();
    let j = symplectic_form(q.n());
    let a = q.atil();
    let forcing = a * &j + &j * a.transpose() + q.btil() * symplectic_form(q.channels()) * q.btil().transpose();
    let field = |_t: f64, x: &RealVector| {
        let e = RealMatrix::from_column_slice(dim, dim, x.as_slice());
        let d = a * &e + &e * a.transpose() + &forcing;
        RealVector::from_column_slice(d.as_slice())
    };
    let traj = integrate_ode(field, &RealVector::zeros(dim * dim), t_span, step)?;
    Ok(traj
        .states
        .iter()
        .map(|x| inf_norm(&RealMatrix::from_column_slice(dim, dim, x.as_slice())))
        .fold(0.0, f64::max))
}

/// Wiener increments, one ChaCha stream per field channel.
///
/// Channel `c` always draws from stream `c` of the seed, so a system using
/// only the first few channels sees the same increments on them.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    pub seed: u64,
    pub dt: f64,
    /// `increments[step][channel]`, each `√dt · N(0, 1)`.
    pub increments: Vec<RealVector>,
}

impl NoiseRealization {
    pub fn generate(seed: u64, channels: usize, steps: usize, dt: f64) -> Result<Self> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::Parameter(format!("step must be positive, got {dt}")));
        }
        let sd = dt.sqrt();
        let columns: Vec<Vec<f64>> = (0..channels)
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                (0..steps).map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    sd * z
                }).collect::<Vec<f64>>()
            })
            .collect();
        let increments = (0..steps)
            .map(|k| RealVector::from_fn(channels, |c, _| columns[c][k]))
            .collect();
        Ok(Self { seed, dt, increments })
    }

    /// Noise for the uniform grid that [`time_grid`] builds for `(t_span, step)`.
    pub fn for_grid(seed: u64, channels: usize, t_span: (f64, f64), step: f64) -> Result<Self> {
        let times = time_grid(t_span, step)?;
        let steps = times.len() - 1;
        let dt = if steps == 0 { step } else { (t_span.1 - t_span.0) / steps as f64 };
        Self::generate(seed, channels, steps, dt)
    }

    pub fn channels(&self) -> usize {
        self.increments.first().map_or(0, RealVector::len)
    }
}

/// One Euler–Maruyama step of `dx = a x dt + b dw`.
///
/// Terms with an exactly zero coefficient are skipped, so a subsystem whose
/// rows carry extra zero columns follows bitwise the same recursion.
pub fn linear_em_step(a: &RealMatrix, b: &RealMatrix, x: &RealVector, dw: &[f64], dt: f64) -> RealVector {
    RealVector::from_fn(x.len(), |i, _| {
        let mut drift = 0.0;
        for j in 0..a.ncols() {
            let c = a[(i, j)];
            if c != 0.0 {
                drift += c * x[j];
            }
        }
        let mut noise = 0.0;
        for k in 0..b.ncols() {
            let c = b[(i, k)];
            if c != 0.0 {
                noise += c * dw[k];
            }
        }
        x[i] + drift * dt + noise
    })
}

fn em_path(a: &RealMatrix, b: &RealMatrix, x0: &RealVector, noise: &NoiseRealization) -> Vec<RealVector> {
    let mut path = Vec::with_capacity(noise.increments.len() + 1);
    let mut x = x0.clone();
    path.push(x.clone());
    for dw in &noise.increments {
        x = linear_em_step(a, b, &x, dw.as_slice(), noise.dt);
        path.push(x.clone());
    }
    path
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathPair {
    pub times: Vec<f64>,
    pub classical: Vec<RealVector>,
    pub quantum_xi: Vec<RealVector>,
    pub quantum_theta: Vec<RealVector>,
}

impl PathPair {
    pub fn bitwise_equal(&self) -> bool {
        self.classical.len() == self.quantum_xi.len()
            && self
                .classical
                .iter()
                .zip(&self.quantum_xi)
                .all(|(c, q)| c.iter().zip(q.iter()).all(|(a, b)| a.to_bits() == b.to_bits()))
    }

    pub fn to_csv(&self) -> String {
        let n = self.classical.first().map_or(0, RealVector::len);
        let mut out = String::from("t");
        for prefix in ["xi_c", "xi_q", "theta_q"] {
            for i in 0..n {
                let _ = write!(out, ",{prefix}{i}");
            }
        }
        out.push('\n');
        for k in 0..self.times.len() {
            out.push_str(&fmt17(self.times[k]));
            for v in [&self.classical[k], &self.quantum_xi[k], &self.quantum_theta[k]] {
                for x in v.iter() {
                    out.push(',');
                    out.push_str(&fmt17(*x));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Euler–Maruyama paths of the classical system and of its embedding, driven
/// by the same `v` increments. `xi0` starts both; `θ(0) = 0`.
pub fn sample_paths(
    q: &QuantumSystem,
    sys: &ClassicalSystem,
    xi0: &RealVector,
    noise: &NoiseRealization,
    t_span: (f64, f64),
    step: f64,
) -> Result<PathPair> {
    let n = sys.n();
    if q.n() != n || q.n_w() < sys.n_v() || xi0.len() != n {
        return Err(Error::Dimension(format!(
            "classical n = {n}, n_v = {}, quantum n = {}, n_w = {}, xi0 length {}",
            sys.n_v(),
            q.n(),
            q.n_w(),
            xi0.len()
        )));
    }
    let times = time_grid(t_span, step)?;
    if noise.increments.len() != times.len() - 1 || noise.channels() < q.n_w() {
        return Err(Error::Dimension(format!(
            "noise has {} steps of {} channels; need {} steps of {}",
            noise.increments.len(),
            noise.channels(),
            times.len() - 1,
            q.n_w()
        )));
    }
    let mut b = RealMatrix::zeros(n, sys.n_v());
    b.view_mut((0, 0), (n, sys.n_v1())).copy_from(sys.b());
    let classical = em_path(sys.a(), &b, xi0, noise);
    let mut x0 = RealVector::zeros(2 * n);
    x0.rows_mut(0, n).copy_from(xi0);
    let quantum = em_path(q.atil(), q.btil(), &x0, noise);
    let (quantum_xi, quantum_theta) = quantum
        .iter()
        .map(|x| (x.rows(0, n).into_owned(), x.rows(n, n).into_owned()))
        .unzip();
    Ok(PathPair {
        times,
        classical,
        quantum_xi,
        quantum_theta,
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trajectory `index` in an ensemble started from `seed`.
pub fn trajectory_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Sample covariance of the quantum `ξ` block at `t_span.1` over `paths`
/// independent trajectories started at `ξ(0) = xi0`, `θ(0) = 0`.
///
/// Trajectories run in parallel; the reduction runs in index order, so the
/// result does not depend on the thread count.
pub fn ensemble_xi_covariance(
    q: &QuantumSystem,
    xi0: &RealVector,
    paths: usize,
    seed: u64,
    t_span: (f64, f64),
    step: f64,
) -> Result<RealMatrix> {
    let n = q.n();
    if paths < 2 {
        return Err(Error::Parameter("ensemble needs at least two paths".into()));
    }
    if xi0.len() != n {
        return Err(Error::Dimension(format!("xi0 has length {}, expected {n}", xi0.len())));
    }
    time_grid(t_span, step)?;
    let mut x0 = RealVector::zeros(2 * n);
    x0.rows_mut(0, n).copy_from(xi0);
    let ends: Vec<RealVector> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let noise = NoiseRealization::for_grid(trajectory_seed(seed, i), q.n_w(), t_span, step)
                .expect("grid already validated");
            let mut x = x0.clone();
            for dw in &noise.increments {
                x = linear_em_step(q.atil(), q.btil(), &x, dw.as_slice(), noise.dt);
            }
            x.rows(0, n).into_owned()
        })
        .collect();
    let mean = ends.iter().fold(RealVector::zeros(n), |acc, x| acc + x) / paths as f64;
    let cov = ends.iter().fold(RealMatrix::zeros(n, n), |acc, x| {
        let d = x - &mean;
        acc + &d * d.transpose()
    }) / (paths as f64 - 1.0);
    Ok(cov)
}
