//! Measurement feedback around an optical cavity.
//!
//! The cavity `(q, p)` is observed through `dζ = (√γ q + ξ)dt + dw̃₁` and
//! controlled by a classical state `ξ`. The same controller realized as a
//! quantum system gives the all-quantum loop `(q, p, x₁, x₂)`; its `x₁`
//! plays the role of `ξ`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::{
    inf_norm, integrate_ode, is_hurwitz, solve_lyapunov, spectral_abscissa, RealMatrix, RealVector,
};
use crate::json::fmt17;
use crate::simulation::GaussianState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityPlant {
    /// Detuning.
    pub omega: f64,
    /// Coupling rate.
    pub gamma: f64,
}

impl CavityPlant {
    pub fn new(omega: f64, gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 || !omega.is_finite() {
            return Err(Error::Parameter(format!(
                "cavity needs finite omega and gamma > 0, got omega = {omega}, gamma = {gamma}"
            )));
        }
        Ok(Self { omega, gamma })
    }

    /// Free cavity drift `[[-γ/2, ω], [-ω, -γ/2]]`.
    pub fn drift(&self) -> RealMatrix {
        let (g, w) = (self.gamma, self.omega);
        RealMatrix::from_row_slice(2, 2, &[-g / 2.0, w, -w, -g / 2.0])
    }
}

/// Linear SDE `dx = drift·x dt + noise·dw` with optional output
/// `dy = output·x dt + output_noise·dw`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopModel {
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    #[serde(with = "crate::json::real")]
    pub drift: RealMatrix,
    #[serde(with = "crate::json::real")]
    pub noise: RealMatrix,
    #[serde(with = "crate::json::real")]
    pub output: RealMatrix,
    #[serde(with = "crate::json::real")]
    pub output_noise: RealMatrix,
}

impl LoopModel {
    pub fn steady_covariance(&self) -> Result<RealMatrix> {
        solve_lyapunov(&self.drift, &(&self.noise * self.noise.transpose()))
    }

    /// Covariance at `t_end` from `cov0` (RK4).
    pub fn covariance_at(&self, cov0: &RealMatrix, t_end: f64, step: f64) -> Result<RealMatrix> {
        let dim = self.drift.nrows();
        let a = &self.drift;
        let q = &self.noise * self.noise.transpose();
        let field = |_t: f64, x: &RealVector| {
            let s = RealMatrix::from_column_slice(dim, dim, x.as_slice());
            let m = a * &s;
            let d = &m + m.transpose() + &q;
            RealVector::from_column_slice(d.as_slice())
        };
        let traj = integrate_ode(field, &RealVector::from_column_slice(cov0.as_slice()), (0.0, t_end), step)?;
        Ok(RealMatrix::from_column_slice(dim, dim, traj.last().as_slice()))
    }
}

/// Which controller equation the hybrid loop uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerForm {
    /// `dξ = √γ q dt + dw̃₁`.
    #[default]
    Printed,
    /// Adds `-ξ dt` to the controller equation.
    Leaky,
}

/// States `(q, p, ξ)`, inputs `(w̃₁, w̃₂)`.
pub fn build_hybrid_loop(p: &CavityPlant) -> LoopModel {
    build_hybrid_loop_as(p, ControllerForm::Printed)
}

pub fn build_hybrid_loop_as(p: &CavityPlant, form: ControllerForm) -> LoopModel {
    let (g, w) = (p.gamma, p.omega);
    let sg = g.sqrt();
    let leak = match form {
        ControllerForm::Printed => 0.0,
        ControllerForm::Leaky => -1.0,
    };
    LoopModel {
        states: vec!["q".into(), "p".into(), "xi".into()],
        inputs: vec!["w1".into(), "w2".into()],
        drift: RealMatrix::from_row_slice(
            3,
            3,
            &[-g / 2.0, w, -sg, -w, -g / 2.0, 0.0, sg, 0.0, leak],
        ),
        noise: RealMatrix::from_row_slice(3, 2, &[-sg, 0.0, 0.0, -sg, 1.0, 0.0]),
        output: RealMatrix::from_row_slice(1, 3, &[sg, 0.0, 1.0]),
        output_noise: RealMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
    }
}

/// States `(q, p, x₁, x₂)`, inputs `(v₂, u₂)`.
pub fn build_quantum_loop(p: &CavityPlant) -> LoopModel {
    let (g, w) = (p.gamma, p.omega);
    let sg = g.sqrt();
    #[rustfmt::skip]
    let drift = RealMatrix::from_row_slice(4, 4, &[
        -g / 2.0, w,        -sg, 0.0,
        -w,       -g / 2.0, 0.0, 0.0,
        sg,       0.0,      0.0, 0.0,
        0.0,      2.0 * sg, 0.0, -1.0,
    ]);
    #[rustfmt::skip]
    let noise = RealMatrix::from_row_slice(4, 2, &[
        -sg, 0.0,
        0.0, -sg,
        1.0, 0.0,
        0.0, 1.0,
    ]);
    LoopModel {
        states: vec!["q".into(), "p".into(), "x1".into(), "x2".into()],
        inputs: vec!["v2".into(), "u2".into()],
        drift,
        noise,
        output: RealMatrix::zeros(0, 4),
        output_noise: RealMatrix::zeros(0, 2),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub omega: f64,
    pub gamma: f64,
    /// Both drifts Hurwitz, so stationary covariances were compared.
    pub stationary: bool,
    /// Comparison time when not stationary.
    pub time: Option<f64>,
    #[serde(with = "crate::json::real")]
    pub hybrid_cov: RealMatrix,
    #[serde(with = "crate::json::real")]
    pub quantum_cov: RealMatrix,
    /// `E[qξ]` in the hybrid loop.
    pub e_q_xi: f64,
    /// `E[q x₁]` in the quantum loop.
    pub e_q_x1: f64,
    /// Largest difference over the moments of `(q, p, ξ)` and `(q, p, x₁)`.
    pub max_abs_diff: f64,
}

/// Compares second moments of the hybrid and all-quantum loops.
///
/// Stationary covariances come from independent Lyapunov solves. If either
/// drift is not Hurwitz both loops are propagated from zero covariance to
/// `transient_time` instead.
pub fn consistency_check(p: &CavityPlant) -> Result<ConsistencyReport> {
    consistency_check_with(p, 5.0, 1e-3)
}

pub fn consistency_check_with(p: &CavityPlant, transient_time: f64, step: f64) -> Result<ConsistencyReport> {
    let hybrid = build_hybrid_loop(p);
    let quantum = build_quantum_loop(p);
    let stationary = is_hurwitz(&hybrid.drift)? && is_hurwitz(&quantum.drift)?;
    let (hybrid_cov, quantum_cov, time) = if stationary {
        (hybrid.steady_covariance()?, quantum.steady_covariance()?, None)
    } else {
        (
            hybrid.covariance_at(&RealMatrix::zeros(3, 3), transient_time, step)?,
            quantum.covariance_at(&RealMatrix::zeros(4, 4), transient_time, step)?,
            Some(transient_time),
        )
    };
    let common = quantum_cov.view((0, 0), (3, 3));
    let max_abs_diff = (&hybrid_cov - common).abs().max();
    Ok(ConsistencyReport {
        omega: p.omega,
        gamma: p.gamma,
        stationary,
        time,
        e_q_xi: hybrid_cov[(0, 2)],
        e_q_x1: quantum_cov[(0, 2)],
        hybrid_cov,
        quantum_cov,
        max_abs_diff,
    })
}

/// Time after which a loop is treated as stationary: `40/|spectral abscissa|`.
pub fn settling_time(model: &LoopModel) -> Result<f64> {
    let a = spectral_abscissa(&model.drift)?;
    if a >= 0.0 {
        return Err(Error::NotHurwitz { abscissa: a });
    }
    Ok(40.0 / a.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterRun {
    pub times: Vec<f64>,
    /// Conditional covariance of `(q, p)`.
    pub covs: Vec<RealMatrix>,
    /// `Var(q | obs) + 1`.
    pub k_q: Vec<f64>,
    /// `Cov(q, p | obs)`.
    pub k_p: Vec<f64>,
    /// `P Hᵀ + S` from the Riccati flow, for comparison.
    pub riccati_gain: Vec<[f64; 2]>,
}

impl FilterRun {
    pub fn to_csv(&self, with_riccati_gain: bool) -> String {
        let mut out = String::from("t,P_qq,P_qp,P_pp,K_q,K_p");
        if with_riccati_gain {
            out.push_str(",G_q,G_p");
        }
        out.push('\n');
        for i in 0..self.times.len() {
            let p = &self.covs[i];
            let mut cols = vec![self.times[i], p[(0, 0)], p[(0, 1)], p[(1, 1)], self.k_q[i], self.k_p[i]];
            if with_riccati_gain {
                cols.extend(self.riccati_gain[i]);
            }
            let line: Vec<String> = cols.into_iter().map(fmt17).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

/// Integrates the conditional covariance of the cavity,
/// `Ṗ = AP + PAᵀ + γI - (PHᵀ + S)(PHᵀ + S)ᵀ` with `H = [√γ, 0]` and
/// `S = [-√γ, 0]ᵀ` the plant/measurement noise correlation.
pub fn conditional_filter(p: &CavityPlant, sigma0: &RealMatrix, t_span: (f64, f64), step: f64) -> Result<FilterRun> {
    if sigma0.shape() != (2, 2) {
        return Err(Error::Dimension(format!("sigma0 must be 2x2, got {:?}", sigma0.shape())));
    }
    GaussianState::new(RealVector::zeros(2), sigma0.clone())?;
    let a = p.drift();
    let g = p.gamma;
    let sg = g.sqrt();
    let gain = |m: &RealMatrix| [sg * m[(0, 0)] - sg, sg * m[(1, 0)]];
    let field = |_t: f64, x: &RealVector| {
        let m = RealMatrix::from_column_slice(2, 2, x.as_slice());
        let am = &a * &m;
        let k = gain(&m);
        let mut d = &am + am.transpose();
        for i in 0..2 {
            d[(i, i)] += g;
            for j in 0..2 {
                d[(i, j)] -= k[i] * k[j];
            }
        }
        RealVector::from_column_slice(d.as_slice())
    };
    let traj = integrate_ode(field, &RealVector::from_column_slice(sigma0.as_slice()), t_span, step)?;
    let covs: Vec<RealMatrix> = traj
        .states
        .iter()
        .map(|x| RealMatrix::from_column_slice(2, 2, x.as_slice()))
        .collect();
    Ok(FilterRun {
        times: traj.times,
        k_q: covs.iter().map(|m| m[(0, 0)] + 1.0).collect(),
        k_p: covs.iter().map(|m| m[(0, 1)]).collect(),
        riccati_gain: covs.iter().map(gain).collect(),
        covs,
    })
}

/// Drift of the conditional means,
/// `(-γ/2 q̂ + ωp̂ - √γ ξ, -γ/2 p̂ - ωq̂)`.
pub fn conditional_mean_drift(p: &CavityPlant, q_hat: f64, p_hat: f64, xi: f64) -> [f64; 2] {
    let g = p.gamma;
    [
        -g / 2.0 * q_hat + p.omega * p_hat - g.sqrt() * xi,
        -g / 2.0 * p_hat - p.omega * q_hat,
    ]
}

/// One Euler step of the conditional means driven by the innovation `dν`.
pub fn conditional_mean_step(
    p: &CavityPlant,
    mean: [f64; 2],
    xi: f64,
    gains: [f64; 2],
    dnu: f64,
    dt: f64,
) -> [f64; 2] {
    let d = conditional_mean_drift(p, mean[0], mean[1], xi);
    [mean[0] + d[0] * dt + gains[0] * dnu, mean[1] + d[1] * dt + gains[1] * dnu]
}

/// `‖P - Pᵀ‖∞` maximized over a filter run.
pub fn filter_asymmetry(run: &FilterRun) -> f64 {
    run.covs
        .iter()
        .map(|m| inf_norm(&(m - m.transpose())))
        .fold(0.0, f64::max)
}
