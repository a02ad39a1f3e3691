//! Subcommand bodies. Each returns the report to print and whether every
//! check passed.

use std::path::{Path, PathBuf};

use serde::Serialize;

use qembed_core::classical::{classical_steady_covariance, ValidationReport};
use qembed_core::feedback::{conditional_filter, consistency_check, filter_asymmetry, CavityPlant, ConsistencyReport};
use qembed_core::foundation::RealMatrix;
use qembed_core::optical::{build_netlist, export_netlist, NetlistFormat, DEFAULT_GAMMA};
use qembed_core::quantum::{check_physical_realizability, PrReport};
use qembed_core::realization::{construct, default_sample_points, select_b3, verify_embedding};
use qembed_core::simulation::{
    augment_state, classical_moments, ensemble_xi_covariance, moment_block_difference, propagate_moments,
    sample_paths, steady_covariance, GaussianState, NoiseRealization,
};
use qembed_core::{EmbeddingReport, Error, InitialState, QuantumSystem};

use crate::model::{B3Choice, Model};
use crate::CliError;

/// Sample points for the transfer-function check.
pub const TRANSFER_POINTS: usize = 20;
const TRANSFER_SEED: u64 = 0;
/// Relative tolerance for the ensemble covariance against its oracle.
pub const ENSEMBLE_TOLERANCE: f64 = 0.05;

pub struct Outcome {
    /// Document for standard output.
    pub stdout: String,
    pub pass: bool,
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    #[serde(flatten)]
    report: &'a ValidationReport,
    failures: Vec<String>,
    pass: bool,
}

pub fn validate(path: &Path) -> Result<Outcome, CliError> {
    let model = Model::load(path)?;
    let report = model.system.validate();
    let failures: Vec<String> = report.failures().iter().map(ToString::to_string).collect();
    let pass = failures.is_empty();
    Ok(Outcome {
        stdout: pretty(&ValidateOutput {
            report: &report,
            failures,
            pass,
        }),
        pass,
    })
}

/// A realized model plus everything checked along the way.
pub struct Realized {
    pub model: Model,
    pub strategy: &'static str,
    pub b3: RealMatrix,
    pub quantum: QuantumSystem,
    pub pr: PrReport,
    pub transfer: EmbeddingReport,
}

pub fn realize_model(path: &Path, b3: Option<B3Choice>, tol: f64) -> Result<Realized, CliError> {
    let model = Model::load(path)?;
    model.system.validate().into_result()?;
    let fp = model.free_parameters(b3)?;
    let strategy = fp.b3.resolve(&model.system);
    let b3_block = select_b3(&model.system, &strategy)?;
    let quantum = construct(&model.system, &fp)?;
    let pr = check_physical_realizability(&quantum, tol);
    let mut transfer = verify_embedding(
        &model.system,
        &quantum,
        &default_sample_points(TRANSFER_POINTS, TRANSFER_SEED),
    )?;
    transfer.tolerance = tol;
    transfer.pass = transfer.max_relative_error < tol;
    Ok(Realized {
        model,
        strategy: strategy.name(),
        b3: b3_block,
        quantum,
        pr,
        transfer,
    })
}

#[derive(Serialize)]
struct RealizeOutput<'a> {
    b3_strategy: &'a str,
    #[serde(rename = "B3", with = "qembed_core::json::real")]
    b3: &'a RealMatrix,
    system: &'a QuantumSystem,
    realizability: &'a PrReport,
    transfer_check: &'a EmbeddingReport,
    pass: bool,
}

pub fn realize(path: &Path, b3: Option<B3Choice>, out: Option<&PathBuf>, tol: f64) -> Result<Outcome, CliError> {
    let r = realize_model(path, b3, tol)?;
    if let Some(out) = out {
        write_file(out, &pretty(&r.quantum))?;
    }
    let pass = r.pr.pass && r.transfer.pass;
    Ok(Outcome {
        stdout: pretty(&RealizeOutput {
            b3_strategy: r.strategy,
            b3: &r.b3,
            system: &r.quantum,
            realizability: &r.pr,
            transfer_check: &r.transfer,
            pass,
        }),
        pass,
    })
}

pub fn netlist(
    path: &Path,
    b3: Option<B3Choice>,
    gammas: &[f64],
    format: NetlistFormat,
    tol: f64,
) -> Result<Outcome, CliError> {
    let r = realize_model(path, b3, tol)?;
    let channels = r.quantum.channels();
    let chosen: Vec<f64> = if !gammas.is_empty() {
        gammas.to_vec()
    } else if let Some(g) = &r.model.file.gammas {
        g.clone()
    } else {
        vec![DEFAULT_GAMMA]
    };
    let chosen = match chosen.len() {
        1 => vec![chosen[0]; channels],
        k if k == channels => chosen,
        k => {
            return Err(CliError::Usage(format!(
                "{k} coupling rates given for {channels} channels; give one or {channels}"
            )))
        }
    };
    if let Some(g) = chosen.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(CliError::Usage(format!("coupling rate must be positive, got {g}")));
    }
    let nl = build_netlist(&r.quantum, &chosen)?;
    let mut stdout = export_netlist(&nl, format)?;
    if !stdout.ends_with('\n') {
        stdout.push('\n');
    }
    Ok(Outcome {
        stdout,
        pass: true,
    })
}

#[derive(Serialize)]
struct PathCheck {
    steps: usize,
    pass: bool,
}

#[derive(Serialize)]
struct MomentCheck {
    /// Largest gap between the `ξ` block of the quantum moments and the classical moments.
    max_difference: f64,
    /// Smallest eigenvalue of `Σ + iJ` along the flow.
    min_admissibility: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SteadyCheck {
    #[serde(with = "qembed_core::json::real")]
    classical_cov: RealMatrix,
    #[serde(with = "qembed_core::json::real")]
    quantum_xi_cov: RealMatrix,
    difference: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct EnsembleCheck {
    paths: usize,
    time: f64,
    #[serde(with = "qembed_core::json::real")]
    sample_cov: RealMatrix,
    #[serde(with = "qembed_core::json::real")]
    oracle_cov: RealMatrix,
    relative_error: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SimulationChecks {
    pathwise_equality: PathCheck,
    moment_flow: MomentCheck,
    steady_state: SteadyCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    ensemble: Option<EnsembleCheck>,
}

#[derive(Serialize)]
struct SimulateOutput {
    b3_strategy: &'static str,
    seed: u64,
    t_end: f64,
    step: f64,
    checks: SimulationChecks,
    pass: bool,
}

pub struct SimulateArgs {
    pub b3: Option<B3Choice>,
    pub seed: Option<u64>,
    pub ensemble: Option<usize>,
    pub csv: Option<PathBuf>,
    pub moments_csv: Option<PathBuf>,
    pub tol: f64,
}

fn scaled(tol: f64, m: &RealMatrix) -> f64 {
    tol * m.abs().max().max(1.0)
}

pub fn simulate(path: &Path, args: &SimulateArgs) -> Result<Outcome, CliError> {
    let r = realize_model(path, args.b3, args.tol)?;
    let (sys, q) = (&r.model.system, &r.quantum);
    let block = r.model.file.simulation.clone();
    let t_end = block.as_ref().and_then(|b| b.t_end).unwrap_or(5.0);
    let step = block.as_ref().and_then(|b| b.step).unwrap_or(0.01);
    let seed = args.seed.or(block.as_ref().and_then(|b| b.seed)).unwrap_or(0);
    let ensemble = args.ensemble.or(block.as_ref().and_then(|b| b.ensemble)).unwrap_or(0);
    if !(t_end.is_finite() && t_end > 0.0 && step.is_finite() && step > 0.0) {
        return Err(CliError::Usage(format!("simulation needs t_end > 0 and step > 0, got {t_end}, {step}")));
    }
    if ensemble == 1 {
        return Err(CliError::Usage("ensemble needs at least two paths".into()));
    }
    let init = r.model.initial();
    let span = (0.0, t_end);

    let noise = NoiseRealization::for_grid(seed, q.n_w(), span, step)?;
    let paths = sample_paths(q, sys, &init.mean, &noise, span, step)?;
    if let Some(csv) = &args.csv {
        write_file(csv, &paths.to_csv())?;
    }
    let pathwise_equality = PathCheck {
        steps: noise.increments.len(),
        pass: paths.bitwise_equal(),
    };

    let g0 = augment_state(&init.mean, &init.cov)?;
    let qflow = propagate_moments(q, &g0, span, step)?;
    let cflow = classical_moments(sys, &init, span, step)?;
    if let Some(csv) = &args.moments_csv {
        write_file(csv, &qflow.to_csv())?;
    }
    let max_difference = moment_block_difference(&qflow, &cflow)?;
    let min_admissibility = qflow
        .means
        .iter()
        .zip(&qflow.covs)
        .map(|(m, s)| {
            GaussianState {
                mean: m.clone(),
                cov: s.clone(),
            }
            .admissibility()
        })
        .fold(f64::INFINITY, f64::min);
    let mtol = scaled(args.tol, &cflow.covs.iter().fold(RealMatrix::zeros(sys.n(), sys.n()), |acc, s| acc.zip_map(s, |a, b| a.max(b.abs()))));
    let moment_flow = MomentCheck {
        max_difference,
        min_admissibility,
        tolerance: mtol,
        pass: max_difference < mtol && min_admissibility > -mtol,
    };

    let classical_cov = classical_steady_covariance(sys)?;
    let n = sys.n();
    let quantum_cov = steady_covariance(q)?;
    let quantum_xi_cov = quantum_cov.view((0, 0), (n, n)).into_owned();
    let difference = (&quantum_xi_cov - &classical_cov).abs().max();
    // Rounding in the 2n-dimensional solve scales with the full covariance.
    let stol = scaled(args.tol, &quantum_cov);
    let steady_state = SteadyCheck {
        pass: difference < stol,
        classical_cov,
        quantum_xi_cov,
        difference,
        tolerance: stol,
    };

    let ensemble = if ensemble >= 2 {
        let sample_cov = ensemble_xi_covariance(q, &init.mean, ensemble, seed, span, step)?;
        // Paths start at the mean with no spread, so the oracle starts from zero covariance.
        let start = InitialState {
            mean: init.mean.clone(),
            cov: RealMatrix::zeros(n, n),
        };
        let oracle_cov = classical_moments(sys, &start, span, step)?.last_cov().clone();
        let relative_error = (&sample_cov - &oracle_cov).abs().max() / oracle_cov.abs().max().max(f64::MIN_POSITIVE);
        Some(EnsembleCheck {
            paths: ensemble,
            time: t_end,
            pass: relative_error < ENSEMBLE_TOLERANCE,
            sample_cov,
            oracle_cov,
            relative_error,
            tolerance: ENSEMBLE_TOLERANCE,
        })
    } else {
        None
    };

    let pass = pathwise_equality.pass
        && moment_flow.pass
        && steady_state.pass
        && ensemble.as_ref().is_none_or(|e| e.pass);
    Ok(Outcome {
        stdout: pretty(&SimulateOutput {
            b3_strategy: r.strategy,
            seed,
            t_end,
            step,
            checks: SimulationChecks {
                pathwise_equality,
                moment_flow,
                steady_state,
                ensemble,
            },
            pass,
        }),
        pass,
    })
}

#[derive(Serialize)]
struct FilterSummary {
    t_end: f64,
    step: f64,
    /// `(K_q, K_p)` at `t = 0` from the vacuum covariance.
    initial_gain: [f64; 2],
    final_gain: [f64; 2],
    #[serde(with = "qembed_core::json::real")]
    final_cov: RealMatrix,
    asymmetry: f64,
}

#[derive(Serialize)]
struct FeedbackOutput {
    consistency: ConsistencyReport,
    tolerance: f64,
    filter: FilterSummary,
    pass: bool,
}

pub struct FeedbackArgs {
    pub model: Option<PathBuf>,
    pub omega: Option<f64>,
    pub gamma: Option<f64>,
    pub t_end: f64,
    pub step: f64,
    pub csv: Option<PathBuf>,
    pub tol: f64,
}

pub const DEFAULT_OMEGA: f64 = 0.5;
pub const DEFAULT_FEEDBACK_GAMMA: f64 = 1.0;

pub fn feedback(args: &FeedbackArgs) -> Result<Outcome, CliError> {
    let block = match &args.model {
        Some(p) => Model::load(p)?.file.feedback,
        None => None,
    };
    let omega = args
        .omega
        .or(block.as_ref().and_then(|b| b.omega))
        .unwrap_or(DEFAULT_OMEGA);
    let gamma = args
        .gamma
        .or(block.as_ref().and_then(|b| b.gamma))
        .unwrap_or(DEFAULT_FEEDBACK_GAMMA);
    if !omega.is_finite() {
        return Err(CliError::Usage(format!("omega must be finite, got {omega}")));
    }
    let plant = CavityPlant::new(omega, gamma).map_err(|e| CliError::Usage(e.to_string()))?;
    if !(args.t_end > 0.0 && args.step > 0.0) {
        return Err(CliError::Usage("--t-end and --step must be positive".into()));
    }
    let consistency = consistency_check(&plant)?;
    let run = conditional_filter(&plant, &RealMatrix::identity(2, 2), (0.0, args.t_end), args.step)?;
    if let Some(csv) = &args.csv {
        write_file(csv, &run.to_csv(true))?;
    }
    let last = run.times.len() - 1;
    let filter = FilterSummary {
        t_end: args.t_end,
        step: args.step,
        initial_gain: [run.k_q[0], run.k_p[0]],
        final_gain: [run.k_q[last], run.k_p[last]],
        final_cov: run.covs[last].clone(),
        asymmetry: filter_asymmetry(&run),
    };
    let pass = consistency.max_abs_diff < args.tol;
    Ok(Outcome {
        stdout: pretty(&FeedbackOutput {
            consistency,
            tolerance: args.tol,
            filter,
            pass,
        }),
        pass,
    })
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Dimension(_) => CliError::Usage(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}
