//! Model files: JSON with row-major nested arrays.

use std::path::Path;

use serde::Deserialize;

use qembed_core::json::matrix_from_rows;
use qembed_core::realization::B3Strategy;
use qembed_core::{ClassicalSystem, FreeParameters, InitialState};

use crate::CliError;

/// Value of `--b3-strategy`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum B3Choice {
    Auto,
    Pseudoinverse,
    Riccati,
    /// Use `free_params.B3` from the model file.
    Explicit,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
    #[serde(default)]
    pub free_params: Option<FreeParamsFile>,
    #[serde(default)]
    pub gammas: Option<Vec<f64>>,
    #[serde(default)]
    pub initial: Option<InitialState>,
    #[serde(default)]
    pub simulation: Option<SimulationBlock>,
    #[serde(default)]
    pub feedback: Option<FeedbackBlock>,
}

/// Any block left out is zero. `B3` present means an explicit choice.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeParamsFile {
    #[serde(rename = "B1")]
    pub b1: Option<Vec<Vec<f64>>>,
    #[serde(rename = "B2")]
    pub b2: Option<Vec<Vec<f64>>>,
    #[serde(rename = "B3")]
    pub b3: Option<Vec<Vec<f64>>>,
    #[serde(rename = "N1")]
    pub n1: Option<Vec<Vec<f64>>>,
    #[serde(rename = "N2")]
    pub n2: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Xi")]
    pub xi: Option<Vec<Vec<f64>>>,
    #[serde(rename = "D1")]
    pub d1: Option<Vec<Vec<f64>>>,
    #[serde(rename = "D2")]
    pub d2: Option<Vec<Vec<f64>>>,
    #[serde(rename = "D3")]
    pub d3: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationBlock {
    pub t_end: Option<f64>,
    pub step: Option<f64>,
    pub seed: Option<u64>,
    pub ensemble: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackBlock {
    pub omega: Option<f64>,
    pub gamma: Option<f64>,
}

/// A parsed model file with its classical system built.
#[derive(Debug, Clone)]
pub struct Model {
    pub file: ModelFile,
    pub system: ClassicalSystem,
}

fn matrix(name: &str, rows: &[Vec<f64>]) -> Result<qembed_core::foundation::RealMatrix, CliError> {
    matrix_from_rows(rows).map_err(|e| CliError::Usage(format!("{name}: {e}")))
}

impl Model {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| CliError::Usage(e.to_string()))?;
        let system = ClassicalSystem::new(
            matrix("A", &file.a)?,
            matrix("B", &file.b)?,
            matrix("C", &file.c)?,
            matrix("D", &file.d)?,
        )
        .map_err(|e| CliError::Usage(e.to_string()))?;
        if let Some(init) = &file.initial {
            let n = system.n();
            if init.mean.len() != n || init.cov.shape() != (n, n) {
                return Err(CliError::Usage(format!("initial state must have dimension {n}")));
            }
        }
        Ok(Self { file, system })
    }

    /// Free parameters from the file; `override_b3` replaces the file's `B3` choice.
    pub fn free_parameters(&self, override_b3: Option<B3Choice>) -> Result<FreeParameters, CliError> {
        let mut fp = FreeParameters::zeros(&self.system);
        let given = self.file.free_params.clone().unwrap_or_default();
        let slots = [
            ("B1", given.b1, &mut fp.b1),
            ("B2", given.b2, &mut fp.b2),
            ("N1", given.n1, &mut fp.n1),
            ("N2", given.n2, &mut fp.n2),
            ("Xi", given.xi, &mut fp.xi),
            ("D1", given.d1, &mut fp.d1),
            ("D2", given.d2, &mut fp.d2),
            ("D3", given.d3, &mut fp.d3),
        ];
        for (name, rows, slot) in slots {
            if let Some(rows) = rows {
                *slot = matrix(name, &rows)?;
            }
        }
        let explicit = given.b3.map(|rows| matrix("B3", &rows)).transpose()?;
        fp.b3 = match (override_b3, explicit) {
            (Some(B3Choice::Explicit) | None, Some(b3)) => B3Strategy::Explicit(b3),
            (Some(B3Choice::Explicit), None) => {
                return Err(CliError::Usage(
                    "--b3-strategy explicit needs free_params.B3 in the model file".into(),
                ))
            }
            (Some(B3Choice::Pseudoinverse), _) => B3Strategy::Pseudoinverse,
            (Some(B3Choice::Riccati), _) => B3Strategy::Riccati,
            (Some(B3Choice::Auto), _) | (None, None) => B3Strategy::Auto,
        };
        fp.check(&self.system).map_err(|e| CliError::Usage(format!("free_params: {e}")))?;
        Ok(fp)
    }

    pub fn initial(&self) -> InitialState {
        self.file
            .initial
            .clone()
            .unwrap_or_else(|| InitialState::standard(self.system.n()))
    }
}
