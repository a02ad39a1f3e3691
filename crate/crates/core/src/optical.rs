//! Optical network parameters for each mode: an auxiliary cavity per field
//! channel coupled to the main cavity through a two-mode squeezer (`ε₁`) and
//! a beam splitter (`ε₂`), plus a DPA where the Hamiltonian needs one.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::{inf_norm, RealMatrix};
use crate::quantum::{
    check_physical_realizability, realizability_scale, QuantumSystem, DEFAULT_PR_TOLERANCE,
};
use crate::slh::{direct_coupling_coefficients, mode_coupling, to_slh, CouplingRow, DirectCoupling};

pub const DEFAULT_GAMMA: f64 = 100.0;

/// `√γ` should be at least this multiple of `max(|α|, |β|)`.
pub const ADEQUACY_FACTOR: f64 = 5.0;

const DPA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalCoupling {
    pub gamma: f64,
    /// Two-mode squeezer pump.
    pub eps1: Complex64,
    /// Beam splitter coefficient, `2θe^{-iφ}`.
    pub eps2: Complex64,
    pub theta: f64,
    pub phi: f64,
    pub scattering_phase: Complex64,
    /// `false` when `γ` is small against the coupling it has to approximate.
    pub adequate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryCoupling {
    pub aux_cavity: String,
    pub channel: usize,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub coupling: OpticalCoupling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub mode: usize,
    pub main_cavity: String,
    pub dpa_required: bool,
    pub couplings: Vec<AuxiliaryCoupling>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OpticalNetlist {
    pub modes: Vec<ModeEntry>,
    pub direct_couplings: Vec<DirectCoupling>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetlistFormat {
    Json,
    Dot,
}

impl FromStr for NetlistFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "dot" => Ok(Self::Dot),
            other => Err(Error::Parameter(format!("unknown netlist format '{other}' (json, dot)"))),
        }
    }
}

/// Inverts `L ≈ (1/√γ)(-ε₂*a + ε₁a*)` for the given ladder coefficients.
pub fn synthesize_coupling(row: CouplingRow, gamma: f64) -> Result<OpticalCoupling> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::Parameter(format!("gamma must be positive, got {gamma}")));
    }
    let sg = gamma.sqrt();
    // Adding +0 clears negative zeros so that zero couplings get φ = 0.
    let zero = Complex64::new(0.0, 0.0);
    let eps1 = row.beta * sg + zero;
    let eps2 = -row.alpha.conj() * sg + zero;
    let mut phi = -eps2.arg() + 0.0;
    if phi <= -PI {
        phi += 2.0 * PI;
    }
    Ok(OpticalCoupling {
        gamma,
        eps1,
        eps2,
        theta: eps2.norm() / 2.0,
        phi,
        scattering_phase: Complex64::new(-1.0, 0.0),
        adequate: sg >= ADEQUACY_FACTOR * row.alpha.norm().max(row.beta.norm()),
    })
}

/// Whether the diagonal 2×2 block of `R` (interleaved ordering) for `mode` is nonzero.
pub fn requires_dpa(r: &RealMatrix, mode: usize) -> bool {
    let tol = DPA_TOL * inf_norm(r).max(1.0);
    r.view((2 * mode, 2 * mode), (2, 2)).iter().any(|x| x.abs() > tol)
}

/// Optical parameters for every mode and channel of a realizable system.
///
/// `gammas` holds one rate per field channel.
pub fn build_netlist(q: &QuantumSystem, gammas: &[f64]) -> Result<OpticalNetlist> {
    let pr = check_physical_realizability(q, DEFAULT_PR_TOLERANCE * realizability_scale(q));
    if !pr.pass {
        return Err(Error::NotRealizable(pr.residual1, pr.residual2, pr.residual3));
    }
    let m = q.channels();
    if gammas.len() != m {
        return Err(Error::Dimension(format!(
            "need one gamma per field channel ({m}), got {}",
            gammas.len()
        )));
    }
    let slh = to_slh(q);
    let mut modes = Vec::with_capacity(q.n());
    for mode in 0..q.n() {
        let mut couplings = Vec::with_capacity(m);
        for (channel, &gamma) in gammas.iter().enumerate() {
            let row = mode_coupling(slh.lambda(), channel, mode);
            couplings.push(AuxiliaryCoupling {
                aux_cavity: format!("G{}_{}", mode + 1, channel + 1),
                channel,
                alpha: row.alpha,
                beta: row.beta,
                coupling: synthesize_coupling(row, gamma)?,
            });
        }
        modes.push(ModeEntry {
            mode,
            main_cavity: format!("G{}", mode + 1),
            dpa_required: requires_dpa(slh.r(), mode),
            couplings,
        });
    }
    Ok(OpticalNetlist {
        modes,
        direct_couplings: direct_coupling_coefficients(&slh),
    })
}

fn complex_label(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

fn to_dot(nl: &OpticalNetlist) -> String {
    let mut out = String::from("digraph netlist {\n  rankdir=LR;\n");
    for m in &nl.modes {
        let _ = writeln!(out, "  \"{0}\" [shape=box, label=\"{0}\"];", m.main_cavity);
        if m.dpa_required {
            let _ = writeln!(out, "  \"{0}_dpa\" [shape=diamond, label=\"DPA\"];", m.main_cavity);
            let _ = writeln!(out, "  \"{0}_dpa\" -> \"{0}\" [dir=none];", m.main_cavity);
        }
        for c in &m.couplings {
            let oc = &c.coupling;
            let _ = writeln!(
                out,
                "  \"{}\" [shape=ellipse, label=\"{} gamma={}\"];",
                c.aux_cavity, c.aux_cavity, oc.gamma
            );
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [dir=none, label=\"eps1={} theta={} phi={}\"];",
                c.aux_cavity,
                m.main_cavity,
                complex_label(oc.eps1),
                oc.theta,
                oc.phi
            );
        }
    }
    // Each field channel passes the auxiliary cavities mode by mode.
    let channels = nl.modes.first().map_or(0, |m| m.couplings.len());
    for k in 0..channels {
        let _ = writeln!(out, "  \"in{0}\" [shape=point]; \"out{0}\" [shape=point];", k + 1);
        let mut prev = format!("in{}", k + 1);
        for m in &nl.modes {
            let next = &m.couplings[k].aux_cavity;
            let _ = writeln!(out, "  \"{prev}\" -> \"{next}\" [label=\"field {}\"];", k + 1);
            prev = next.clone();
        }
        let _ = writeln!(out, "  \"{prev}\" -> \"out{0}\" [label=\"field {0}\"];", k + 1);
    }
    for d in &nl.direct_couplings {
        let _ = writeln!(
            out,
            "  \"G{}\" -> \"G{}\" [dir=both, style=dashed, label=\"direct\"];",
            d.j + 1,
            d.k + 1
        );
    }
    out.push_str("}\n");
    out
}

pub fn export_netlist(nl: &OpticalNetlist, format: NetlistFormat) -> Result<String> {
    match format {
        NetlistFormat::Json => serde_json::to_string_pretty(nl)
            .map_err(|e| Error::Parameter(format!("netlist serialization failed: {e}"))),
        NetlistFormat::Dot => Ok(to_dot(nl)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::scalar_quantum;
    use nalgebra::dmatrix;

    fn row(a: f64, b: f64) -> CouplingRow {
        CouplingRow {
            alpha: Complex64::new(a, 0.0),
            beta: Complex64::new(b, 0.0),
        }
    }

    #[test]
    fn first_channel_of_scalar_system() {
        let c = synthesize_coupling(row(-1.5, -0.5), 100.0).unwrap();
        assert!((c.eps1 - Complex64::new(-5.0, 0.0)).norm() < 1e-9);
        assert!((c.eps2 - Complex64::new(15.0, 0.0)).norm() < 1e-9);
        assert!((c.theta - 7.5).abs() < 1e-9);
        assert_eq!(c.phi, 0.0);
        assert!(c.phi.is_sign_positive());
        assert!(c.adequate);
    }

    #[test]
    fn second_channel_of_scalar_system() {
        let c = synthesize_coupling(row(0.5, 0.5), 100.0).unwrap();
        assert!((c.eps1 - Complex64::new(5.0, 0.0)).norm() < 1e-9);
        assert!((c.eps2 - Complex64::new(-5.0, 0.0)).norm() < 1e-9);
        assert!((c.theta - 2.5).abs() < 1e-9);
        assert!((c.phi - PI).abs() < 1e-9);
    }

    #[test]
    fn zero_row_and_bad_gamma() {
        let c = synthesize_coupling(row(0.0, 0.0), 3.0).unwrap();
        assert_eq!(c.eps1, Complex64::new(0.0, 0.0));
        assert_eq!(c.theta, 0.0);
        assert_eq!(c.phi, 0.0);
        assert!(synthesize_coupling(row(1.0, 0.0), 0.0).is_err());
        assert!(synthesize_coupling(row(1.0, 0.0), -2.0).is_err());
    }

    #[test]
    fn weak_gamma_is_flagged() {
        assert!(!synthesize_coupling(row(-1.5, -0.5), 4.0).unwrap().adequate);
    }

    #[test]
    fn dpa_decision() {
        assert!(!requires_dpa(&RealMatrix::zeros(2, 2), 0));
        assert!(requires_dpa(&(RealMatrix::identity(2, 2) * 0.5), 0));
        let mut r = RealMatrix::zeros(4, 4);
        r[(0, 2)] = 1.0;
        r[(2, 0)] = 1.0;
        assert!(!requires_dpa(&r, 0) && !requires_dpa(&r, 1));
    }

    #[test]
    fn scalar_netlist() {
        let nl = build_netlist(&scalar_quantum(), &[100.0, 100.0]).unwrap();
        assert_eq!(nl.modes.len(), 1);
        assert!(!nl.modes[0].dpa_required);
        assert!(nl.direct_couplings.is_empty());
        let json = export_netlist(&nl, NetlistFormat::Json).unwrap();
        assert!(json.contains("\"theta\": 7.5"));
        let back: OpticalNetlist = serde_json::from_str(&json).unwrap();
        assert_eq!(back, nl);
        assert!(build_netlist(&scalar_quantum(), &[100.0]).is_err());
    }

    #[test]
    fn refuses_non_realizable() {
        let q = QuantumSystem::new(
            dmatrix![-1.0, 0.0; 0.0, -1.0],
            RealMatrix::zeros(2, 2),
            RealMatrix::zeros(2, 2),
            dmatrix![1.0, 0.0; 0.0, 1.0],
        )
        .unwrap();
        assert!(matches!(build_netlist(&q, &[100.0]), Err(Error::NotRealizable(..))));
    }

    #[test]
    fn empty_documents() {
        let nl = OpticalNetlist::default();
        let json = export_netlist(&nl, NetlistFormat::Json).unwrap();
        assert_eq!(serde_json::from_str::<OpticalNetlist>(&json).unwrap(), nl);
        assert_eq!(export_netlist(&nl, NetlistFormat::Dot).unwrap(), "digraph netlist {\n  rankdir=LR;\n}\n");
        assert!("svg".parse::<NetlistFormat>().is_err());
    }
}
