//! Quantum embeddings of classical linear stochastic systems.
//!
//! A stable classical system `dξ = Aξ dt + B dv₁`, `dy = Cξ dt + D dv₂` is
//! embedded as the commutative subsystem of a physically realizable linear
//! quantum system. The crate builds the embedding, converts it to SLH form,
//! synthesizes an optical network description, simulates moments and sample
//! paths, and models a measurement feedback loop around an optical cavity.
//!
//! ```
//! use qembed_core::fixtures::scalar_classical;
//! use qembed_core::optical::build_netlist;
//! use qembed_core::realization::{construct, default_sample_points, verify_embedding};
//! use qembed_core::FreeParameters;
//!
//! # fn main() -> qembed_core::Result<()> {
//! let sys = scalar_classical();
//! let q = construct(&sys, &FreeParameters::zeros(&sys))?;
//! let report = verify_embedding(&sys, &q, &default_sample_points(20, 0))?;
//! assert!(report.pass);
//! let netlist = build_netlist(&q, &[100.0; 2])?;
//! assert_eq!(netlist.modes.len(), 1);
//! # Ok(())
//! # }
//! ```

pub mod classical;
pub mod error;
pub mod feedback;
pub mod fixtures;
pub mod foundation;
pub mod json;
pub mod optical;
pub mod quantum;
pub mod realization;
pub mod simulation;
pub mod slh;

pub use classical::{ClassicalSystem, InitialState, ValidationReport};
pub use error::{AssumptionFailure, Error, Result};
pub use quantum::{ChannelLayout, PrReport, QuantumSystem};
pub use realization::{B3Strategy, EmbeddingReport, FreeParameters};
