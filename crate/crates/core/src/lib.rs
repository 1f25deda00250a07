//! Performance model of heralded quantum repeaters built from single-photon
//! sources, with a pair-source baseline.
//!
//! - [`fock`]: exact linear optics on a truncated multimode Fock space.
//! - [`link`]: elementary links, swapping, post-selection and chain folding.
//! - [`rate`]: closed-form waiting times, fidelity budgets and optimizers.
//! - [`sim`]: Monte Carlo of the waiting time.

pub mod fock;
pub mod link;
pub mod rate;
pub mod sim;

pub use fock::{BeamSplitterSpec, DetectorModel, FockError, MixedState, ModeRegister, PureState};
pub use link::{ChainReport, LinkError, LinkOutcome, RepeaterParams, SourceModel};
pub use rate::{Efficiencies, PerformanceReport, RateError};
pub use sim::{SimConfig, SimError, SimResult};
