//! Receivers and error bounds for classifying an unknown coherent state
//! `|±α⟩` given `n` training copies of `|α⟩`.
//!
//! The crate is organised around the reduction chain of the problem:
//!
//! - [`optics`]: amplitude algebra, the concentrator gate and the 3-port
//!   scattering map that turns the general two-class problem into the
//!   symmetric one.
//! - [`bounds`]: the Helstrom value, the phase-invariant optimal
//!   classification error for finite `n` (series, asymptotics, prior
//!   average) and a sector-by-sector Fock-space oracle.
//! - [`dolinar`]: the classic feedback receiver with known amplitude, its
//!   miscalibrated variant and the heterodyne Estimate&Discriminate average.
//! - [`agnostic`]: the beam-splitter receiver that mixes the test state
//!   with the concentrated training light instead of a displacement.
//! - [`estimate`]: split strategies that spend `m` copies estimating
//!   `|α|²` and feed the rest to the agnostic receiver.
//! - [`telegraph`]: Monte Carlo and discretised-chain oracles for the
//!   photon-counting feedback process.
//! - [`figures`]: sweep tables, CSV output and run manifests used by the
//!   command-line front end.
//!
//! Amplitudes are dimensionless, the pulse duration is normalised to 1 and
//! all receivers are evaluated at flat priors unless stated otherwise.

pub mod agnostic;
pub mod bounds;
pub mod dolinar;
pub mod error;
pub mod estimate;
pub mod figures;
pub mod numerics;
pub mod optics;
pub mod telegraph;

pub use error::{Error, Result};
pub use optics::ComplexAmplitude;
