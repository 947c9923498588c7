//! Motif-based DNA storage: composite-symbol codec, synthesis and sequencing
//! simulation, a signal-level motif caller, baseline motif searches on
//! basecalled reads, and block recovery.

pub mod caller;
pub mod codec;
pub mod ctc;
pub mod dna;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod library;
pub mod recovery;
pub mod rng;
pub mod scalar;
pub mod search;
pub mod selftest;
pub mod synthsim;

pub use error::{Error, Result};

/// Emission matrix in double precision.
pub type EmissionMatrix = ctc::Emissions<f64>;
/// Emission matrix in single precision, as stored on disk.
pub type EmissionMatrix32 = ctc::Emissions<f32>;
