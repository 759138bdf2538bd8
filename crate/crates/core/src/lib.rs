//! Simulation and estimation toolkit for XL-MIMO FMCW radar under the
//! spatial wideband effect.
//!
//! The crate synthesizes the time-antenna coupled IF signal of a virtual
//! ULA, estimates the scene signature (target count, ranges, angles and
//! complex amplitudes) with a DFT-coarse / compressive-sensing-fine
//! pipeline, runs narrowband and rotation baselines, and scores all of
//! them with Monte-Carlo hit/false/RMSE statistics.

pub mod baselines;
pub mod compensate;
pub mod config;
pub mod cs;
pub mod error;
pub mod fft;
pub mod io;
pub mod methods;
pub mod metrics;
pub mod pipeline;
pub mod signature;
pub mod synth;
pub mod transform;

pub use config::RadarConfig;
pub use error::{Error, Result};
pub use signature::{Signature, SignatureEntry, Target};
pub use synth::IfData;
