//! Numerical laboratory for the Kalton-Peck space `Z2` at finite truncation.
//!
//! The crate provides the Kalton-Peck map and its numerical inverse, the
//! quasinorms of `Z2`, `ℓf` and `ℓf*`, the 2×2 block-operator calculus on
//! `Z2`, classical operators (Cesàro, Hilbert, Hausdorff), operator-norm
//! estimators with growth-trend classification, boundedness-condition
//! checks for block-operator families, and spectral diagnostics.

pub mod blockop;
pub mod conditions;
pub mod dd;
pub mod error;
pub mod linmap;
pub mod normest;
pub mod seqspace;
pub mod spectra;
pub mod z2core;
pub mod zoo;

pub use blockop::BlockOperator;
pub use error::{Result, Z2Error};
pub use linmap::LinearMap;
pub use seqspace::{PExponent, SeqVec};
pub use z2core::{Z2Functional, Z2Vec};

/// Version of this library, embedded in experiment reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
