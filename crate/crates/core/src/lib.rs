//! Velocity and orientation tracking for mmWave-connected headsets from
//! channel frequency response measurements.
//!
//! The crate covers the link budget of an indoor 60 GHz deployment, a
//! synthetic CFR generator, MUSIC-based Doppler and angle estimators, error
//! propagation laws for inertial and radio tracking, and the experiment
//! drivers that regenerate every table and figure of the evaluation.

pub mod config;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod rng;
pub mod scenario;
pub mod signalmodel;
pub mod subspace;
pub mod tracking;

pub use error::{Error, Result};
pub use scenario::{ScenarioConfig, ScenarioVariant};
