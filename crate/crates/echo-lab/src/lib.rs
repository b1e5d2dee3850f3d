//! Modeling and parameter estimation for photon-echo and spectral-hole
//! spectroscopy of rare-earth-doped waveguides.
//!
//! The crate is organized around four layers:
//!
//! - [`models`] — pure forward models: two-exponential hole decay,
//!   stretched-exponential two-pulse echoes, stimulated echoes under
//!   spectral diffusion, linear Stark shifts, dopant diffusion profiles,
//!   and thermal level occupation.
//! - [`fit`] — a damped Gauss–Newton least-squares engine with
//!   finite-difference jacobians, plus the specific fitting procedures
//!   ([`fit::fit_hole_decay`], [`fit::fit_mims`], [`fit::fit_3ppe_joint`],
//!   [`fit::extrapolate_zero_power`]).
//! - [`synth`] — canonical measurement schedules, a seeded noise model,
//!   and Monte-Carlo round-trip validation.
//! - [`trace`], [`config`], [`report`], [`cli`] — the batch-analysis
//!   front end: trace CSV I/O, key=value configs, derived-quantity
//!   reports, and the `echo-lab` binary's subcommands.
//!
//! Everything computes in base units (seconds, hertz, V/cm, cm⁻¹);
//! [`units::canonicalize_units`] converts tagged values in.
//!
//! See the `examples/` directory for one runnable walk-through per
//! capability.

pub mod cli;
pub mod config;
pub mod constants;
pub mod error;
pub mod fit;
pub mod models;
pub mod params;
pub mod report;
pub mod series;
pub mod synth;
pub mod trace;
pub mod units;

pub use constants::{PhysicalConstants, CONSTANTS};
pub use error::{Error, Result};
pub use params::{
    CoherenceParams, DecayModelParams, DiffusionParams, DopingProfileParams, LevelScheme,
    StarkParams,
};
pub use series::{FitResult, SamplePoint, TimeSeries, ValueUnit};

/// Toolkit version recorded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
