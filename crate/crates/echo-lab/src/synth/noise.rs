//! Seeded measurement-noise model.

use crate::error::{Error, Result};

/// Multiplicative Gaussian noise plus an additive Gaussian detection floor,
/// reproducible from a 64-bit seed: identical seeds give identical draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Relative sigma of the multiplicative component.
    pub relative_sigma: f64,
    /// Absolute sigma of the additive floor, in the value's own unit.
    pub additive_floor: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(relative_sigma: f64, additive_floor: f64, seed: u64) -> Result<Self> {
        for (name, v) in [
            ("relative_sigma", relative_sigma),
            ("additive_floor", additive_floor),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::invalid_param(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(NoiseModel {
            relative_sigma,
            additive_floor,
            seed,
        })
    }

    /// Noiseless placeholder (sigma columns are omitted downstream).
    pub fn none(seed: u64) -> Self {
        NoiseModel {
            relative_sigma: 0.0,
            additive_floor: 0.0,
            seed,
        }
    }

    pub fn is_none(&self) -> bool {
        self.relative_sigma == 0.0 && self.additive_floor == 0.0
    }

    /// Standard deviation applied to a clean value.
    pub fn sigma_for(&self, clean: f64) -> f64 {
        ((self.relative_sigma * clean).powi(2) + self.additive_floor.powi(2)).sqrt()
    }
}
