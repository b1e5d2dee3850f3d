//! Validated parameter types for the forward models.
//!
//! Every type checks its ranges at construction and is immutable afterwards,
//! so instances can be shared freely between threads. All fields are in base
//! units (seconds, hertz, V/cm, cm⁻¹) except where noted.

use crate::error::{Error, Result};

/// Two-exponential population model: amplitude split `B` between a fast
/// excited-state decay (`t1e`) and a slow bottleneck decay (`t1b`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayModelParams {
    b: f64,
    t1e: f64,
    t1b: f64,
}

impl DecayModelParams {
    /// Requires 0 ≤ b ≤ 1 and positive lifetimes. Equal or inverted
    /// lifetimes are legal here; only the branching-ratio conversion
    /// needs `t1b > t1e`.
    pub fn new(b: f64, t1e: f64, t1b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&b) || !b.is_finite() {
            return Err(Error::invalid_param(format!("B must lie in [0, 1], got {b}")));
        }
        if t1e <= 0.0 || !t1e.is_finite() {
            return Err(Error::invalid_param(format!("T1e must be > 0 s, got {t1e}")));
        }
        if t1b <= 0.0 || !t1b.is_finite() {
            return Err(Error::invalid_param(format!("T1b must be > 0 s, got {t1b}")));
        }
        Ok(DecayModelParams { b, t1e, t1b })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Excited-state lifetime, seconds.
    pub fn t1e(&self) -> f64 {
        self.t1e
    }

    /// Bottleneck lifetime, seconds.
    pub fn t1b(&self) -> f64 {
        self.t1b
    }
}

/// Two-pulse echo decay parameters: peak intensity, phase-memory time and
/// the stretch exponent characterizing spectral diffusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceParams {
    i0: f64,
    t2: f64,
    x: f64,
}

impl CoherenceParams {
    pub fn new(i0: f64, t2: f64, x: f64) -> Result<Self> {
        if i0 <= 0.0 || !i0.is_finite() {
            return Err(Error::invalid_param(format!("I0 must be > 0, got {i0}")));
        }
        if t2 <= 0.0 || !t2.is_finite() {
            return Err(Error::invalid_param(format!("T2 must be > 0 s, got {t2}")));
        }
        if x <= 0.0 || !x.is_finite() {
            return Err(Error::invalid_param(format!("x must be > 0, got {x}")));
        }
        Ok(CoherenceParams { i0, t2, x })
    }

    pub fn i0(&self) -> f64 {
        self.i0
    }

    /// Phase memory (coherence) time, seconds.
    pub fn t2(&self) -> f64 {
        self.t2
    }

    /// Spectral-diffusion stretch exponent.
    pub fn x(&self) -> f64 {
        self.x
    }
}

/// Spectral-diffusion linewidth model: short-term width `gamma0`, maximum
/// added width `gamma_sd`, and the rate `rate` at which it accrues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionParams {
    gamma0: f64,
    gamma_sd: f64,
    rate: f64,
}

impl DiffusionParams {
    pub fn new(gamma0: f64, gamma_sd: f64, rate: f64) -> Result<Self> {
        for (name, v) in [("gamma0", gamma0), ("gamma_sd", gamma_sd), ("rate", rate)] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::invalid_param(format!(
                    "{name} must be >= 0 Hz, got {v}"
                )));
            }
        }
        Ok(DiffusionParams {
            gamma0,
            gamma_sd,
            rate,
        })
    }

    /// Short-term linewidth, hertz.
    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// Maximum added linewidth, hertz.
    pub fn gamma_sd(&self) -> f64 {
        self.gamma_sd
    }

    /// Diffusion rate, hertz.
    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// Linear electric-field tuning coefficient, Hz·cm/V. The sign carries the
/// dipole orientation; the aggregate of the correction factor and dipole
/// difference is not separable from a single measured slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarkParams {
    slope: f64,
}

impl StarkParams {
    pub fn new(slope: f64) -> Result<Self> {
        if !slope.is_finite() {
            return Err(Error::invalid_param(format!(
                "stark slope must be finite, got {slope}"
            )));
        }
        Ok(StarkParams { slope })
    }

    /// Hz·cm/V.
    pub fn slope(&self) -> f64 {
        self.slope
    }
}

/// Gaussian in-diffused dopant profile: surface peak concentration,
/// 1/e penetration depth, and the diffusion time that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopingProfileParams {
    peak_concentration: f64,
    d1e: f64,
    diffusion_time: f64,
}

impl DopingProfileParams {
    pub fn new(peak_concentration: f64, d1e: f64, diffusion_time: f64) -> Result<Self> {
        for (name, v) in [
            ("peak_concentration", peak_concentration),
            ("d1e", d1e),
            ("diffusion_time", diffusion_time),
        ] {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::invalid_param(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(DopingProfileParams {
            peak_concentration,
            d1e,
            diffusion_time,
        })
    }

    /// Ions per cm³ at the surface.
    pub fn peak_concentration(&self) -> f64 {
        self.peak_concentration
    }

    /// 1/e penetration depth, micrometers.
    pub fn d1e(&self) -> f64 {
        self.d1e
    }

    /// Diffusion time, hours.
    pub fn diffusion_time(&self) -> f64 {
        self.diffusion_time
    }
}

/// A set of electronic levels (energy in cm⁻¹, degeneracy) with the ground
/// level at energy zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelScheme {
    levels: Vec<(f64, u32)>,
}

impl LevelScheme {
    /// Requires at least one level at energy 0 (the ground reference),
    /// nonnegative energies, and positive degeneracies.
    pub fn new(levels: Vec<(f64, u32)>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid_param("level scheme must be nonempty"));
        }
        for &(e, g) in &levels {
            if e < 0.0 || !e.is_finite() {
                return Err(Error::invalid_param(format!(
                    "level energy must be >= 0 cm^-1, got {e}"
                )));
            }
            if g == 0 {
                return Err(Error::invalid_param("level degeneracy must be positive"));
            }
        }
        if !levels.iter().any(|&(e, _)| e == 0.0) {
            return Err(Error::invalid_param(
                "level scheme needs a ground level at energy 0",
            ));
        }
        Ok(LevelScheme { levels })
    }

    pub fn levels(&self) -> &[(f64, u32)] {
        &self.levels
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_params_range_checks() {
        assert!(DecayModelParams::new(0.436, 82e-6, 2.364e-3).is_ok());
        assert!(DecayModelParams::new(-0.1, 82e-6, 2.364e-3).is_err());
        assert!(DecayModelParams::new(1.1, 82e-6, 2.364e-3).is_err());
        assert!(DecayModelParams::new(0.5, 0.0, 2.364e-3).is_err());
        assert!(DecayModelParams::new(0.5, 82e-6, -1.0).is_err());
        // degenerate lifetimes are constructible; only branching_beta rejects them
        assert!(DecayModelParams::new(0.5, 1e-3, 1e-3).is_ok());
        assert!(DecayModelParams::new(0.0, 82e-6, 2.364e-3).is_ok());
        assert!(DecayModelParams::new(1.0, 82e-6, 2.364e-3).is_ok());
    }

    #[test]
    fn coherence_params_range_checks() {
        assert!(CoherenceParams::new(1.0, 1.58e-6, 1.072).is_ok());
        assert!(CoherenceParams::new(0.0, 1.58e-6, 1.072).is_err());
        assert!(CoherenceParams::new(1.0, -1.0, 1.072).is_err());
        assert!(CoherenceParams::new(1.0, 1.58e-6, 0.0).is_err());
    }

    #[test]
    fn diffusion_params_allow_zero() {
        assert!(DiffusionParams::new(0.0, 0.0, 0.0).is_ok());
        assert!(DiffusionParams::new(-1.0, 0.0, 0.0).is_err());
        assert!(DiffusionParams::new(152e3, f64::NAN, 227e3).is_err());
    }

    #[test]
    fn stark_params_sign_allowed() {
        assert!(StarkParams::new(-24.6e3).is_ok());
        assert!(StarkParams::new(f64::INFINITY).is_err());
    }

    #[test]
    fn doping_params_positive() {
        assert!(DopingProfileParams::new(1.35e20, 6.5, 150.0).is_ok());
        assert!(DopingProfileParams::new(0.0, 6.5, 150.0).is_err());
    }

    #[test]
    fn level_scheme_needs_ground() {
        assert!(LevelScheme::new(vec![(0.0, 1), (14.7, 1)]).is_ok());
        assert!(LevelScheme::new(vec![(7.6, 1)]).is_err());
        assert!(LevelScheme::new(vec![]).is_err());
        assert!(LevelScheme::new(vec![(0.0, 0)]).is_err());
    }
}
