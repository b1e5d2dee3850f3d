//! Fittable model identifiers and their raw evaluations.
//!
//! The optimizer works on plain parameter vectors in a canonical per-model
//! order; evaluation here is unchecked (range enforcement happens at problem
//! setup, and internal transforms keep iterates in range).

use crate::error::{Error, Result};

const FOUR_PI: f64 = 2.0 * std::f64::consts::TAU;

/// A model the fit engine and CLI know by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// `amplitude·((1-b)·exp(-t/t1e) + b·exp(-t/t1b))`
    HoleDecay,
    /// `i0·exp(-(4t/t2)^x)`
    Mims,
    /// `i0·F(t)·exp(-4π·delay·Γeff(delay, t))` with `t1b` and `delay` among the parameters
    ThreePulseEcho,
    /// Two-pulse echo decay vs delay in the diffusion picture:
    /// `i0·exp(-4π·t·(gamma0 + ½·gamma_sd·rate·t))`
    TwoPulseDiffusion,
    /// `slope·field`
    Stark,
    /// `intercept + slope·t`
    Linear,
}

/// How a parameter is represented inside the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// Raw value (signed quantities: slopes, intercepts).
    Identity,
    /// `z = ln p` — positive quantities (lifetimes, widths, rates, amplitudes).
    Log,
    /// `z = logit p` — fractions confined to (0, 1).
    Logistic,
}

impl Transform {
    // exp() overflows above ~709.78 and underflows to zero below ~-745;
    // clamping the transformed coordinate keeps every raw parameter finite
    // no matter where the optimizer wanders
    const Z_LO: f64 = -745.0;
    const Z_HI: f64 = 709.0;

    pub fn forward(self, p: f64) -> f64 {
        match self {
            Transform::Identity => p,
            Transform::Log => p.ln().clamp(Self::Z_LO, Self::Z_HI),
            Transform::Logistic => (p / (1.0 - p)).ln().clamp(Self::Z_LO, Self::Z_HI),
        }
    }

    pub fn inverse(self, z: f64) -> f64 {
        match self {
            Transform::Identity => z,
            Transform::Log => z.clamp(Self::Z_LO, Self::Z_HI).exp(),
            Transform::Logistic => 1.0 / (1.0 + (-z.clamp(Self::Z_LO, Self::Z_HI)).exp()),
        }
    }
}

impl ModelKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "hole-decay" => Ok(ModelKind::HoleDecay),
            "mims" => Ok(ModelKind::Mims),
            "3ppe" => Ok(ModelKind::ThreePulseEcho),
            "2ppe-sd" => Ok(ModelKind::TwoPulseDiffusion),
            "stark" => Ok(ModelKind::Stark),
            "linear" => Ok(ModelKind::Linear),
            other => Err(Error::FitSetup(format!("unknown model `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::HoleDecay => "hole-decay",
            ModelKind::Mims => "mims",
            ModelKind::ThreePulseEcho => "3ppe",
            ModelKind::TwoPulseDiffusion => "2ppe-sd",
            ModelKind::Stark => "stark",
            ModelKind::Linear => "linear",
        }
    }

    /// Parameter names in canonical order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::HoleDecay => &["amplitude", "b", "t1e", "t1b"],
            ModelKind::Mims => &["i0", "t2", "x"],
            ModelKind::ThreePulseEcho => {
                &["i0", "gamma0", "gamma_sd", "rate", "b", "t1e", "t1b", "delay"]
            }
            ModelKind::TwoPulseDiffusion => &["i0", "gamma0", "gamma_sd", "rate"],
            ModelKind::Stark => &["slope"],
            ModelKind::Linear => &["intercept", "slope"],
        }
    }

    pub fn transform_for(self, param: &str) -> Transform {
        match param {
            "b" => Transform::Logistic,
            "slope" | "intercept" => Transform::Identity,
            _ => Transform::Log,
        }
    }

    /// Evaluate at abscissa `t` with parameters in canonical order.
    pub fn eval(self, p: &[f64], t: f64) -> f64 {
        match self {
            ModelKind::HoleDecay => {
                let (a, b, t1e, t1b) = (p[0], p[1], p[2], p[3]);
                a * ((1.0 - b) * (-t / t1e).exp() + b * (-t / t1b).exp())
            }
            ModelKind::Mims => {
                let (i0, t2, x) = (p[0], p[1], p[2]);
                i0 * (-(4.0 * t / t2).powf(x)).exp()
            }
            ModelKind::ThreePulseEcho => {
                let (i0, g0, gsd, rate, b, t1e, t1b, delay) =
                    (p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7]);
                let f = (1.0 - b) * (-2.0 * t / t1e).exp() + b * (-2.0 * t / t1b).exp();
                let gamma = g0 + 0.5 * gsd * (rate * delay + (1.0 - (-rate * t).exp()));
                i0 * f * (-FOUR_PI * delay * gamma).exp()
            }
            ModelKind::TwoPulseDiffusion => {
                let (i0, g0, gsd, rate) = (p[0], p[1], p[2], p[3]);
                i0 * (-FOUR_PI * t * (g0 + 0.5 * gsd * rate * t)).exp()
            }
            ModelKind::Stark => p[0] * t,
            ModelKind::Linear => p[0] + p[1] * t,
        }
    }
}
