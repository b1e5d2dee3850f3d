//! Forward models: pure evaluations of every decay, linewidth, shift and
//! profile relation the toolkit fits or reports.
//!
//! All functions take and return base units (seconds, hertz, V/cm, cm⁻¹;
//! micrometers and hours for the dopant-profile pair) and are safe to call
//! concurrently. Exponentials of large negative arguments underflow to zero
//! rather than erroring, so every model is usable far beyond its largest
//! time constant.

use crate::constants::CONSTANTS;
use crate::error::{Error, Result};
use crate::params::{
    CoherenceParams, DecayModelParams, DiffusionParams, DopingProfileParams, LevelScheme,
    StarkParams,
};

fn reject_negative(name: &str, v: f64) -> Result<()> {
    if v < 0.0 || !v.is_finite() {
        return Err(Error::invalid_arg(format!("{name} must be >= 0, got {v}")));
    }
    Ok(())
}

/// Normalized spectral-hole depth a time `t` after the burn pulse:
/// `(1-B)·exp(-t/T1e) + B·exp(-t/T1b)`. Equals 1 at `t = 0`.
pub fn hole_decay_fraction(t: f64, p: &DecayModelParams) -> Result<f64> {
    reject_negative("t", t)?;
    Ok((1.0 - p.b()) * (-t / p.t1e()).exp() + p.b() * (-t / p.t1b()).exp())
}

/// Physical branching ratio β from the fitted amplitude B via
/// `β = 2·B·(T1b - T1e)/T1b`. Singular for T1b ≤ T1e.
pub fn branching_beta(p: &DecayModelParams) -> Result<f64> {
    if p.t1b() <= p.t1e() {
        return Err(Error::invalid_arg(format!(
            "branching conversion needs T1b > T1e (got T1e = {} s, T1b = {} s)",
            p.t1e(),
            p.t1b()
        )));
    }
    Ok(2.0 * p.b() * (p.t1b() - p.t1e()) / p.t1b())
}

/// Lifetime-limited homogeneous linewidth `1/(2π·T1e)` in hertz.
pub fn natural_linewidth(t1e: f64) -> Result<f64> {
    if t1e <= 0.0 || !t1e.is_finite() {
        return Err(Error::invalid_arg(format!("T1e must be > 0 s, got {t1e}")));
    }
    Ok(1.0 / (CONSTANTS.two_pi * t1e))
}

/// Two-pulse echo peak intensity at pulse delay `t`:
/// `I0·exp(-(4t/T2)^x)`, the Mims stretched-exponential form.
///
/// The exponent applies to the ratio, not the whole exponential; the
/// alternative reading collapses to `exp(-4xt/T2)` and makes `x`
/// indistinguishable from a rescaled `T2`.
pub fn mims_echo_intensity(t: f64, c: &CoherenceParams) -> Result<f64> {
    reject_negative("t", t)?;
    Ok(c.i0() * (-(4.0 * t / c.t2()).powf(c.x())).exp())
}

/// Population surviving a waiting time `tw` in a stimulated-echo sequence:
/// `(1-B)·exp(-2·tw/T1e) + B·exp(-2·tw/T1b)`. Equals 1 at `tw = 0`.
pub fn population_factor(tw: f64, p: &DecayModelParams) -> Result<f64> {
    reject_negative("tw", tw)?;
    Ok((1.0 - p.b()) * (-2.0 * tw / p.t1e()).exp() + p.b() * (-2.0 * tw / p.t1b()).exp())
}

/// Effective homogeneous linewidth after dephasing over delay `td` and
/// diffusion over waiting time `tw`:
/// `Γ0 + ½·Γsd·[R·td + (1 - exp(-R·tw))]`. Nondecreasing in both arguments.
pub fn effective_linewidth(td: f64, tw: f64, d: &DiffusionParams) -> Result<f64> {
    reject_negative("td", td)?;
    reject_negative("tw", tw)?;
    Ok(d.gamma0()
        + 0.5 * d.gamma_sd() * (d.rate() * td + (1.0 - (-d.rate() * tw).exp())))
}

/// Stimulated (three-pulse) echo peak intensity:
/// `I0 · F(tw) · exp(-4π·td·Γeff(td, tw))`, composing
/// [`population_factor`] and [`effective_linewidth`] exactly.
pub fn stimulated_echo_intensity(
    td: f64,
    tw: f64,
    i0: f64,
    d: &DiffusionParams,
    p: &DecayModelParams,
) -> Result<f64> {
    let f = population_factor(tw, p)?;
    let gamma = effective_linewidth(td, tw, d)?;
    Ok(i0 * f * (-2.0 * CONSTANTS.two_pi * td * gamma).exp())
}

/// Waiting-time-only effective linewidth `Γ0 + ½·Γsd·(1 - exp(-R·tw))`;
/// identical to [`effective_linewidth`] at `td = 0`.
pub fn linewidth_saturation(tw: f64, d: &DiffusionParams) -> Result<f64> {
    reject_negative("tw", tw)?;
    Ok(d.gamma0() + 0.5 * d.gamma_sd() * (1.0 - (-d.rate() * tw).exp()))
}

/// Closed-form long-waiting-time limit `Γ0 + Γsd/2` of
/// [`linewidth_saturation`].
pub fn linewidth_saturation_limit(d: &DiffusionParams) -> f64 {
    d.gamma0() + 0.5 * d.gamma_sd()
}

/// Hole width the saturated diffusion model implies for a hole-burning
/// measurement: `Γ0 + Γsd`.
pub fn shb_linewidth_prediction(d: &DiffusionParams) -> f64 {
    d.gamma0() + d.gamma_sd()
}

/// Linear (DC Stark) resonance shift `slope · field` in hertz; odd in the field.
pub fn stark_shift(field: f64, s: &StarkParams) -> Result<f64> {
    if !field.is_finite() {
        return Err(Error::invalid_arg(format!("field must be finite, got {field}")));
    }
    Ok(s.slope() * field)
}

/// Diffusion coefficient `d1e²/(4t)` in µm²/hour from a 1/e penetration
/// depth (µm) and diffusion time (hours).
pub fn diffusion_coefficient(d1e: f64, t: f64) -> Result<f64> {
    if d1e <= 0.0 || !d1e.is_finite() {
        return Err(Error::invalid_arg(format!("d1e must be > 0 um, got {d1e}")));
    }
    if t <= 0.0 || !t.is_finite() {
        return Err(Error::invalid_arg(format!("t must be > 0 h, got {t}")));
    }
    Ok(d1e * d1e / (4.0 * t))
}

/// In-diffused dopant concentration at depth `z` (µm):
/// `peak·exp(-(z/d1e)²)` in ions per cm³.
pub fn gaussian_profile(z: f64, p: &DopingProfileParams) -> Result<f64> {
    reject_negative("z", z)?;
    let r = z / p.d1e();
    Ok(p.peak_concentration() * (-r * r).exp())
}

/// Thermal occupation of a level scheme at temperature `t` kelvin.
#[derive(Debug, Clone, PartialEq)]
pub struct Occupation {
    /// Fraction per level, in the scheme's level order; sums to 1.
    pub fractions: Vec<f64>,
    /// Total fraction outside the zero-energy ground level(s).
    pub excited_fraction: f64,
}

/// Boltzmann occupation fractions `g_i·exp(-E_i/(k_B·T)) / Z` with k_B in
/// cm⁻¹/K, plus the fraction occupying excited (nonzero-energy) levels.
pub fn boltzmann_occupation(scheme: &LevelScheme, t: f64) -> Result<Occupation> {
    if t <= 0.0 || !t.is_finite() {
        return Err(Error::invalid_arg(format!("temperature must be > 0 K, got {t}")));
    }
    let kt = CONSTANTS.boltzmann_wavenumber * t;
    let weights: Vec<f64> = scheme
        .levels()
        .iter()
        .map(|&(e, g)| g as f64 * (-e / kt).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let fractions: Vec<f64> = weights.iter().map(|w| w / z).collect();
    // summing the excited weights directly keeps tiny occupations exact,
    // where 1 - f_ground would round to zero below machine epsilon
    let excited: f64 = scheme
        .levels()
        .iter()
        .zip(&fractions)
        .filter(|((e, _), _)| *e > 0.0)
        .map(|(_, f)| f)
        .sum();
    Ok(Occupation {
        fractions,
        excited_fraction: excited,
    })
}

/// Storage time supported by a comb with the given tooth spacing: `1/Δ` seconds.
pub fn afc_storage_time(teeth_spacing: f64) -> Result<f64> {
    if teeth_spacing <= 0.0 || !teeth_spacing.is_finite() {
        return Err(Error::invalid_arg(format!(
            "teeth spacing must be > 0 Hz, got {teeth_spacing}"
        )));
    }
    Ok(1.0 / teeth_spacing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    // Reference values below were computed with 50-digit arithmetic and are
    // frozen; tolerances are pure float-rounding allowances.

    fn decay_ref() -> DecayModelParams {
        DecayModelParams::new(0.436, 82e-6, 2.364e-3).unwrap()
    }

    fn diffusion_ref() -> DiffusionParams {
        DiffusionParams::new(152e3, 930e3, 227e3).unwrap()
    }

    fn joint_decay_ref() -> DecayModelParams {
        DecayModelParams::new(0.23, 83e-6, 2.4e-3).unwrap()
    }

    #[test]
    fn hole_decay_at_zero_is_one() {
        assert_eq!(hole_decay_fraction(0.0, &decay_ref()).unwrap(), 1.0);
    }

    #[test]
    fn hole_decay_reference_point() {
        let v = hole_decay_fraction(82e-6, &decay_ref()).unwrap();
        assert_relative_eq!(v, 0.6286197732876469, max_relative = 1e-12);
    }

    #[test]
    fn hole_decay_tail_bound() {
        let p = decay_ref();
        let v = hole_decay_fraction(10.0 * p.t1b(), &p).unwrap();
        assert!(v < 1e-4, "tail {v}");
    }

    #[test]
    fn hole_decay_rejects_negative_time() {
        assert!(hole_decay_fraction(-1e-9, &decay_ref()).is_err());
    }

    #[test]
    fn branching_beta_reference() {
        let beta = branching_beta(&decay_ref()).unwrap();
        assert_relative_eq!(beta, 0.8417529610829103, max_relative = 1e-12);
    }

    #[test]
    fn branching_beta_limits() {
        // T1e << T1b reduces to beta = 2B
        let p = DecayModelParams::new(0.5, 1e-12 * 2.364e-3, 2.364e-3).unwrap();
        assert_relative_eq!(branching_beta(&p).unwrap(), 1.0, max_relative = 1e-9);
        let p0 = DecayModelParams::new(0.0, 82e-6, 2.364e-3).unwrap();
        assert_eq!(branching_beta(&p0).unwrap(), 0.0);
    }

    #[test]
    fn branching_beta_singular_rejected() {
        let p = DecayModelParams::new(0.5, 1e-3, 1e-3).unwrap();
        assert!(branching_beta(&p).is_err());
        let p = DecayModelParams::new(0.5, 2e-3, 1e-3).unwrap();
        assert!(branching_beta(&p).is_err());
    }

    #[test]
    fn natural_linewidth_reference() {
        assert_relative_eq!(
            natural_linewidth(82e-6).unwrap(),
            1940.9139401450651,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            natural_linewidth(1.0 / CONSTANTS.two_pi).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            natural_linewidth(8.2e-6).unwrap(),
            19409.139401450651,
            max_relative = 1e-12
        );
        assert!(natural_linewidth(0.0).is_err());
    }

    #[test]
    fn mims_reference_points() {
        let c = CoherenceParams::new(1.0, 1.58e-6, 1.072).unwrap();
        assert_eq!(mims_echo_intensity(0.0, &c).unwrap(), 1.0);
        let v = mims_echo_intensity(0.4e-6, &c).unwrap();
        assert_relative_eq!(v, 0.36291893841306677, max_relative = 1e-12);
        // at t = T2/4 the ratio is 1 regardless of x
        for x in [0.5, 1.0, 1.072, 2.0] {
            let c = CoherenceParams::new(2.0, 1.58e-6, x).unwrap();
            let v = mims_echo_intensity(1.58e-6 / 4.0, &c).unwrap();
            assert_relative_eq!(v, 2.0 * (-1.0f64).exp(), max_relative = 1e-12);
        }
        assert!(mims_echo_intensity(-1.0, &c).is_err());
    }

    #[test]
    fn population_factor_reference() {
        let p = joint_decay_ref();
        assert_eq!(population_factor(0.0, &p).unwrap(), 1.0);
        let v = population_factor(41e-6, &p).unwrap();
        assert_relative_eq!(v, 0.5089750666141623, max_relative = 1e-12);
        // B = 1 reduces to the single bottleneck exponential
        let p1 = DecayModelParams::new(1.0, 83e-6, 2.4e-3).unwrap();
        let tw = 3e-4;
        assert_relative_eq!(
            population_factor(tw, &p1).unwrap(),
            (-2.0 * tw / 2.4e-3).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn effective_linewidth_reference() {
        let d = diffusion_ref();
        assert_eq!(effective_linewidth(0.0, 0.0, &d).unwrap(), 152e3);
        let v = effective_linewidth(200e-9, 50e-6, &d).unwrap();
        assert_relative_eq!(v, 638105.5271873244, max_relative = 1e-12);
        assert!(effective_linewidth(-1.0, 0.0, &d).is_err());
        assert!(effective_linewidth(0.0, -1.0, &d).is_err());
    }

    #[test]
    fn stimulated_echo_reference() {
        let d = diffusion_ref();
        let p = joint_decay_ref();
        assert_eq!(
            stimulated_echo_intensity(0.0, 0.0, 1.0, &d, &p).unwrap(),
            1.0
        );
        let v = stimulated_echo_intensity(200e-9, 50e-6, 1.0, &d, &p).unwrap();
        assert_relative_eq!(v, 0.09080005597779122, max_relative = 1e-12);
        // tw = 0: only the delay terms survive
        let td = 3.3e-7;
        let bare = (-2.0 * CONSTANTS.two_pi * td * (d.gamma0() + 0.5 * d.gamma_sd() * d.rate() * td)).exp();
        assert_relative_eq!(
            stimulated_echo_intensity(td, 0.0, 1.0, &d, &p).unwrap(),
            bare,
            max_relative = 1e-12
        );
    }

    #[test]
    fn saturation_reference() {
        let d = diffusion_ref();
        assert_eq!(linewidth_saturation(0.0, &d).unwrap(), 152e3);
        let v = linewidth_saturation(50e-6, &d).unwrap();
        assert_relative_eq!(v, 616994.5271873244, max_relative = 1e-12);
        assert_eq!(linewidth_saturation_limit(&d), 617e3);
        assert_eq!(shb_linewidth_prediction(&d), 1082e3);
    }

    #[test]
    fn saturation_degenerate_cases() {
        let d = DiffusionParams::new(152e3, 0.0, 227e3).unwrap();
        assert_eq!(shb_linewidth_prediction(&d), 152e3);
        let d = DiffusionParams::new(0.0, 1e6, 227e3).unwrap();
        assert_eq!(shb_linewidth_prediction(&d), 1e6);
    }

    #[test]
    fn stark_reference() {
        let s = StarkParams::new(24.6e3).unwrap();
        assert_eq!(stark_shift(0.0, &s).unwrap(), 0.0);
        assert_relative_eq!(stark_shift(1000.0, &s).unwrap(), 24.6e6, max_relative = 1e-12);
        assert_relative_eq!(
            stark_shift(-1000.0, &s).unwrap(),
            -24.6e6,
            max_relative = 1e-12
        );
        assert!(stark_shift(f64::NAN, &s).is_err());
    }

    #[test]
    fn diffusion_coefficient_reference() {
        let v = diffusion_coefficient(6.5, 150.0).unwrap();
        assert_relative_eq!(v, 0.07041666666666667, max_relative = 1e-12);
        assert_relative_eq!(diffusion_coefficient(2.0, 1.0).unwrap(), 1.0);
        // quadratic in depth, inverse in time
        assert_relative_eq!(
            diffusion_coefficient(13.0, 150.0).unwrap(),
            4.0 * v,
            max_relative = 1e-12
        );
        assert!(diffusion_coefficient(0.0, 1.0).is_err());
        assert!(diffusion_coefficient(1.0, 0.0).is_err());
    }

    #[test]
    fn gaussian_profile_reference() {
        let p = DopingProfileParams::new(1.35e20, 6.5, 150.0).unwrap();
        assert_eq!(gaussian_profile(0.0, &p).unwrap(), 1.35e20);
        assert_relative_eq!(
            gaussian_profile(6.5, &p).unwrap(),
            4.966372455814471e19,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            gaussian_profile(3.0 * 6.5, &p).unwrap(),
            1.35e20 * (-9.0f64).exp(),
            max_relative = 1e-12
        );
        assert!(gaussian_profile(-0.1, &p).is_err());
    }

    #[test]
    fn boltzmann_reference() {
        let single = LevelScheme::new(vec![(0.0, 1)]).unwrap();
        let occ = boltzmann_occupation(&single, 3.0).unwrap();
        assert_eq!(occ.fractions, vec![1.0]);
        assert_eq!(occ.excited_fraction, 0.0);

        let upper = LevelScheme::new(vec![(0.0, 1), (14.7, 1)]).unwrap();
        let occ = boltzmann_occupation(&upper, 3.0).unwrap();
        assert_relative_eq!(
            occ.excited_fraction,
            8.666531620912906e-4,
            max_relative = 1e-10
        );

        let lower = LevelScheme::new(vec![(0.0, 1), (7.6, 1)]).unwrap();
        let occ = boltzmann_occupation(&lower, 3.0).unwrap();
        assert_relative_eq!(
            occ.excited_fraction,
            2.545892306519014e-2,
            max_relative = 1e-10
        );

        let sum: f64 = occ.fractions.iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        assert!(boltzmann_occupation(&lower, 0.0).is_err());
    }

    #[test]
    fn afc_reference() {
        assert_relative_eq!(
            afc_storage_time(3e6).unwrap(),
            3.3333333333333333e-7,
            max_relative = 1e-12
        );
        assert_eq!(afc_storage_time(1.0).unwrap(), 1.0);
        assert_relative_eq!(afc_storage_time(1e9).unwrap(), 1e-9, max_relative = 1e-12);
        assert!(afc_storage_time(0.0).is_err());
    }

    #[test]
    fn no_overflow_far_beyond_time_constants() {
        let p = decay_ref();
        let v = hole_decay_fraction(1e4 * p.t1b(), &p).unwrap();
        assert_eq!(v, 0.0);
        let d = diffusion_ref();
        let g = linewidth_saturation(1e4 / d.rate() * 1e4, &d).unwrap();
        assert!(g.is_finite());
    }
}
