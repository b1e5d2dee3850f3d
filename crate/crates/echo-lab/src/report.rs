//! Derived-quantity reporting from fitted parameter sets.

use crate::error::Result;
use crate::models;
use crate::params::{DecayModelParams, DiffusionParams, StarkParams};

/// The derived quantities a parameter set implies. Entries are `None` when
/// their inputs were not supplied.
#[derive(Debug, Clone, Default)]
pub struct DerivedReport {
    pub natural_linewidth_hz: Option<f64>,
    pub branching_beta: Option<f64>,
    pub saturation_linewidth_hz: Option<f64>,
    pub hole_linewidth_prediction_hz: Option<f64>,
    pub afc_storage_time_s: Option<f64>,
    pub stark_shift_hz: Option<f64>,
    pub diffusion_coefficient_um2_per_h: Option<f64>,
}

/// Inputs for [`derive_report`]; every field optional.
#[derive(Debug, Clone, Default)]
pub struct ReportInputs {
    pub decay: Option<DecayModelParams>,
    pub diffusion: Option<DiffusionParams>,
    pub stark: Option<StarkParams>,
    pub stark_field_v_per_cm: Option<f64>,
    pub afc_spacing_hz: Option<f64>,
    /// (1/e depth in µm, diffusion time in hours)
    pub dopant: Option<(f64, f64)>,
}

pub fn derive_report(inputs: &ReportInputs) -> Result<DerivedReport> {
    let mut out = DerivedReport::default();
    if let Some(decay) = &inputs.decay {
        out.natural_linewidth_hz = Some(models::natural_linewidth(decay.t1e())?);
        // conversion is singular for T1b <= T1e; report nothing in that case
        out.branching_beta = models::branching_beta(decay).ok();
    }
    if let Some(d) = &inputs.diffusion {
        out.saturation_linewidth_hz = Some(models::linewidth_saturation_limit(d));
        out.hole_linewidth_prediction_hz = Some(models::shb_linewidth_prediction(d));
    }
    if let Some(spacing) = inputs.afc_spacing_hz {
        out.afc_storage_time_s = Some(models::afc_storage_time(spacing)?);
    }
    if let (Some(s), Some(field)) = (&inputs.stark, inputs.stark_field_v_per_cm) {
        out.stark_shift_hz = Some(models::stark_shift(field, s)?);
    }
    if let Some((d1e, t)) = inputs.dopant {
        out.diffusion_coefficient_um2_per_h = Some(models::diffusion_coefficient(d1e, t)?);
    }
    Ok(out)
}
