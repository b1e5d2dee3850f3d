//! Synthetic-experiment generation and Monte-Carlo round-trip validation.

mod montecarlo;
mod noise;
mod schedule;

pub use montecarlo::{
    monte_carlo_roundtrip, Experiment, ExperimentKind, ParamRecovery, ParamTolerance,
    RecoveryReport, ToleranceKind,
};
pub use noise::NoiseModel;
pub use schedule::{ExperimentSchedule, ScheduleKind};

use crate::error::{Error, Result};
use crate::fit::ModelKind;
use crate::params::{
    CoherenceParams, DecayModelParams, DiffusionParams, StarkParams,
};
use crate::series::{SamplePoint, TimeSeries, ValueUnit};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

pub use crate::fit::DELAY_META_KEY;

fn value_unit_for(model: ModelKind) -> ValueUnit {
    match model {
        ModelKind::HoleDecay => ValueUnit::OpticalDepthFraction,
        ModelKind::Mims | ModelKind::ThreePulseEcho | ModelKind::TwoPulseDiffusion => {
            ValueUnit::Intensity
        }
        ModelKind::Stark | ModelKind::Linear => ValueUnit::Hertz,
    }
}

fn compatible(model: ModelKind, kind: ScheduleKind) -> bool {
    matches!(
        (model, kind),
        (ModelKind::HoleDecay, ScheduleKind::ShbDecay)
            | (ModelKind::HoleDecay, ScheduleKind::ShbDecayBField)
            | (ModelKind::Mims, ScheduleKind::TwoPulseEcho)
            | (ModelKind::TwoPulseDiffusion, ScheduleKind::TwoPulseEcho)
            | (ModelKind::ThreePulseEcho, ScheduleKind::ThreePulseEcho)
            | (ModelKind::Stark, ScheduleKind::StarkSweep)
            | (ModelKind::Linear, ScheduleKind::PowerSweep)
            | (ModelKind::Linear, ScheduleKind::StarkSweep)
    )
}

/// Assemble a full canonical parameter vector for `model` from named values
/// and validate it through the corresponding domain types.
pub(crate) fn assemble_params(model: ModelKind, params: &[(String, f64)]) -> Result<Vec<f64>> {
    let names = model.param_names();
    let mut full = vec![f64::NAN; names.len()];
    for (name, value) in params {
        let idx = names.iter().position(|n| n == name).ok_or_else(|| {
            Error::InvalidParameter(format!("model {} has no parameter `{name}`", model.name()))
        })?;
        if !full[idx].is_nan() {
            return Err(Error::InvalidParameter(format!("parameter `{name}` given twice")));
        }
        full[idx] = *value;
    }
    if let Some(idx) = full.iter().position(|v| v.is_nan()) {
        return Err(Error::InvalidParameter(format!(
            "missing parameter `{}` for model {}",
            names[idx],
            model.name()
        )));
    }
    validate_model_params(model, &full)?;
    Ok(full)
}

fn validate_model_params(model: ModelKind, p: &[f64]) -> Result<()> {
    match model {
        ModelKind::HoleDecay => {
            if p[0] <= 0.0 || p[0].is_nan() {
                return Err(Error::invalid_param(format!("amplitude must be > 0, got {}", p[0])));
            }
            DecayModelParams::new(p[1], p[2], p[3])?;
        }
        ModelKind::Mims => {
            CoherenceParams::new(p[0], p[1], p[2])?;
        }
        ModelKind::ThreePulseEcho => {
            if p[0] <= 0.0 || p[0].is_nan() {
                return Err(Error::invalid_param(format!("i0 must be > 0, got {}", p[0])));
            }
            DiffusionParams::new(p[1], p[2], p[3])?;
            DecayModelParams::new(p[4], p[5], p[6])?;
            if p[7] <= 0.0 || p[7].is_nan() {
                return Err(Error::invalid_param(format!("delay must be > 0 s, got {}", p[7])));
            }
        }
        ModelKind::TwoPulseDiffusion => {
            if p[0] <= 0.0 || p[0].is_nan() {
                return Err(Error::invalid_param(format!("i0 must be > 0, got {}", p[0])));
            }
            DiffusionParams::new(p[1], p[2], p[3])?;
        }
        ModelKind::Stark => {
            StarkParams::new(p[0])?;
        }
        ModelKind::Linear => {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::invalid_param("intercept and slope must be finite"));
            }
        }
    }
    Ok(())
}

fn noisy_series(
    model: ModelKind,
    full: &[f64],
    grid: &[f64],
    noise: &NoiseModel,
    rng: &mut ChaCha12Rng,
) -> Result<TimeSeries> {
    let noiseless = noise.is_none();
    let points: Vec<SamplePoint> = grid
        .iter()
        .map(|&t| {
            let clean = model.eval(full, t);
            let z1: f64 = StandardNormal.sample(rng);
            let z2: f64 = StandardNormal.sample(rng);
            let y = clean * (1.0 + noise.relative_sigma * z1) + noise.additive_floor * z2;
            // a zero-valued point under purely multiplicative noise receives
            // no deviation at all, so there is no sigma to record for it
            let sigma = noise.sigma_for(clean);
            SamplePoint {
                t,
                y,
                sigma: if noiseless || sigma == 0.0 { None } else { Some(sigma) },
            }
        })
        .collect();
    TimeSeries::new(points, value_unit_for(model))
}

/// Evaluate `model` on the schedule and apply the noise model:
/// `y = clean·(1 + relative·N(0,1)) + floor·N(0,1)`, recording the applied
/// per-point sigma. Identical inputs (seed included) give identical output.
pub fn synthesize(
    model: ModelKind,
    params: &[(String, f64)],
    schedule: &ExperimentSchedule,
    noise: &NoiseModel,
) -> Result<TimeSeries> {
    if !compatible(model, schedule.kind) {
        return Err(Error::Incompatible(format!(
            "model {} cannot run on a {} schedule",
            model.name(),
            schedule.kind.name()
        )));
    }
    let full = assemble_params(model, params)?;
    let mut rng = ChaCha12Rng::seed_from_u64(noise.seed);
    let mut series = noisy_series(model, &full, &schedule.values, noise, &mut rng)?;
    series.set_meta("model", model.name());
    series.set_meta("schedule", schedule.kind.name());
    if model == ModelKind::ThreePulseEcho {
        let delay = full[7];
        series.set_meta(DELAY_META_KEY, format!("{delay:e}"));
    }
    Ok(series)
}

/// Synthesize one stimulated-echo scan per schedule delay, drawing all sets
/// from a single seeded stream in delay order. `params` supplies everything
/// except `delay`.
pub fn synthesize_3ppe(
    params: &[(String, f64)],
    schedule: &ExperimentSchedule,
    noise: &NoiseModel,
) -> Result<Vec<TimeSeries>> {
    if schedule.kind != ScheduleKind::ThreePulseEcho {
        return Err(Error::Incompatible(
            "synthesize_3ppe needs a three-pulse schedule".to_string(),
        ));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(noise.seed);
    let mut out = Vec::with_capacity(schedule.delays.len());
    for &delay in &schedule.delays {
        let mut with_delay = params.to_vec();
        with_delay.push(("delay".to_string(), delay));
        let full = assemble_params(ModelKind::ThreePulseEcho, &with_delay)?;
        let mut series =
            noisy_series(ModelKind::ThreePulseEcho, &full, &schedule.values, noise, &mut rng)?;
        series.set_meta("model", ModelKind::ThreePulseEcho.name());
        series.set_meta("schedule", schedule.kind.name());
        series.set_meta(DELAY_META_KEY, format!("{delay:e}"));
        out.push(series);
    }
    Ok(out)
}
