//! Weighted nonlinear least squares: generic curve fitting over the model
//! registry plus the specific decay/echo fitting procedures.

mod engine;
mod jacobian;
mod procedures;
mod registry;

pub use jacobian::jacobian;
pub use procedures::{
    extrapolate_zero_power, fit_3ppe_joint, fit_hole_decay, fit_mims, FitOptions, JointAmplitude,
    Normalization, DELAY_META_KEY,
};
pub use registry::{ModelKind, Transform};

pub(crate) use engine::{solve, LsqProblem, DEFAULT_MAX_ITERATIONS};

use crate::error::{Error, Result};
use crate::series::{FitResult, TimeSeries};
use nalgebra::DVector;

/// How residuals are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Per-point sigma when every point carries one, else uniform.
    #[default]
    Auto,
    Uniform,
    /// Requires a sigma on every point.
    PerPointSigma,
}

/// A single-series fitting problem over a registered model.
#[derive(Debug, Clone)]
pub struct FitProblem {
    pub model: ModelKind,
    pub data: Vec<TimeSeries>,
    /// Name → initial guess for every parameter left free.
    pub free: Vec<(String, f64)>,
    /// Name → value for every parameter held constant.
    pub fixed: Vec<(String, f64)>,
    /// Optional (name, lower, upper) clamps on free parameters.
    pub bounds: Vec<(String, f64, f64)>,
    pub weighting: Weighting,
    pub max_iterations: usize,
}

impl FitProblem {
    pub fn new(model: ModelKind, data: TimeSeries) -> Self {
        FitProblem {
            model,
            data: vec![data],
            free: Vec::new(),
            fixed: Vec::new(),
            bounds: Vec::new(),
            weighting: Weighting::Auto,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }

    pub fn free(mut self, name: &str, init: f64) -> Self {
        self.free.push((name.to_string(), init));
        self
    }

    pub fn fixed(mut self, name: &str, value: f64) -> Self {
        self.fixed.push((name.to_string(), value));
        self
    }

    pub fn bound(mut self, name: &str, lower: f64, upper: f64) -> Self {
        self.bounds.push((name.to_string(), lower, upper));
        self
    }
}

pub(crate) fn resolve_weights(series: &TimeSeries, weighting: Weighting) -> Result<Vec<f64>> {
    let sigmas = series.sigmas();
    match weighting {
        Weighting::Uniform => Ok(vec![1.0; series.len()]),
        Weighting::PerPointSigma => match sigmas {
            Some(s) => Ok(s.iter().map(|s| 1.0 / s).collect()),
            None => Err(Error::FitSetup(
                "per-point-sigma weighting needs a sigma on every point".to_string(),
            )),
        },
        Weighting::Auto => Ok(match sigmas {
            Some(s) => s.iter().map(|s| 1.0 / s).collect(),
            None => vec![1.0; series.len()],
        }),
    }
}

/// Fit a registered model to one series and return estimates, 1σ
/// uncertainties and the scaled covariance. Deterministic: identical
/// problems give bit-identical results.
pub fn fit_curve(problem: &FitProblem) -> Result<FitResult> {
    if problem.data.len() != 1 {
        return Err(Error::FitSetup(
            "fit_curve takes exactly one series; use fit_3ppe_joint for joint fits".to_string(),
        ));
    }
    let series = &problem.data[0];
    let names = problem.model.param_names();

    // each model parameter exactly once in free or fixed
    let mut slot: Vec<Option<(bool, f64)>> = vec![None; names.len()]; // (is_free, value)
    for (set, is_free) in [(&problem.free, true), (&problem.fixed, false)] {
        for (name, value) in set.iter() {
            let idx = names.iter().position(|n| n == name).ok_or_else(|| {
                Error::FitSetup(format!(
                    "model {} has no parameter `{name}`",
                    problem.model.name()
                ))
            })?;
            if slot[idx].is_some() {
                return Err(Error::FitSetup(format!("parameter `{name}` given twice")));
            }
            slot[idx] = Some((is_free, *value));
        }
    }
    if let Some(idx) = slot.iter().position(Option::is_none) {
        return Err(Error::FitSetup(format!(
            "parameter `{}` is neither free nor fixed",
            names[idx]
        )));
    }

    let free_idx: Vec<usize> = (0..names.len())
        .filter(|&i| slot[i].map(|(f, _)| f) == Some(true))
        .collect();
    let n_free = free_idx.len();
    if n_free == 0 {
        return Err(Error::FitSetup("no free parameters".to_string()));
    }
    let min_points = n_free.max(2) + 1;
    if series.len() < min_points.max(3) {
        return Err(Error::FitSetup(format!(
            "need at least {} data points for {} free parameters, got {}",
            min_points.max(3),
            n_free,
            series.len()
        )));
    }

    let mut initial = Vec::with_capacity(n_free);
    let mut transforms = Vec::with_capacity(n_free);
    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); n_free];
    for &i in free_idx.iter() {
        let init = slot[i].unwrap().1;
        let tr = problem.model.transform_for(names[i]);
        match tr {
            Transform::Log if init <= 0.0 => {
                return Err(Error::FitSetup(format!(
                    "initial guess for `{}` must be positive, got {init}",
                    names[i]
                )))
            }
            Transform::Logistic if !(init > 0.0 && init < 1.0) => {
                return Err(Error::FitSetup(format!(
                    "initial guess for `{}` must lie inside (0, 1), got {init}",
                    names[i]
                )))
            }
            _ => {}
        }
        initial.push(init);
        transforms.push(tr);
    }
    for (name, lo, hi) in &problem.bounds {
        let pos = free_idx
            .iter()
            .position(|&i| names[i] == name)
            .ok_or_else(|| Error::FitSetup(format!("bound on non-free parameter `{name}`")))?;
        if lo >= hi {
            return Err(Error::FitSetup(format!(
                "bound on `{name}` needs lower < upper"
            )));
        }
        if initial[pos] < *lo || initial[pos] > *hi {
            return Err(Error::FitSetup(format!(
                "initial guess for `{name}` lies outside its bounds"
            )));
        }
        bounds[pos] = (*lo, *hi);
    }

    let weights = resolve_weights(series, problem.weighting)?;
    let times = series.times();
    let values = series.values();
    let full_template: Vec<f64> = slot.iter().map(|s| s.unwrap().1).collect();
    let model = problem.model;
    let free_idx_c = free_idx.clone();

    let residuals = move |p: &[f64]| {
        let mut full = full_template.clone();
        for (k, &i) in free_idx_c.iter().enumerate() {
            full[i] = p[k];
        }
        DVector::from_iterator(
            times.len(),
            times
                .iter()
                .zip(&values)
                .zip(&weights)
                .map(|((&t, &y), &w)| w * (y - model.eval(&full, t))),
        )
    };

    let solution = solve(&LsqProblem {
        residuals: &residuals,
        initial,
        transforms,
        bounds,
        max_iterations: problem.max_iterations,
    });

    let free_names: Vec<String> = free_idx.iter().map(|&i| names[i].to_string()).collect();
    let mut result = FitResult::new(
        free_names,
        solution.params,
        solution.covariance,
        solution.cost.sqrt(),
        solution.iterations,
        solution.converged,
    );
    for (i, s) in slot.iter().enumerate() {
        if let Some((false, v)) = s {
            result.push_fixed(names[i], *v);
        }
    }
    for note in solution.notes {
        result.push_note(note);
    }
    Ok(result)
}
