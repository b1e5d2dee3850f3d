//! Sample series and fit-result carriers.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// What the dependent value of a [`TimeSeries`] means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueUnit {
    Intensity,
    OpticalDepthFraction,
    Hertz,
}

impl ValueUnit {
    pub fn tag(self) -> &'static str {
        match self {
            ValueUnit::Intensity => "intensity",
            ValueUnit::OpticalDepthFraction => "optical-depth-fraction",
            ValueUnit::Hertz => "hertz",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "intensity" => Ok(ValueUnit::Intensity),
            "optical-depth-fraction" => Ok(ValueUnit::OpticalDepthFraction),
            "hertz" => Ok(ValueUnit::Hertz),
            other => Err(Error::Config(format!("unknown y_unit tag `{other}`"))),
        }
    }
}

/// One sample: abscissa in base units (seconds for time series; watts or
/// V/cm for sweeps), value, and optional 1σ uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub t: f64,
    pub y: f64,
    pub sigma: Option<f64>,
}

/// Ordered samples with a value-unit tag and free-form annotations
/// (delay setting, burn power, sweep kind, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    points: Vec<SamplePoint>,
    y_unit: ValueUnit,
    meta: Vec<(String, String)>,
}

impl TimeSeries {
    /// Requires strictly increasing abscissas and positive sigmas where present.
    pub fn new(points: Vec<SamplePoint>, y_unit: ValueUnit) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid_param("time series must be nonempty"));
        }
        for w in points.windows(2) {
            // also rejects NaN times, which compare false
            if w[1].t.partial_cmp(&w[0].t) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::invalid_param(format!(
                    "times must be strictly increasing ({} then {})",
                    w[0].t, w[1].t
                )));
            }
        }
        for p in &points {
            if !p.t.is_finite() || !p.y.is_finite() {
                return Err(Error::invalid_param("non-finite sample"));
            }
            if let Some(s) = p.sigma {
                if s <= 0.0 || !s.is_finite() {
                    return Err(Error::invalid_param(format!(
                        "sigma must be positive when present, got {s}"
                    )));
                }
            }
        }
        Ok(TimeSeries {
            points,
            y_unit,
            meta: Vec::new(),
        })
    }

    pub fn from_columns(
        t: &[f64],
        y: &[f64],
        sigma: Option<&[f64]>,
        y_unit: ValueUnit,
    ) -> Result<Self> {
        if t.len() != y.len() || sigma.is_some_and(|s| s.len() != t.len()) {
            return Err(Error::invalid_param("column lengths differ"));
        }
        let points = t
            .iter()
            .zip(y)
            .enumerate()
            .map(|(i, (&t, &y))| SamplePoint {
                t,
                y,
                sigma: sigma.map(|s| s[i]),
            })
            .collect();
        TimeSeries::new(points, y_unit)
    }

    pub fn points(&self) -> &[SamplePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.y).collect()
    }

    /// Per-point sigmas if every point carries one.
    pub fn sigmas(&self) -> Option<Vec<f64>> {
        self.points.iter().map(|p| p.sigma).collect()
    }

    pub fn y_unit(&self) -> ValueUnit {
        self.y_unit
    }

    pub fn meta(&self) -> &[(String, String)] {
        &self.meta
    }

    pub fn meta_get(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Set or replace an annotation.
    pub fn set_meta(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        if let Some(slot) = self.meta.iter_mut().find(|(k, _)| k == key) {
            slot.1 = value;
        } else {
            self.meta.push((key.to_string(), value));
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.set_meta(key, value);
        self
    }

    /// Meta value parsed as f64, if present and parseable.
    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        self.meta_get(key).and_then(|v| v.parse().ok())
    }
}

/// Outcome of a least-squares fit: estimates with 1σ uncertainties, the
/// scaled covariance, convergence diagnostics, and whatever was held fixed.
/// Non-converged fits still carry the last iterate.
#[derive(Debug, Clone)]
pub struct FitResult {
    names: Vec<String>,
    estimates: Vec<f64>,
    uncertainties: Vec<f64>,
    covariance: DMatrix<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    fixed: Vec<(String, f64)>,
    derived: Vec<(String, f64)>,
    notes: Vec<String>,
}

impl FitResult {
    pub(crate) fn new(
        names: Vec<String>,
        estimates: Vec<f64>,
        covariance: DMatrix<f64>,
        residual_norm: f64,
        iterations: usize,
        converged: bool,
    ) -> Self {
        let uncertainties = (0..names.len())
            .map(|i| covariance[(i, i)].max(0.0).sqrt())
            .collect();
        FitResult {
            names,
            estimates,
            uncertainties,
            covariance,
            residual_norm,
            iterations,
            converged,
            fixed: Vec::new(),
            derived: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    pub fn uncertainties(&self) -> &[f64] {
        &self.uncertainties
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.estimates[i])
    }

    pub fn uncertainty(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.uncertainties[i])
    }

    pub fn fixed_params(&self) -> &[(String, f64)] {
        &self.fixed
    }

    pub fn fixed(&self, name: &str) -> Option<f64> {
        self.fixed.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    /// Quantities computed from the estimates (branching ratio, derived widths).
    pub fn derived(&self) -> &[(String, f64)] {
        &self.derived
    }

    pub fn derived_value(&self, name: &str) -> Option<f64> {
        self.derived.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    /// Diagnostic notes: identifiability warnings, pinned parameters, ...
    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub(crate) fn push_fixed(&mut self, name: &str, value: f64) {
        self.fixed.push((name.to_string(), value));
    }

    pub(crate) fn push_derived(&mut self, name: &str, value: f64) {
        self.derived.push((name.to_string(), value));
    }

    pub(crate) fn push_note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }
}
