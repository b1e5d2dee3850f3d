//! The named fitting procedures: hole decay, two-pulse echo, joint
//! three-pulse echo, and the zero-power linewidth extrapolation.

use super::engine::{solve, LsqProblem, DEFAULT_MAX_ITERATIONS};
use super::registry::{ModelKind, Transform};
use super::{fit_curve, resolve_weights, FitProblem, Weighting};
use crate::error::{Error, Result};
use crate::models;
use crate::params::DecayModelParams;
use crate::series::{FitResult, TimeSeries};
use nalgebra::DVector;

pub const DELAY_META_KEY: &str = "delay_seconds";

/// Optional knobs shared by the fitting procedures.
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Override the data-derived initial guess for named parameters.
    pub init: Vec<(String, f64)>,
    /// Hold named parameters constant at the given values.
    pub fixed: Vec<(String, f64)>,
    pub weighting: Weighting,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            init: Vec::new(),
            fixed: Vec::new(),
            weighting: Weighting::Auto,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl FitOptions {
    pub fn init(mut self, name: &str, value: f64) -> Self {
        self.init.push((name.to_string(), value));
        self
    }

    pub fn fix(mut self, name: &str, value: f64) -> Self {
        self.fixed.push((name.to_string(), value));
        self
    }

    fn init_for(&self, name: &str) -> Option<f64> {
        self.init.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    fn fixed_for(&self, name: &str) -> Option<f64> {
        self.fixed.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}

/// Unweighted least-squares line through (x, y); returns (slope, intercept).
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < f64::MIN_POSITIVE {
        return (0.0, sy / n);
    }
    let slope = (n * sxy - sx * sy) / denom;
    (slope, (sy - slope * sx) / n)
}

/// Peel a two-exponential: tail gives the slow component, the early
/// remainder gives the fast one.
fn peel_two_exponential(t: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = t.len();
    let tail_from = 2 * n / 3;
    let ln_tail: Vec<f64> = y[tail_from..]
        .iter()
        .map(|&v| v.max(1e-300).ln())
        .collect();
    let (slope_slow, icept_slow) = line_fit(&t[tail_from..], &ln_tail);
    let t_slow = if slope_slow < 0.0 {
        -1.0 / slope_slow
    } else {
        t[n - 1] - t[0]
    };
    let amp_slow = icept_slow.exp().clamp(1e-6 * y[0].abs().max(1e-300), 1e6);

    let head_to = n / 3;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..head_to {
        let rem = y[i] - amp_slow * (-t[i] / t_slow).exp();
        if rem > 0.0 {
            xs.push(t[i]);
            ys.push(rem.ln());
        }
    }
    let (t_fast, amp_fast) = if xs.len() >= 3 {
        let (slope_fast, icept_fast) = line_fit(&xs, &ys);
        let tf = if slope_fast < 0.0 {
            -1.0 / slope_fast
        } else {
            t_slow / 10.0
        };
        (tf, icept_fast.exp())
    } else {
        (t_slow / 10.0, y[0].max(1e-300))
    };
    (amp_fast, t_fast.abs(), amp_slow, t_slow.abs())
}

fn beta_note(result: &mut FitResult) {
    let get = |r: &FitResult, name: &str| r.estimate(name).or_else(|| r.fixed(name));
    if let (Some(b), Some(t1e), Some(t1b)) = (
        get(result, "b"),
        get(result, "t1e"),
        get(result, "t1b"),
    ) {
        if let Ok(p) = DecayModelParams::new(b.clamp(0.0, 1.0), t1e, t1b) {
            if let Ok(beta) = models::branching_beta(&p) {
                result.push_derived("beta", beta);
            }
        }
        let ratio = t1b.max(t1e) / t1b.min(t1e).max(f64::MIN_POSITIVE);
        if ratio < 3.0 {
            result.push_note(format!(
                "lifetimes separated by only {ratio:.2}x (< 3x): B/T1e/T1b weakly identifiable"
            ));
        }
    }
}

/// Fit the two-exponential hole decay. Reports `b`, `t1e`, `t1b` and a free
/// overall `amplitude` (fix it at 1 for data already normalized), plus the
/// derived branching ratio when the lifetimes permit the conversion.
pub fn fit_hole_decay(data: &TimeSeries, opts: &FitOptions) -> Result<FitResult> {
    if data.len() < 6 {
        return Err(Error::FitSetup(format!(
            "hole-decay fit needs at least 6 points, got {}",
            data.len()
        )));
    }
    let t = data.times();
    let y = data.values();
    let (amp_fast, t_fast, amp_slow, t_slow) = peel_two_exponential(&t, &y);
    let amp0 = (amp_fast + amp_slow).max(1e-300);
    let b0 = (amp_slow / amp0).clamp(0.02, 0.98);
    let (t_lo, t_hi) = if t_fast <= t_slow {
        (t_fast, t_slow)
    } else {
        (t_slow, t_fast)
    };

    let mut problem = FitProblem::new(ModelKind::HoleDecay, data.clone());
    problem.weighting = opts.weighting;
    problem.max_iterations = opts.max_iterations;
    let defaults = [
        ("amplitude", amp0),
        ("b", b0),
        ("t1e", t_lo.max(0.1 * (t[1] - t[0]))),
        ("t1b", t_hi.min(100.0 * (t[t.len() - 1]))),
    ];
    for (name, default) in defaults {
        if let Some(v) = opts.fixed_for(name) {
            problem = problem.fixed(name, v);
        } else {
            problem = problem.free(name, opts.init_for(name).unwrap_or(default));
        }
    }
    let mut result = fit_curve(&problem)?;
    beta_note(&mut result);
    Ok(result)
}

/// Fit the stretched-exponential two-pulse-echo decay. Reports `i0`, `t2`,
/// `x`, and derives the equivalent homogeneous linewidth `1/(π·t2)`.
pub fn fit_mims(data: &TimeSeries, opts: &FitOptions) -> Result<FitResult> {
    if data.len() < 8 {
        return Err(Error::FitSetup(format!(
            "two-pulse-echo fit needs at least 8 points, got {}",
            data.len()
        )));
    }
    let t = data.times();
    let y = data.values();
    if t[0] <= 0.0 || t[0].is_nan() {
        return Err(Error::FitSetup("echo delays must be positive".to_string()));
    }
    let spread = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - y.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread == 0.0 {
        return Err(Error::FitSetup(
            "all intensities equal: no decay information".to_string(),
        ));
    }

    let i0_default = y[0].max(1e-300);
    let threshold = i0_default * (-1.0f64).exp();
    let t2_default = match t.iter().zip(&y).find(|(_, &v)| v < threshold) {
        Some((&tc, _)) if tc > t[0] => 4.0 * tc,
        _ => 4.0 * t[t.len() - 1],
    };

    let mut problem = FitProblem::new(ModelKind::Mims, data.clone());
    problem.weighting = opts.weighting;
    problem.max_iterations = opts.max_iterations;
    for (name, default) in [("i0", i0_default), ("t2", t2_default), ("x", 1.0)] {
        if let Some(v) = opts.fixed_for(name) {
            problem = problem.fixed(name, v);
        } else {
            problem = problem.free(name, opts.init_for(name).unwrap_or(default));
        }
    }
    let mut result = fit_curve(&problem)?;
    let t2 = result.estimate("t2").or_else(|| result.fixed("t2")).unwrap();
    result.push_derived("homogeneous_linewidth", 1.0 / (std::f64::consts::PI * t2));
    Ok(result)
}

/// Amplitude treatment for the joint three-pulse-echo fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JointAmplitude {
    /// One free amplitude common to all delay sets. Cross-set intensity
    /// ratios then pin `gamma0`; this is the default.
    Shared,
    /// All amplitudes held at the given value (round-trip validation on
    /// synthesized, already-normalized data).
    Fixed(f64),
    /// A free amplitude per delay set. The model is then exactly invariant
    /// under gamma0 → gamma0+δ with compensating amplitude rescalings, so
    /// `gamma0` must be fixed; left free it is flagged as unidentifiable.
    PerSet,
}

/// Input rescaling applied before the joint fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Use the data as supplied.
    #[default]
    None,
    /// Divide every set by the first set's earliest-waiting-time value,
    /// preserving the cross-set ratios that carry `gamma0`.
    CommonScale,
    /// Divide each set by its own earliest-waiting-time value. Destroys
    /// cross-set ratios; pair with [`JointAmplitude::PerSet`] and a fixed
    /// `gamma0`.
    PerSet,
}

const JOINT_SHARED: [&str; 5] = ["gamma0", "gamma_sd", "rate", "b", "t1e"];

struct JointLayout {
    names: Vec<String>,
    initial: Vec<f64>,
    transforms: Vec<Transform>,
    /// index into the parameter vector for each shared name, or the fixed value
    shared: Vec<SharedSlot>,
    amp_of_set: AmpLayout,
}

#[derive(Clone, Copy)]
enum SharedSlot {
    Free(usize),
    Fixed(f64),
}

enum AmpLayout {
    Shared(usize),
    Fixed(f64),
    PerSet(usize), // first index; set k uses first + k
}

/// Simultaneous fit of all delay sets to the stimulated-echo model with
/// `gamma0`, `gamma_sd`, `rate`, `b`, `t1e` shared and `t1b` held fixed.
/// Each series must carry its pulse delay in the `delay_seconds` annotation.
pub fn fit_3ppe_joint(
    datasets: &[TimeSeries],
    fixed_t1b: f64,
    amplitude: JointAmplitude,
    normalization: Normalization,
    opts: &FitOptions,
) -> Result<FitResult> {
    if datasets.is_empty() {
        return Err(Error::FitSetup("no datasets".to_string()));
    }
    if fixed_t1b <= 0.0 || !fixed_t1b.is_finite() {
        return Err(Error::FitSetup(format!(
            "fixed t1b must be > 0 s, got {fixed_t1b}"
        )));
    }
    let mut delays = Vec::with_capacity(datasets.len());
    for (k, set) in datasets.iter().enumerate() {
        let delay = set.meta_f64(DELAY_META_KEY).ok_or_else(|| {
            Error::FitSetup(format!(
                "dataset {k} lacks the `{DELAY_META_KEY}` annotation"
            ))
        })?;
        if delay <= 0.0 || !delay.is_finite() {
            return Err(Error::FitSetup(format!("dataset {k}: delay must be > 0 s")));
        }
        if delays.contains(&delay) {
            return Err(Error::FitSetup(format!(
                "duplicate delay {delay} s: delays must be distinct"
            )));
        }
        delays.push(delay);
    }

    // rescale copies of the data
    let mut sets: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = Vec::new(); // (t, y, w)
    let mut scale_common = 1.0;
    if normalization == Normalization::CommonScale {
        scale_common = datasets[0].values()[0];
        if scale_common == 0.0 {
            return Err(Error::FitSetup("cannot normalize by a zero value".to_string()));
        }
    }
    for set in datasets {
        let scale = match normalization {
            Normalization::None => 1.0,
            Normalization::CommonScale => scale_common,
            Normalization::PerSet => {
                let v = set.values()[0];
                if v == 0.0 {
                    return Err(Error::FitSetup("cannot normalize by a zero value".to_string()));
                }
                v
            }
        };
        let w = resolve_weights(set, opts.weighting)?;
        let y: Vec<f64> = set.values().iter().map(|v| v / scale).collect();
        // dividing y by s multiplies its weight by s
        let w: Vec<f64> = w.iter().map(|w| w * scale.abs()).collect();
        sets.push((set.times(), y, w));
    }

    let mut notes = Vec::new();
    if datasets.len() < 2 {
        notes.push(
            "single delay set: gamma_sd and rate are only weakly identifiable".to_string(),
        );
    }
    if matches!(amplitude, JointAmplitude::PerSet) && opts.fixed_for("gamma0").is_none() {
        notes.push(
            "per-set amplitudes leave gamma0 unidentifiable (scale trade-off); fix gamma0"
                .to_string(),
        );
    }

    // data-derived defaults
    let first_vals: Vec<f64> = sets.iter().map(|(_, y, _)| y[0]).collect();
    let gamma0_default = if datasets.len() >= 2 {
        let hi = delays.len() - 1;
        let ratio = (first_vals[hi] / first_vals[0]).max(1e-9);
        (-(ratio.ln()) / (2.0 * std::f64::consts::TAU * (delays[hi] - delays[0]))).max(1e3)
    } else {
        1e5
    };
    let t1e_default = {
        let (t, y, _) = &sets[0];
        let n = t.len();
        let (i1, i2) = (n / 4, (3 * n / 4).max(n / 4 + 2).min(n));
        let ln_y: Vec<f64> = y[i1..i2].iter().map(|v| v.max(1e-300).ln()).collect();
        let (slope, _) = line_fit(&t[i1..i2], &ln_y);
        let est = if slope < 0.0 { -2.0 / slope } else { t[n - 1] };
        est.max(5.0 * t[0])
    };
    let tw_step = {
        let (t, _, _) = &sets[0];
        if t.len() > 1 {
            t[1] - t[0]
        } else {
            t[0]
        }
    };

    let init_of = |name: &str, default: f64| opts.init_for(name).unwrap_or(default);
    let base_init = [
        ("gamma0", init_of("gamma0", gamma0_default)),
        ("gamma_sd", init_of("gamma_sd", 2.0 * gamma0_default)),
        ("rate", init_of("rate", 1.0 / (2.0 * tw_step))),
        ("b", init_of("b", 0.3)),
        ("t1e", init_of("t1e", t1e_default)),
    ];

    // multi-start over (gamma_sd, rate) unless the caller pinned either
    let multistart = opts.init_for("gamma_sd").is_none()
        && opts.init_for("rate").is_none()
        && opts.fixed_for("gamma_sd").is_none()
        && opts.fixed_for("rate").is_none();
    let gsd_grid: Vec<f64> = if multistart {
        // natural linewidth scale 1/(4π·tD): delay-decay exponents of order one
        let scale = 1.0 / (2.0 * std::f64::consts::TAU * delays[delays.len() - 1]);
        vec![0.3 * scale, scale, 3.0 * scale, gamma0_default.max(1e3)]
    } else {
        vec![base_init[1].1]
    };
    let rate_grid: Vec<f64> = if multistart {
        [0.1, 0.3, 1.0, 3.0].iter().map(|f| f / tw_step).collect()
    } else {
        vec![base_init[2].1]
    };

    let build_layout = |gsd0: f64, rate0: f64| -> JointLayout {
        let mut names = Vec::new();
        let mut initial = Vec::new();
        let mut transforms = Vec::new();
        let amp_of_set = match amplitude {
            JointAmplitude::Shared => {
                names.push("i0".to_string());
                initial.push(opts.init_for("i0").unwrap_or(first_vals[0].max(1e-300)));
                transforms.push(Transform::Log);
                AmpLayout::Shared(0)
            }
            JointAmplitude::Fixed(v) => AmpLayout::Fixed(v),
            JointAmplitude::PerSet => {
                let first = names.len();
                for (k, fv) in first_vals.iter().enumerate() {
                    names.push(format!("i0_{k}"));
                    initial.push(fv.max(1e-300));
                    transforms.push(Transform::Log);
                }
                AmpLayout::PerSet(first)
            }
        };
        let mut shared = Vec::new();
        for (name, default) in base_init.iter() {
            let default = match *name {
                "gamma_sd" => gsd0,
                "rate" => rate0,
                _ => *default,
            };
            if let Some(v) = opts.fixed_for(name) {
                shared.push(SharedSlot::Fixed(v));
            } else {
                shared.push(SharedSlot::Free(names.len()));
                names.push(name.to_string());
                initial.push(default);
                transforms.push(ModelKind::ThreePulseEcho.transform_for(name));
            }
        }
        JointLayout {
            names,
            initial,
            transforms,
            shared,
            amp_of_set,
        }
    };

    let total_points: usize = sets.iter().map(|(t, _, _)| t.len()).sum();
    let sets_ref = &sets;
    let delays_ref = &delays;

    let run = |layout: &JointLayout| {
        let shared = layout.shared.clone();
        let residuals = move |p: &[f64]| {
            let value = |slot: SharedSlot| match slot {
                SharedSlot::Free(i) => p[i],
                SharedSlot::Fixed(v) => v,
            };
            let gamma0 = value(shared[0]);
            let gamma_sd = value(shared[1]);
            let rate = value(shared[2]);
            let b = value(shared[3]);
            let t1e = value(shared[4]);
            let mut r = Vec::with_capacity(total_points);
            for (k, (t, y, w)) in sets_ref.iter().enumerate() {
                let amp = match layout.amp_of_set {
                    AmpLayout::Shared(i) => p[i],
                    AmpLayout::Fixed(v) => v,
                    AmpLayout::PerSet(first) => p[first + k],
                };
                let full = [
                    amp, gamma0, gamma_sd, rate, b, t1e, fixed_t1b, delays_ref[k],
                ];
                for ((&t, &y), &w) in t.iter().zip(y).zip(w) {
                    r.push(w * (y - ModelKind::ThreePulseEcho.eval(&full, t)));
                }
            }
            DVector::from_vec(r)
        };
        solve(&LsqProblem {
            residuals: &residuals,
            initial: layout.initial.clone(),
            transforms: layout.transforms.clone(),
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); layout.initial.len()],
            max_iterations: opts.max_iterations,
        })
    };

    // pick the lowest-cost converged start; fall back to lowest cost overall
    let mut best: Option<(JointLayout, super::engine::LsqSolution)> = None;
    for &gsd0 in &gsd_grid {
        for &rate0 in &rate_grid {
            let layout = build_layout(gsd0, rate0);
            let sol = run(&layout);
            let better = match &best {
                None => true,
                Some((_, b)) => match (sol.converged, b.converged) {
                    (true, false) => true,
                    (false, true) => false,
                    _ => sol.cost < b.cost,
                },
            };
            if better {
                best = Some((layout, sol));
            }
        }
    }
    let (layout, solution) = best.unwrap();

    let mut result = FitResult::new(
        layout.names,
        solution.params,
        solution.covariance,
        solution.cost.sqrt(),
        solution.iterations,
        solution.converged,
    );
    result.push_fixed("t1b", fixed_t1b);
    if let JointAmplitude::Fixed(v) = amplitude {
        result.push_fixed("i0", v);
    }
    for (name, slot) in JOINT_SHARED.iter().zip(&layout.shared) {
        if let SharedSlot::Fixed(v) = slot {
            result.push_fixed(name, *v);
        }
    }
    for n in notes {
        result.push_note(n);
    }
    for n in solution.notes {
        result.push_note(n);
    }
    let t1e_hat = result.estimate("t1e").or_else(|| result.fixed("t1e")).unwrap();
    if fixed_t1b <= t1e_hat {
        result.push_note(format!(
            "fixed t1b ({fixed_t1b} s) <= fitted t1e ({t1e_hat} s): bottleneck assignment suspect"
        ));
    }
    let rate_hat = result.estimate("rate").or_else(|| result.fixed("rate")).unwrap();
    let tw_max = sets.iter().map(|(t, _, _)| t[t.len() - 1]).fold(0.0, f64::max);
    if rate_hat * tw_max < 1.0 {
        result.push_note(
            "rate · max(waiting time) < 1: diffusion saturation not reached, rate weakly identifiable"
                .to_string(),
        );
    }
    beta_note(&mut result);
    Ok(result)
}

/// Weighted linear regression of hole width against burn power; the
/// intercept is the zero-power width. Closed form, zero iterations.
pub fn extrapolate_zero_power(data: &TimeSeries) -> Result<FitResult> {
    if data.len() < 2 {
        return Err(Error::FitSetup(format!(
            "zero-power extrapolation needs at least 2 distinct powers, got {}",
            data.len()
        )));
    }
    let p = data.times();
    let y = data.values();
    if p[0] < 0.0 {
        return Err(Error::FitSetup(format!(
            "burn powers must be nonnegative, got {}",
            p[0]
        )));
    }
    let w: Vec<f64> = resolve_weights(data, Weighting::Auto)?
        .iter()
        .map(|v| v * v)
        .collect();

    let s_w: f64 = w.iter().sum();
    let s_x: f64 = w.iter().zip(&p).map(|(w, x)| w * x).sum();
    let s_xx: f64 = w.iter().zip(&p).map(|(w, x)| w * x * x).sum();
    let s_y: f64 = w.iter().zip(&y).map(|(w, y)| w * y).sum();
    let s_xy: f64 = w.iter().zip(&p).zip(&y).map(|((w, x), y)| w * x * y).sum();
    let delta = s_w * s_xx - s_x * s_x;
    if delta <= 0.0 {
        return Err(Error::FitSetup("degenerate power grid".to_string()));
    }
    let slope = (s_w * s_xy - s_x * s_y) / delta;
    let intercept = (s_xx * s_y - s_x * s_xy) / delta;

    let chi2: f64 = w
        .iter()
        .zip(&p)
        .zip(&y)
        .map(|((w, x), y)| w * (y - (intercept + slope * x)).powi(2))
        .sum();
    let dof = (data.len().saturating_sub(2)).max(1) as f64;
    let scale = chi2 / dof;
    let cov = nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[
            s_xx / delta * scale,
            -s_x / delta * scale,
            -s_x / delta * scale,
            s_w / delta * scale,
        ],
    );
    let mut result = FitResult::new(
        vec!["intercept".to_string(), "slope".to_string()],
        vec![intercept, slope],
        cov,
        chi2.sqrt(),
        0,
        true,
    );
    if data.len() == 2 {
        result.push_note("exact two-point fit: uncertainties collapse to zero".to_string());
    }
    Ok(result)
}
