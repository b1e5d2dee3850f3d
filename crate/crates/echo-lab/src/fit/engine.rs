//! Damped Gauss–Newton minimizer for weighted least squares.
//!
//! Steps are taken in a transformed space (log for positive parameters,
//! logit for fractions) so iterates cannot leave their domains. Damping is
//! multiplicative on the scaled normal equations: start 1e-3, ×10 on a
//! rejected step, ÷10 on an accepted one. Convergence requires both a
//! relative parameter change < 1e-8 and a relative cost change < 1e-10 on
//! an accepted step. Everything is pure f64 arithmetic: identical problems
//! produce bit-identical solutions.

use super::jacobian::fd_jacobian;
use super::registry::Transform;
use nalgebra::{DMatrix, DVector};

pub(crate) const DEFAULT_MAX_ITERATIONS: usize = 200;
const LAMBDA_START: f64 = 1e-3;
const LAMBDA_UP: f64 = 10.0;
const LAMBDA_DOWN: f64 = 10.0;
const LAMBDA_CEIL: f64 = 1e15;
const XTOL: f64 = 1e-8;
const FTOL: f64 = 1e-10;

pub(crate) struct LsqProblem<'a> {
    /// Weighted residuals r(p) = (y - f(p))/sigma in raw parameter space.
    pub residuals: &'a dyn Fn(&[f64]) -> DVector<f64>,
    pub initial: Vec<f64>,
    pub transforms: Vec<Transform>,
    /// Raw-space clamps applied after every step; use ±INFINITY for none.
    pub bounds: Vec<(f64, f64)>,
    pub max_iterations: usize,
}

pub(crate) struct LsqSolution {
    pub params: Vec<f64>,
    /// Sum of squared weighted residuals at the solution.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Raw-space covariance (JᵀWJ)⁻¹ scaled by reduced chi-square.
    pub covariance: DMatrix<f64>,
    pub notes: Vec<String>,
}

fn to_raw(transforms: &[Transform], z: &[f64]) -> Vec<f64> {
    transforms.iter().zip(z).map(|(t, &z)| t.inverse(z)).collect()
}

fn clamp(p: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in p.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

pub(crate) fn solve(problem: &LsqProblem<'_>) -> LsqSolution {
    let k = problem.initial.len();
    let mut notes = Vec::new();

    let mut start = problem.initial.clone();
    clamp(&mut start, &problem.bounds);
    let mut z: Vec<f64> = problem
        .transforms
        .iter()
        .zip(&start)
        .map(|(t, &p)| t.forward(p))
        .collect();

    let eval_z = |z: &[f64]| (problem.residuals)(&to_raw(&problem.transforms, z));

    let mut r = eval_z(&z);
    let m = r.len();
    let mut cost = r.norm_squared();
    let mut lambda = LAMBDA_START;
    let mut iterations = 0;
    let mut converged = false;

    if k == 0 {
        converged = true;
    }

    'outer: while !converged && iterations < problem.max_iterations {
        iterations += 1;
        let jac = fd_jacobian(&eval_z, &z, m);
        let h = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let max_diag = (0..k).fold(0.0f64, |acc, i| acc.max(h[(i, i)].abs()));
        // a floor keeps the damped system solvable when a column is all zero
        let diag_floor = (max_diag * 1e-14).max(f64::MIN_POSITIVE);

        let mut last_trial: Option<(f64, bool)> = None; // (rel step size, finite cost)
        loop {
            let mut damped = h.clone();
            for i in 0..k {
                damped[(i, i)] += lambda * h[(i, i)].max(diag_floor);
            }
            let step = damped.cholesky().map(|ch| ch.solve(&(-&g)));

            let mut accepted = false;
            if let Some(step) = step {
                let z_try: Vec<f64> = z.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                let mut p_try = to_raw(&problem.transforms, &z_try);
                clamp(&mut p_try, &problem.bounds);
                let z_try: Vec<f64> = problem
                    .transforms
                    .iter()
                    .zip(&p_try)
                    .map(|(t, &p)| t.forward(p))
                    .collect();
                let r_try = eval_z(&z_try);
                let cost_try = r_try.norm_squared();
                let rel_dz = z
                    .iter()
                    .zip(&z_try)
                    .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
                    .fold(0.0f64, f64::max);
                last_trial = Some((rel_dz, cost_try.is_finite()));
                if cost_try.is_finite() && cost_try < cost {
                    let rel_dcost = (cost - cost_try) / cost.max(f64::MIN_POSITIVE);
                    z = z_try;
                    r = r_try;
                    cost = cost_try;
                    lambda = (lambda / LAMBDA_DOWN).max(1e-12);
                    if rel_dz < XTOL && rel_dcost < FTOL {
                        converged = true;
                        break 'outer;
                    }
                    accepted = true;
                }
            }
            if accepted {
                break;
            }
            lambda *= LAMBDA_UP;
            if lambda > LAMBDA_CEIL {
                // even a maximally damped (scaled gradient) step no longer
                // lowers the cost: if that step was negligible we sit at a
                // minimum to float precision, otherwise something is wrong
                // (a NaN cliff or wild scaling)
                match last_trial {
                    _ if cost == 0.0 => converged = true,
                    Some((rel_dz, true)) if rel_dz < 1e-6 => converged = true,
                    _ => notes.push("stalled: damping exhausted before convergence".to_string()),
                }
                break 'outer;
            }
        }
    }

    if !converged && iterations >= problem.max_iterations {
        notes.push(format!(
            "iteration cap ({}) exceeded",
            problem.max_iterations
        ));
    }

    let params = to_raw(&problem.transforms, &z);

    // bound pins
    for (i, (&p, &(lo, hi))) in params.iter().zip(&problem.bounds).enumerate() {
        let span = (hi - lo).abs();
        let tol = if span.is_finite() { span * 1e-9 } else { p.abs() * 1e-9 };
        if lo.is_finite() && (p - lo).abs() <= tol || hi.is_finite() && (hi - p).abs() <= tol {
            notes.push(format!("parameter {i} pinned at a bound"));
        }
    }

    // raw-space covariance: (JᵀWJ)⁻¹ · chi²/dof
    let jac_raw = fd_jacobian(problem.residuals, &params, m);
    let h_raw = jac_raw.transpose() * &jac_raw;
    let dof = (m.saturating_sub(k)).max(1) as f64;
    let scale = cost / dof;
    let finite = h_raw.iter().all(|v| v.is_finite());
    let chol_cov = if finite {
        h_raw
            .clone()
            .cholesky()
            .map(|ch| ch.inverse() * scale)
            .filter(|cov| cov.iter().all(|v| v.is_finite()))
    } else {
        None
    };
    let mut covariance;
    match chol_cov {
        Some(cov) => {
            covariance = cov;
        }
        _ if !finite => {
            converged = false;
            covariance = DMatrix::from_element(k, k, f64::NAN);
            notes.push("non-finite normal equations at the solution".to_string());
        }
        _ => {
            converged = false;
            // pseudo-inverse with bounded iterations; unidentifiable
            // directions get an infinite variance instead of a fake zero
            let mut sing_names = Vec::new();
            match h_raw.clone().try_svd(true, true, 1e-15, 10_000) {
                Some(svd) => {
                    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
                    let tol = smax * 1e-12;
                    if let Some(vt) = &svd.v_t {
                        let mut inv = DMatrix::zeros(k, k);
                        for (idx, &s) in svd.singular_values.iter().enumerate() {
                            if s > tol {
                                let col = vt.row(idx).transpose();
                                inv += &col * col.transpose() / s;
                            } else {
                                for j in 0..k {
                                    if vt[(idx, j)].abs() > 0.5 {
                                        sing_names.push(j);
                                    }
                                }
                            }
                        }
                        covariance = inv * scale;
                        for &j in &sing_names {
                            covariance[(j, j)] = f64::INFINITY;
                        }
                    } else {
                        covariance = DMatrix::from_element(k, k, f64::NAN);
                    }
                }
                None => {
                    covariance = DMatrix::from_element(k, k, f64::NAN);
                }
            }
            notes.push(format!(
                "singular normal equations; unidentifiable parameter indices: {:?}",
                sing_names
            ));
        }
    }
    // symmetrize and floor the diagonal
    for i in 0..k {
        for j in (i + 1)..k {
            let avg = 0.5 * (covariance[(i, j)] + covariance[(j, i)]);
            covariance[(i, j)] = avg;
            covariance[(j, i)] = avg;
        }
        if covariance[(i, i)] < 0.0 {
            covariance[(i, i)] = 0.0;
        }
    }

    // a sigma orders of magnitude above the estimate means the data do not
    // constrain that parameter at all; say so instead of leaving a silently
    // absurd error bar
    for i in 0..k {
        let sigma = covariance[(i, i)].sqrt();
        if sigma.is_finite() && sigma > 1e3 * (params[i].abs() + f64::MIN_POSITIVE) && cost > 0.0 {
            notes.push(format!(
                "parameter {i} is unconstrained by the data (sigma {sigma:.2e} vs estimate {:.2e})",
                params[i]
            ));
        }
    }

    LsqSolution {
        params,
        cost,
        iterations,
        converged,
        covariance,
        notes,
    }
}
