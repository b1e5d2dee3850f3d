//! Central finite-difference derivatives.

use super::registry::ModelKind;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Relative step for central differences.
pub(crate) const FD_RELATIVE_STEP: f64 = 1e-6;
/// Absolute floor so zero-valued parameters still get a step.
pub(crate) const FD_ABSOLUTE_FLOOR: f64 = 1e-12;

/// Central-difference jacobian of `f` at `p`: row i, column j = ∂f_i/∂p_j.
pub(crate) fn fd_jacobian<F>(f: &F, p: &[f64], rows: usize) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> DVector<f64> + ?Sized,
{
    let k = p.len();
    let mut jac = DMatrix::zeros(rows, k);
    let mut work = p.to_vec();
    for j in 0..k {
        let h = (FD_RELATIVE_STEP * p[j].abs()).max(FD_ABSOLUTE_FLOOR);
        work[j] = p[j] + h;
        let fp = f(&work);
        work[j] = p[j] - h;
        let fm = f(&work);
        work[j] = p[j];
        let scale = 1.0 / (2.0 * h);
        for i in 0..rows {
            jac[(i, j)] = (fp[i] - fm[i]) * scale;
        }
    }
    jac
}

/// Derivatives of a registered model over a grid: row i, column j =
/// ∂y(t_i)/∂p_j, with columns in the model's canonical parameter order.
/// `params` may list names in any order but must cover the model exactly.
/// An empty grid yields a 0×k matrix.
pub fn jacobian(model: ModelKind, params: &[(String, f64)], grid: &[f64]) -> Result<DMatrix<f64>> {
    let names = model.param_names();
    let mut full = vec![f64::NAN; names.len()];
    for (name, value) in params {
        let idx = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::FitSetup(format!("model {} has no parameter `{name}`", model.name())))?;
        if !full[idx].is_nan() {
            return Err(Error::FitSetup(format!("parameter `{name}` given twice")));
        }
        full[idx] = *value;
    }
    if let Some(idx) = full.iter().position(|v| v.is_nan()) {
        return Err(Error::FitSetup(format!(
            "missing parameter `{}` for model {}",
            names[idx],
            model.name()
        )));
    }
    let grid = grid.to_vec();
    let f = move |p: &[f64]| DVector::from_iterator(grid.len(), grid.iter().map(|&t| model.eval(p, t)));
    Ok(fd_jacobian(&f, &full, f(&full).len()))
}
