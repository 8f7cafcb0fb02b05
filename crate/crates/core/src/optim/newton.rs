use crate::error::{Error, Result};
use crate::linalg::{cholesky, back_substitute_transposed, forward_substitute, Matrix};

const MAX_NEWTON_PARAMS: usize = 500;

/// Hessian by central differences of the analytic gradient, symmetrized.
fn fd_hessian(
    grad_fn: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
    x: &[f64],
) -> Result<Matrix> {
    let n = x.len();
    let mut h = Matrix::zeros(n, n);
    let mut probe = x.to_vec();
    for j in 0..n {
        let step = 1e-5 * x[j].abs().max(1.0);
        probe[j] = x[j] + step;
        let gp = grad_fn(&probe)?;
        probe[j] = x[j] - step;
        let gm = grad_fn(&probe)?;
        probe[j] = x[j];
        for i in 0..n {
            h[(i, j)] = (gp[i] - gm[i]) / (2.0 * step);
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (h[(i, j)] + h[(j, i)]);
            h[(i, j)] = avg;
            h[(j, i)] = avg;
        }
    }
    Ok(h)
}

/// Solves `(H + λI) Δ = −g`, raising λ tenfold until the system factorizes.
fn damped_direction(h: &Matrix, g: &[f64], damping: f64) -> Result<(Vec<f64>, f64)> {
    let n = g.len();
    let scale = h.max_abs().max(1.0);
    let mut lambda = damping;
    for _ in 0..40 {
        let mut a = h.clone();
        for i in 0..n {
            a[(i, i)] += lambda;
        }
        if let Ok(l) = cholesky(&a) {
            let neg: Vec<f64> = g.iter().map(|v| -v).collect();
            let delta = back_substitute_transposed(&l, &forward_substitute(&l, &neg));
            return Ok((delta, lambda));
        }
        lambda = if lambda <= 0.0 { 1e-10 * scale } else { lambda * 10.0 };
    }
    Err(Error::Conditioning(format!(
        "H + λI not positive definite up to λ = {lambda:e}"
    )))
}

/// One damped Newton step `x − (H + λI)⁻¹ ∇f(x)`.
///
/// The Hessian comes from central differences of `grad_fn`. If `H + λI` is
/// not positive definite, λ is escalated until it is.
pub fn newton_step(
    grad_fn: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
    x: &[f64],
    damping: f64,
) -> Result<Vec<f64>> {
    if x.len() > MAX_NEWTON_PARAMS {
        return Err(Error::param(format!(
            "newton limited to {MAX_NEWTON_PARAMS} parameters, got {}",
            x.len()
        )));
    }
    let g = grad_fn(x)?;
    let h = fd_hessian(grad_fn, x)?;
    let (delta, _) = damped_direction(&h, &g, damping)?;
    Ok(x.iter().zip(&delta).map(|(a, d)| a + d).collect())
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Stop once ‖∇f‖ falls below this.
    pub grad_tol: f64,
    pub initial_damping: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iter: 100,
            grad_tol: 1e-10,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted step.
    pub trace: Vec<f64>,
}

/// Newton iterations with adaptive (Levenberg-style) damping: a step that
/// lowers `f` is accepted and λ shrinks tenfold, otherwise λ grows tenfold.
pub fn newton_minimize(
    f: &mut dyn FnMut(&[f64]) -> Result<f64>,
    grad_fn: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
    x0: &[f64],
    opts: NewtonOptions,
) -> Result<NewtonReport> {
    if x0.len() > MAX_NEWTON_PARAMS {
        return Err(Error::param(format!(
            "newton limited to {MAX_NEWTON_PARAMS} parameters, got {}",
            x0.len()
        )));
    }
    let mut x = x0.to_vec();
    let mut fx = f(&x)?;
    let mut lambda = opts.initial_damping;
    let mut trace = vec![fx];
    for it in 0..opts.max_iter {
        let g = grad_fn(&x)?;
        if g.iter().any(|v| !v.is_finite()) || !fx.is_finite() {
            return Err(Error::Divergence {
                iteration: it,
                last_good: None,
            });
        }
        if crate::linalg::norm(&g) < opts.grad_tol {
            return Ok(NewtonReport {
                x,
                iterations: it,
                converged: true,
                trace,
            });
        }
        let h = fd_hessian(grad_fn, &x)?;
        let mut accepted = false;
        for _ in 0..30 {
            let (delta, used) = damped_direction(&h, &g, lambda)?;
            let cand: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + d).collect();
            let fc = f(&cand)?;
            if fc.is_finite() && fc <= fx {
                x = cand;
                fx = fc;
                lambda = used / 10.0;
                accepted = true;
                break;
            }
            lambda = (used * 10.0).max(1e-8);
        }
        trace.push(fx);
        if !accepted {
            // No decrease at any damping level: already at numerical optimum.
            return Ok(NewtonReport {
                x,
                iterations: it + 1,
                converged: crate::linalg::norm(&g) < opts.grad_tol.sqrt(),
                trace,
            });
        }
    }
    let converged = crate::linalg::norm(&grad_fn(&x)?) < opts.grad_tol;
    Ok(NewtonReport {
        x,
        iterations: opts.max_iter,
        converged,
        trace,
    })
}
