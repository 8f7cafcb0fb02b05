use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{svd, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorNorm {
    L1,
    L2,
}

/// `Z ≈ W F` with `F` having orthonormal rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorModel {
    /// `N × K`.
    pub weights: Matrix,
    /// `K × obs`.
    pub factors: Matrix,
    pub lambda: f64,
    pub norm: FactorNorm,
    /// Objective after every half-step, starting from the initial point.
    pub trace: Vec<f64>,
    pub sweeps: usize,
    /// False when the sweep limit was hit first.
    pub converged: bool,
}

impl FactorModel {
    pub fn reconstruction_error(&self, z: &Matrix) -> Result<f64> {
        Ok(z.sub(&self.weights.matmul(&self.factors)?)?.sum_sq())
    }
}

const MAX_SWEEPS: usize = 500;

fn penalty(w: &Matrix, norm: FactorNorm) -> f64 {
    match norm {
        FactorNorm::L1 => w.as_slice().iter().map(|v| v.abs()).sum(),
        FactorNorm::L2 => w.sum_sq(),
    }
}

fn objective(z: &Matrix, w: &Matrix, f: &Matrix, lambda: f64, norm: FactorNorm) -> Result<f64> {
    Ok(z.sub(&w.matmul(f)?)?.sum_sq() + lambda * penalty(w, norm))
}

/// Exact minimizer over `W` for fixed `F` (`FFᵀ = I`).
fn weight_step(z: &Matrix, f: &Matrix, lambda: f64, norm: FactorNorm) -> Result<Matrix> {
    let a = z.matmul_t(f)?;
    Ok(match norm {
        FactorNorm::L2 => a.scale(1.0 / (1.0 + lambda)),
        FactorNorm::L1 => {
            let cut = 0.5 * lambda;
            a.map(|v| v.signum() * (v.abs() - cut).max(0.0))
        }
    })
}

/// Exact minimizer over `F` with orthonormal rows: `F = U Vᵀ` from `WᵀZ = U S Vᵀ`.
fn factor_step(z: &Matrix, w: &Matrix, previous: &Matrix) -> Result<Matrix> {
    let m = w.t_matmul(z)?;
    if m.max_abs() == 0.0 {
        return Ok(previous.clone());
    }
    let d = svd(&m)?;
    d.u.matmul_t(&d.v)
}

/// Alternating minimization of `‖Z − WF‖² + λ Σ |w|ₗ` over `W` and
/// row-orthonormal `F`, started from the truncated SVD of `Z`.
///
/// Stops when the relative objective change over a sweep drops below 1e-8
/// or after 500 sweeps.
pub fn factor_fit(z: &Matrix, k: usize, lambda: f64, norm: FactorNorm) -> Result<FactorModel> {
    let (n, obs) = z.shape();
    if k == 0 || k >= n || k > obs {
        return Err(Error::param(format!(
            "need 1 <= K < N and K <= observations, got K = {k}, N = {n}, obs = {obs}"
        )));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::param(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    let scale = z.sum_sq();
    let mut f = svd(z)?.v.leading_columns(k).transpose();
    let mut w = Matrix::zeros(n, k);
    let mut trace = vec![objective(z, &w, &f, lambda, norm)?];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let before = *trace.last().unwrap();
        w = weight_step(z, &f, lambda, norm)?;
        trace.push(objective(z, &w, &f, lambda, norm)?);
        f = factor_step(z, &w, &f)?;
        let after = objective(z, &w, &f, lambda, norm)?;
        trace.push(after);
        if (before - after).abs() <= 1e-8 * before.abs().max(1e-24 * scale) {
            converged = true;
            break;
        }
    }
    Ok(FactorModel {
        weights: w,
        factors: f,
        lambda,
        norm,
        trace,
        sweeps,
        converged,
    })
}
