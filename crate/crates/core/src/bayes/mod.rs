//! Dropout as a g-prior ridge penalty, MC-dropout prediction, ensembles and
//! variational inference.
//!
//! `p` is always the keep-probability of a mask entry.

mod vi;

pub use vi::{
    elbo, expectation_gradient_samples, kl_gaussians, vi_fit, ConjugateGaussianToy, ElboEstimate,
    EstimatorKind, LogLikelihood, QuadraticToy, VariationalGaussian, ViConfig, ViFit,
};

use crate::error::{Error, Result};
use crate::linalg::{solve_spd, Matrix};
use crate::nnet::Network;
use crate::rng::{check_probability, Rng};

/// Keep-probability for the input of each layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutSpec {
    keep: Vec<f64>,
}

impl DropoutSpec {
    pub fn new(keep: Vec<f64>) -> Result<Self> {
        for &p in &keep {
            check_probability(p)?;
        }
        Ok(DropoutSpec { keep })
    }

    pub fn uniform(p: f64, layers: usize) -> Result<Self> {
        DropoutSpec::new(vec![p; layers])
    }

    pub fn keep(&self) -> &[f64] {
        &self.keep
    }
}

/// `D ⋆ X` with a fresh i.i.d. Bernoulli(p) mask.
pub fn apply_dropout(x: &Matrix, p: f64, rng: &mut Rng) -> Result<Matrix> {
    check_probability(p)?;
    let mut out = x.clone();
    for v in out.as_mut_slice() {
        if !rng.bernoulli(p) {
            *v = 0.0;
        }
    }
    Ok(out)
}

/// Diagonal of Γ: the Euclidean norm of each feature row of `x`.
pub fn gprior_scale(x: &Matrix) -> Vec<f64> {
    (0..x.rows())
        .map(|j| x.row(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect()
}

fn check_dropout_shapes(w: &Matrix, x: &Matrix, y: &Matrix) -> Result<()> {
    if w.cols() != x.rows() || y.rows() != w.rows() || y.cols() != x.cols() {
        return Err(Error::shape(format!(
            "W {:?}, X {:?}, Y {:?} are not conformable",
            w.shape(),
            x.shape(),
            y.shape()
        )));
    }
    Ok(())
}

/// `‖Y − pWX‖² + p(1−p)‖WΓ‖²`, the dropout loss averaged over masks.
///
/// `W` is `out × in`, `X` is `in × n`, `Y` is `out × n`.
pub fn dropout_marginal_objective(w: &Matrix, x: &Matrix, y: &Matrix, p: f64) -> Result<f64> {
    check_dropout_shapes(w, x, y)?;
    check_probability(p)?;
    let resid = y.sub(&w.matmul(x)?.scale(p))?;
    let gamma = gprior_scale(x);
    let mut pen = 0.0;
    for k in 0..w.rows() {
        for (j, g) in gamma.iter().enumerate() {
            pen += (w[(k, j)] * g).powi(2);
        }
    }
    Ok(resid.sum_sq() + p * (1.0 - p) * pen)
}

/// Monte Carlo average of `‖Y − W(D⋆X)‖²` over `masks` fresh Bernoulli(p)
/// masks, with its standard error.
pub fn dropout_mc_objective(
    w: &Matrix,
    x: &Matrix,
    y: &Matrix,
    p: f64,
    masks: usize,
    rng: &mut Rng,
) -> Result<(f64, f64)> {
    check_dropout_shapes(w, x, y)?;
    check_probability(p)?;
    if masks < 2 {
        return Err(Error::param("need at least two masks"));
    }
    let (mut mean, mut m2) = (0.0, 0.0);
    for s in 0..masks {
        let v = y.sub(&w.matmul(&apply_dropout(x, p, rng)?)?)?.sum_sq();
        let delta = v - mean;
        mean += delta / (s + 1) as f64;
        m2 += delta * (v - mean);
    }
    Ok((mean, (m2 / (masks - 1) as f64 / masks as f64).sqrt()))
}

/// Gradient of [`dropout_marginal_objective`] with respect to `W`.
pub fn dropout_marginal_gradient(w: &Matrix, x: &Matrix, y: &Matrix, p: f64) -> Result<Matrix> {
    check_dropout_shapes(w, x, y)?;
    check_probability(p)?;
    let resid = y.sub(&w.matmul(x)?.scale(p))?;
    let mut g = resid.matmul_t(x)?.scale(-2.0 * p);
    let gamma = gprior_scale(x);
    for k in 0..w.rows() {
        for (j, gj) in gamma.iter().enumerate() {
            g[(k, j)] += 2.0 * p * (1.0 - p) * w[(k, j)] * gj * gj;
        }
    }
    Ok(g)
}

/// Minimizer of the marginal dropout objective for a single response.
///
/// Solves `(p²XXᵀ + p(1−p)Γ²) w = pXy` by Cholesky.
pub fn gprior_ridge_solve(x: &Matrix, y: &[f64], p: f64) -> Result<Vec<f64>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::param(format!("keep-probability must lie in (0, 1], got {p}")));
    }
    if y.len() != x.cols() {
        return Err(Error::shape(format!(
            "y has {} entries, X has {} observations",
            y.len(),
            x.cols()
        )));
    }
    let mut a = x.matmul_t(x)?.scale(p * p);
    for (j, g) in gprior_scale(x).iter().enumerate() {
        a[(j, j)] += p * (1.0 - p) * g * g;
    }
    let rhs: Vec<f64> = x.matvec(y)?.iter().map(|v| p * v).collect();
    solve_spd(&a, &rhs).map_err(|e| match e {
        Error::Conditioning(m) => Error::Conditioning(format!("dropout normal equations: {m}")),
        other => other,
    })
}

/// Mean and unbiased variance of `samples` stochastic forward passes.
///
/// Each layer's input is masked with that layer's keep-probability.
pub fn mc_dropout_predict(
    net: &Network,
    spec: &DropoutSpec,
    x: &Matrix,
    samples: usize,
    rng: &mut Rng,
) -> Result<(Matrix, Matrix)> {
    if samples < 2 {
        return Err(Error::param("MC dropout needs at least 2 samples"));
    }
    if spec.keep.len() != net.layers().len() {
        return Err(Error::shape(format!(
            "dropout spec has {} keep-probabilities for {} layers",
            spec.keep.len(),
            net.layers().len()
        )));
    }
    let (r, c) = (net.output_dim(), x.cols());
    let mut mean = Matrix::zeros(r, c);
    let mut m2 = Matrix::zeros(r, c);
    for s in 0..samples {
        let cache = net.forward_with(x, |l, input| {
            let p = spec.keep[l];
            if p >= 1.0 {
                input
            } else {
                apply_dropout(&input, p, rng).expect("keep-probabilities validated")
            }
        })?;
        // Welford update.
        let out = cache.output();
        let count = (s + 1) as f64;
        for ((m, q), &v) in mean
            .as_mut_slice()
            .iter_mut()
            .zip(m2.as_mut_slice())
            .zip(out.as_slice())
        {
            let delta = v - *m;
            *m += delta / count;
            *q += delta * (v - *m);
        }
    }
    Ok((mean, m2.scale(1.0 / (samples - 1) as f64)))
}

/// Weighted average of stacked predictions; uniform weights when `None`.
pub fn ensemble_average(predictions: &[Matrix], weights: Option<&[f64]>) -> Result<Matrix> {
    let first = predictions
        .first()
        .ok_or_else(|| Error::param("ensemble needs at least one prediction"))?;
    let k = predictions.len();
    let uniform = vec![1.0 / k as f64; k];
    let weights = weights.unwrap_or(&uniform);
    if weights.len() != k {
        return Err(Error::shape(format!("{} weights for {k} predictions", weights.len())));
    }
    if weights.iter().any(|w| *w < 0.0) {
        return Err(Error::param("ensemble weights must be nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::param(format!("ensemble weights sum to {total}, not 1")));
    }
    let mut out = Matrix::zeros(first.rows(), first.cols());
    for (pred, w) in predictions.iter().zip(weights) {
        if pred.shape() != first.shape() {
            return Err(Error::shape("ensemble predictions differ in shape"));
        }
        out = out.add(&pred.scale(*w))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm};
    use crate::nnet::{Activation, Layer};

    fn random(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| rng.normal())
    }

    #[test]
    fn dropout_extremes() {
        let mut rng = Rng::new(1);
        let x = random(3, 4, &mut rng);
        assert_eq!(apply_dropout(&x, 1.0, &mut rng).unwrap(), x);
        assert_eq!(apply_dropout(&x, 0.0, &mut rng).unwrap().sum_sq(), 0.0);
        assert!(apply_dropout(&x, 1.5, &mut rng).is_err());
    }

    #[test]
    fn kept_fraction() {
        let mut rng = Rng::new(2);
        let x = Matrix::from_fn(100, 1000, |_, _| 1.0);
        let kept = apply_dropout(&x, 0.3, &mut rng).unwrap().as_slice().iter().sum::<f64>() / 1e5;
        assert!((kept - 0.3).abs() < 0.005, "{kept}");
    }

    #[test]
    fn gamma_hand_value() {
        let x = Matrix::from_rows(&[vec![3.0, 4.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(gprior_scale(&x), vec![5.0, 1.0]);
    }

    #[test]
    fn full_keep_is_least_squares() {
        let mut rng = Rng::new(3);
        let (w, x, y) = (random(2, 3, &mut rng), random(3, 8, &mut rng), random(2, 8, &mut rng));
        let ls = y.sub(&w.matmul(&x).unwrap()).unwrap().sum_sq();
        let obj = dropout_marginal_objective(&w, &x, &y, 1.0).unwrap();
        assert!((obj - ls).abs() < 1e-12 * ls);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = Rng::new(4);
        let (w, x, y) = (random(2, 3, &mut rng), random(3, 8, &mut rng), random(2, 8, &mut rng));
        let g = dropout_marginal_gradient(&w, &x, &y, 0.6).unwrap();
        for k in 0..2 {
            for j in 0..3 {
                let h = 1e-6;
                let mut wp = w.clone();
                wp[(k, j)] += h;
                let mut wm = w.clone();
                wm[(k, j)] -= h;
                let fd = (dropout_marginal_objective(&wp, &x, &y, 0.6).unwrap()
                    - dropout_marginal_objective(&wm, &x, &y, 0.6).unwrap())
                    / (2.0 * h);
                assert!((fd - g[(k, j)]).abs() < 1e-6 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn ridge_full_keep_is_ols() {
        let mut rng = Rng::new(5);
        let x = random(3, 20, &mut rng);
        let y: Vec<f64> = (0..20).map(|_| rng.normal()).collect();
        let w = gprior_ridge_solve(&x, &y, 1.0).unwrap();
        let ols = solve_spd(&x.matmul_t(&x).unwrap(), &x.matvec(&y).unwrap()).unwrap();
        for (a, b) in w.iter().zip(&ols) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn ridge_orthonormal_rows_cancel_scaling() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = Matrix::from_rows(&[vec![s, s, 0.0], vec![s, -s, 0.0]]).unwrap();
        let y = [1.0, 2.0, 3.0];
        let xy = x.matvec(&y).unwrap();
        for p in [0.2, 0.5, 0.9] {
            let w = gprior_ridge_solve(&x, &y, p).unwrap();
            for (a, b) in w.iter().zip(&xy) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mc_marginal_matches_closed_form() {
        let mut rng = Rng::new(10);
        for p in [0.2, 0.5, 0.8] {
            let w = random(2, 3, &mut rng);
            let x = random(3, 8, &mut rng);
            let y = random(2, 8, &mut rng);
            let exact = dropout_marginal_objective(&w, &x, &y, p).unwrap();
            let (mc, se) = dropout_mc_objective(&w, &x, &y, p, 100_000, &mut rng).unwrap();
            assert!((mc - exact).abs() < 3.0 * se, "p = {p}: {mc} vs {exact} (se {se})");
            assert!((mc - exact).abs() / exact < 5e-3);
        }
    }

    #[test]
    fn ridge_solution_is_stationary() {
        let mut rng = Rng::new(6);
        let x = random(4, 30, &mut rng);
        let y: Vec<f64> = (0..30).map(|_| rng.normal()).collect();
        let w = gprior_ridge_solve(&x, &y, 0.4).unwrap();
        let g = dropout_marginal_gradient(
            &Matrix::from_vec(1, 4, w).unwrap(),
            &x,
            &Matrix::from_vec(1, 30, y).unwrap(),
            0.4,
        )
        .unwrap();
        assert!(norm(g.as_slice()) < 1e-8);
    }

    #[test]
    fn mc_dropout_full_keep_has_zero_variance() {
        let mut rng = Rng::new(7);
        let net = Network::init(3, &[(4, Activation::Tanh), (2, Activation::Identity)], &mut rng)
            .unwrap();
        let x = random(3, 5, &mut rng);
        let spec = DropoutSpec::uniform(1.0, 2).unwrap();
        let (mean, var) = mc_dropout_predict(&net, &spec, &x, 10, &mut rng).unwrap();
        assert!(var.as_slice().iter().all(|v| *v == 0.0));
        assert_eq!(mean, net.predict(&x).unwrap());
    }

    #[test]
    fn mc_dropout_linear_mean() {
        let mut rng = Rng::new(8);
        let w = Matrix::from_rows(&[vec![1.0, -2.0, 0.5]]).unwrap();
        let net = Network::new(3, vec![Layer::new(w.clone(), vec![0.3], Activation::Identity).unwrap()])
            .unwrap();
        let x = Matrix::column_vector(&[1.0, 1.0, 2.0]);
        let spec = DropoutSpec::uniform(0.5, 1).unwrap();
        let s = 100_000;
        let (mean, var) = mc_dropout_predict(&net, &spec, &x, s, &mut rng).unwrap();
        let expect = 0.5 * dot(w.row(0), &x.column(0)) + 0.3;
        let se = (var[(0, 0)] / s as f64).sqrt();
        assert!((mean[(0, 0)] - expect).abs() < 4.0 * se, "{} vs {expect}", mean[(0, 0)]);
        assert!(var[(0, 0)] > 0.0);
    }

    #[test]
    fn ensemble_basics() {
        let mut rng = Rng::new(9);
        let a = random(2, 3, &mut rng);
        assert_eq!(ensemble_average(&[a.clone()], None).unwrap(), a);
        let avg = ensemble_average(&[a.clone(), a.clone()], None).unwrap();
        for (u, v) in avg.as_slice().iter().zip(a.as_slice()) {
            assert!((u - v).abs() < 1e-15);
        }
        assert!(ensemble_average(&[a.clone(), a.clone()], Some(&[0.5, 0.6])).is_err());
        assert!(ensemble_average(&[], None).is_err());
    }
}
