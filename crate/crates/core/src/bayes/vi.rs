use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{OptimizerState, Schedule};
use crate::rng::Rng;

/// Mean-field Gaussian `q(θ) = N(μ, diag(σ²))` with `σ = exp(log_sigma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalGaussian {
    pub mu: Vec<f64>,
    pub log_sigma: Vec<f64>,
}

impl VariationalGaussian {
    pub fn new(mu: Vec<f64>, log_sigma: Vec<f64>) -> Result<Self> {
        if mu.len() != log_sigma.len() {
            return Err(Error::shape("mu and log_sigma differ in length"));
        }
        if mu.iter().chain(&log_sigma).any(|v| !v.is_finite()) {
            return Err(Error::param("variational parameters must be finite"));
        }
        Ok(VariationalGaussian { mu, log_sigma })
    }

    /// `N(0, I)` in `dim` coordinates.
    pub fn standard(dim: usize) -> Self {
        VariationalGaussian {
            mu: vec![0.0; dim],
            log_sigma: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.log_sigma.iter().map(|l| l.exp()).collect()
    }

    /// Flattened `(μ, log σ)`.
    pub fn params(&self) -> Vec<f64> {
        self.mu.iter().chain(&self.log_sigma).copied().collect()
    }

    fn from_params(p: &[f64]) -> Result<Self> {
        let d = p.len() / 2;
        VariationalGaussian::new(p[..d].to_vec(), p[d..].to_vec())
    }
}

/// `KL(q ‖ prior)` for diagonal Gaussians.
pub fn kl_gaussians(q: &VariationalGaussian, prior: &VariationalGaussian) -> Result<f64> {
    if q.dim() != prior.dim() {
        return Err(Error::shape(format!(
            "KL between dimensions {} and {}",
            q.dim(),
            prior.dim()
        )));
    }
    let mut kl = 0.0;
    for i in 0..q.dim() {
        let (l1, l2) = (q.log_sigma[i], prior.log_sigma[i]);
        let ratio = (2.0 * (l1 - l2)).exp();
        let dm = q.mu[i] - prior.mu[i];
        kl += l2 - l1 + 0.5 * ratio + 0.5 * dm * dm * (-2.0 * l2).exp() - 0.5;
    }
    Ok(kl)
}

/// Gradient of `KL(q ‖ prior)` with respect to `(μ, log σ)` of `q`.
fn kl_gradient(q: &VariationalGaussian, prior: &VariationalGaussian) -> Vec<f64> {
    let d = q.dim();
    let mut g = vec![0.0; 2 * d];
    for i in 0..d {
        let inv_var2 = (-2.0 * prior.log_sigma[i]).exp();
        g[i] = (q.mu[i] - prior.mu[i]) * inv_var2;
        g[d + i] = (2.0 * q.log_sigma[i]).exp() * inv_var2 - 1.0;
    }
    g
}

/// Log-likelihood `log p(Y | X, θ)` with the data held by the implementor.
pub trait LogLikelihood {
    fn dim(&self) -> usize;
    fn log_likelihood(&self, theta: &[f64]) -> Result<f64>;
    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    /// Log-derivative trick: `f(θ) ∇ log q(θ)`.
    Score,
    /// `θ = μ + σ ε`, differentiate through the sample.
    Reparam,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Score => "score",
            EstimatorKind::Reparam => "reparam",
        }
    }
}

fn checked_log_lik(model: &dyn LogLikelihood, theta: &[f64]) -> Result<f64> {
    let v = model.log_likelihood(theta)?;
    if !v.is_finite() {
        return Err(Error::Model(format!("log-likelihood is {v} at θ = {theta:?}")));
    }
    Ok(v)
}

/// One draw per entry: `(log p(Y|θₛ), ∂/∂(μ, log σ))` of the expected
/// log-likelihood term.
pub fn expectation_gradient_samples(
    q: &VariationalGaussian,
    model: &dyn LogLikelihood,
    samples: usize,
    rng: &mut Rng,
    kind: EstimatorKind,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let d = q.dim();
    if model.dim() != d {
        return Err(Error::shape(format!(
            "model has {} parameters, q has {d}",
            model.dim()
        )));
    }
    let sigma = q.sigma();
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let eps: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let theta: Vec<f64> = (0..d).map(|i| q.mu[i] + sigma[i] * eps[i]).collect();
        let f = checked_log_lik(model, &theta)?;
        let mut g = vec![0.0; 2 * d];
        match kind {
            EstimatorKind::Reparam => {
                let grad = model.gradient(&theta)?;
                if grad.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Model("non-finite log-likelihood gradient".into()));
                }
                for i in 0..d {
                    g[i] = grad[i];
                    g[d + i] = grad[i] * eps[i] * sigma[i];
                }
            }
            EstimatorKind::Score => {
                // ∂ log q / ∂μ = ε/σ, ∂ log q / ∂ log σ = ε² − 1.
                for i in 0..d {
                    g[i] = f * eps[i] / sigma[i];
                    g[d + i] = f * (eps[i] * eps[i] - 1.0);
                }
            }
        }
        out.push((f, g));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ElboEstimate {
    pub value: f64,
    /// Gradient with respect to `(μ, log σ)`, concatenated.
    pub gradient: Vec<f64>,
}

/// Monte Carlo ELBO `E_q[log p(Y|θ)] − KL(q ‖ prior)` and its gradient.
///
/// The expectation uses `samples` draws; the KL term is exact.
pub fn elbo(
    q: &VariationalGaussian,
    model: &dyn LogLikelihood,
    prior: &VariationalGaussian,
    samples: usize,
    rng: &mut Rng,
    kind: EstimatorKind,
) -> Result<ElboEstimate> {
    if samples == 0 {
        return Err(Error::param("ELBO needs at least one sample"));
    }
    let draws = expectation_gradient_samples(q, model, samples, rng, kind)?;
    let s = samples as f64;
    let mut value = 0.0;
    let mut gradient = vec![0.0; 2 * q.dim()];
    for (f, g) in &draws {
        value += f / s;
        gradient.iter_mut().zip(g).for_each(|(a, b)| *a += b / s);
    }
    value -= kl_gaussians(q, prior)?;
    gradient
        .iter_mut()
        .zip(kl_gradient(q, prior))
        .for_each(|(a, b)| *a -= b);
    Ok(ElboEstimate { value, gradient })
}

#[derive(Debug, Clone)]
pub struct ViConfig {
    pub steps: usize,
    /// Monte Carlo draws per gradient.
    pub samples: usize,
    pub kind: EstimatorKind,
    pub schedule: Schedule,
}

#[derive(Debug, Clone)]
pub struct ViFit {
    pub q: VariationalGaussian,
    /// ELBO estimate at each step, before the update.
    pub trace: Vec<f64>,
}

/// Stochastic gradient ascent on the ELBO.
pub fn vi_fit(
    model: &dyn LogLikelihood,
    prior: &VariationalGaussian,
    init: &VariationalGaussian,
    config: &ViConfig,
    mut optimizer: OptimizerState,
    rng: &mut Rng,
) -> Result<ViFit> {
    if init.dim() != prior.dim() {
        return Err(Error::shape("initial q and prior differ in dimension"));
    }
    let mut params = init.params();
    let mut trace = Vec::with_capacity(config.steps);
    for k in 0..config.steps {
        let mut last = f64::NAN;
        let mut neg_grad = |p: &[f64]| -> Result<Vec<f64>> {
            let q = VariationalGaussian::from_params(p)?;
            let est = elbo(&q, model, prior, config.samples, rng, config.kind)?;
            last = est.value;
            Ok(est.gradient.iter().map(|g| -g).collect())
        };
        let stepped = optimizer.step(&mut params, &mut neg_grad, k, &config.schedule);
        trace.push(last);
        match stepped {
            Err(Error::Divergence { .. }) | Err(Error::Model(_)) => {
                return Err(Error::ElboDivergence { iteration: k, trace });
            }
            Err(Error::Parameter(_)) if params.iter().any(|v| !v.is_finite()) => {
                return Err(Error::ElboDivergence { iteration: k, trace });
            }
            Err(e) => return Err(e),
            Ok(()) => {}
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::ElboDivergence { iteration: k, trace });
        }
    }
    Ok(ViFit {
        q: VariationalGaussian::from_params(&params)?,
        trace,
    })
}

/// Prior `θ ~ N(0, 1)`, observations `yᵢ ~ N(θ, 1)`.
#[derive(Debug, Clone)]
pub struct ConjugateGaussianToy {
    pub y: Vec<f64>,
}

impl ConjugateGaussianToy {
    pub fn new(y: Vec<f64>) -> Self {
        ConjugateGaussianToy { y }
    }

    /// Draws `n` observations around `theta`.
    pub fn sample(theta: f64, n: usize, rng: &mut Rng) -> Self {
        ConjugateGaussianToy {
            y: (0..n).map(|_| theta + rng.normal()).collect(),
        }
    }

    pub fn prior(&self) -> VariationalGaussian {
        VariationalGaussian::standard(1)
    }

    /// `N(Σy / (n+1), 1 / (n+1))`.
    pub fn posterior(&self) -> VariationalGaussian {
        let n = self.y.len() as f64;
        let sum: f64 = self.y.iter().sum();
        VariationalGaussian {
            mu: vec![sum / (n + 1.0)],
            log_sigma: vec![-0.5 * (n + 1.0).ln()],
        }
    }

    /// `log p(y)` with `y ~ N(0, I + 11ᵀ)`.
    pub fn log_evidence(&self) -> f64 {
        let n = self.y.len() as f64;
        let sum: f64 = self.y.iter().sum();
        let sq: f64 = self.y.iter().map(|v| v * v).sum();
        -0.5 * n * (2.0 * std::f64::consts::PI).ln()
            - 0.5 * (1.0 + n).ln()
            - 0.5 * (sq - sum * sum / (1.0 + n))
    }

    /// `E_q[log p(y | θ)]` in closed form.
    pub fn expected_log_likelihood(&self, q: &VariationalGaussian) -> f64 {
        let n = self.y.len() as f64;
        let (m, s2) = (q.mu[0], (2.0 * q.log_sigma[0]).exp());
        let ss: f64 = self.y.iter().map(|v| (v - m).powi(2)).sum();
        -0.5 * n * (2.0 * std::f64::consts::PI).ln() - 0.5 * (ss + n * s2)
    }

    /// ELBO without Monte Carlo error.
    pub fn exact_elbo(&self, q: &VariationalGaussian) -> Result<f64> {
        Ok(self.expected_log_likelihood(q) - kl_gaussians(q, &self.prior())?)
    }
}

impl LogLikelihood for ConjugateGaussianToy {
    fn dim(&self) -> usize {
        1
    }

    fn log_likelihood(&self, theta: &[f64]) -> Result<f64> {
        let n = self.y.len() as f64;
        Ok(-0.5 * n * (2.0 * std::f64::consts::PI).ln()
            - 0.5 * self.y.iter().map(|v| (v - theta[0]).powi(2)).sum::<f64>())
    }

    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![self.y.iter().map(|v| v - theta[0]).sum()])
    }
}

/// `f(θ) = θ²` in one dimension; `E_{N(μ,1)}[f] = μ² + 1` has gradient `2μ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadraticToy;

impl LogLikelihood for QuadraticToy {
    fn dim(&self) -> usize {
        1
    }

    fn log_likelihood(&self, theta: &[f64]) -> Result<f64> {
        Ok(theta[0] * theta[0])
    }

    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![2.0 * theta[0]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::Method;

    fn mean_and_se(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (var / n).sqrt())
    }

    #[test]
    fn kl_values() {
        let q = VariationalGaussian::new(vec![1.0], vec![0.0]).unwrap();
        let p = VariationalGaussian::standard(1);
        assert!((kl_gaussians(&q, &p).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(kl_gaussians(&p, &p).unwrap(), 0.0);
        assert!(kl_gaussians(&q, &VariationalGaussian::standard(2)).is_err());
    }

    #[test]
    fn kl_nonnegative_sweep() {
        let mut rng = Rng::new(1);
        for _ in 0..1000 {
            let mut g = || VariationalGaussian {
                mu: (0..3).map(|_| 3.0 * rng.normal()).collect(),
                log_sigma: (0..3).map(|_| rng.normal()).collect(),
            };
            let (a, b) = (g(), g());
            assert!(kl_gaussians(&a, &b).unwrap() >= 0.0);
        }
    }

    #[test]
    fn kl_gradient_matches_fd() {
        let q = VariationalGaussian::new(vec![0.3, -1.0], vec![0.2, -0.5]).unwrap();
        let p = VariationalGaussian::new(vec![1.0, 0.5], vec![-0.3, 0.4]).unwrap();
        let g = kl_gradient(&q, &p);
        let base = q.params();
        for i in 0..4 {
            let h = 1e-6;
            let mut a = base.clone();
            a[i] += h;
            let mut b = base.clone();
            b[i] -= h;
            let fd = (kl_gaussians(&VariationalGaussian::from_params(&a).unwrap(), &p).unwrap()
                - kl_gaussians(&VariationalGaussian::from_params(&b).unwrap(), &p).unwrap())
                / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn evidence_decomposition() {
        let toy = ConjugateGaussianToy::sample(0.7, 15, &mut Rng::new(2));
        for (m, l) in [(0.0, 0.0), (0.5, -1.0), (1.2, -2.0)] {
            let q = VariationalGaussian::new(vec![m], vec![l]).unwrap();
            let elbo = toy.exact_elbo(&q).unwrap();
            let kl = kl_gaussians(&q, &toy.posterior()).unwrap();
            assert!((elbo + kl - toy.log_evidence()).abs() < 1e-9);
            assert!(elbo <= toy.log_evidence());
        }
        let post = toy.posterior();
        assert!((toy.exact_elbo(&post).unwrap() - toy.log_evidence()).abs() < 1e-9);
    }

    #[test]
    fn estimators_unbiased_on_quadratic() {
        let q = VariationalGaussian::new(vec![1.5], vec![0.0]).unwrap();
        for kind in [EstimatorKind::Score, EstimatorKind::Reparam] {
            let draws =
                expectation_gradient_samples(&q, &QuadraticToy, 10_000, &mut Rng::new(3), kind)
                    .unwrap();
            let g: Vec<f64> = draws.iter().map(|(_, g)| g[0]).collect();
            let (m, se) = mean_and_se(&g);
            assert!((m - 3.0).abs() < 3.0 * se, "{kind:?}: {m} ± {se}");
        }
    }

    #[test]
    fn reparam_has_lower_variance() {
        let q = VariationalGaussian::new(vec![1.5], vec![0.0]).unwrap();
        let se = |kind| {
            let d = expectation_gradient_samples(&q, &QuadraticToy, 10_000, &mut Rng::new(4), kind)
                .unwrap();
            mean_and_se(&d.iter().map(|(_, g)| g[0]).collect::<Vec<_>>()).1
        };
        assert!(se(EstimatorKind::Reparam) <= se(EstimatorKind::Score));
    }

    #[test]
    fn fit_recovers_posterior() {
        let toy = ConjugateGaussianToy::sample(0.8, 20, &mut Rng::new(5));
        let config = ViConfig {
            steps: 3000,
            samples: 16,
            kind: EstimatorKind::Reparam,
            schedule: Schedule::new(0.02, 1e-3).unwrap(),
        };
        let fit = vi_fit(
            &toy,
            &toy.prior(),
            &VariationalGaussian::standard(1),
            &config,
            OptimizerState::new(Method::Adam, 2),
            &mut Rng::new(6),
        )
        .unwrap();
        let kl = kl_gaussians(&fit.q, &toy.posterior()).unwrap();
        assert!(kl < 1e-3, "KL {kl}, q {:?}", fit.q);
        assert_eq!(fit.trace.len(), 3000);
    }

    #[test]
    fn no_data_returns_prior() {
        let toy = ConjugateGaussianToy::new(vec![]);
        let config = ViConfig {
            steps: 2000,
            samples: 4,
            kind: EstimatorKind::Reparam,
            schedule: Schedule::constant(0.05),
        };
        let init = VariationalGaussian::new(vec![2.0], vec![-1.0]).unwrap();
        let fit = vi_fit(
            &toy,
            &toy.prior(),
            &init,
            &config,
            OptimizerState::new(Method::Sgd, 2),
            &mut Rng::new(7),
        )
        .unwrap();
        assert!(kl_gaussians(&fit.q, &toy.prior()).unwrap() < 1e-8);
    }

    #[test]
    fn non_finite_likelihood_is_model_error() {
        struct Bad;
        impl LogLikelihood for Bad {
            fn dim(&self) -> usize {
                1
            }
            fn log_likelihood(&self, _: &[f64]) -> Result<f64> {
                Ok(f64::NAN)
            }
            fn gradient(&self, _: &[f64]) -> Result<Vec<f64>> {
                Ok(vec![0.0])
            }
        }
        let q = VariationalGaussian::standard(1);
        let err = elbo(&q, &Bad, &q, 3, &mut Rng::new(1), EstimatorKind::Score).unwrap_err();
        assert!(matches!(err, Error::Model(_)));
    }
}
