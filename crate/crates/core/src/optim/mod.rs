//! First-order optimizers, damped Newton, and the mini-batch training loop.
//!
//! Sign conventions (all methods descend):
//!
//! | method   | update |
//! |----------|--------|
//! | sgd      | `θ ← θ − t g` |
//! | momentum | `v ← μv − t g(θ)`, `θ ← θ + v` |
//! | nesterov | `v ← μv − t g(θ + μv)`, `θ ← θ + v` |
//! | adagrad  | `c ← c + g²`, `θ ← θ − t g / (√c + ε)` |
//! | rmsprop  | `c ← d c + (1−d) g²`, `θ ← θ − t g / (√c + ε)` |
//! | adam     | `v ← μv + (1−μ) g`, `c ← d c + (1−d) g²`, `θ ← θ − t v / (√c + ε)` |
//! | newton   | `θ ← θ − (H + λI)⁻¹ g` with a finite-difference Hessian |
//!
//! The rate is `t_k = a · exp(−decay · k)`.

mod newton;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use newton::{newton_minimize, newton_step, NewtonOptions, NewtonReport};
pub use train::{batch_gradient, train, write_trace_csv, EvalHook, Metric, TraceRecord, TrainConfig, TrainReport};

/// Step-size schedule `t_k = a · exp(−decay · k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub a: f64,
    pub decay: f64,
}

impl Schedule {
    pub fn new(a: f64, decay: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !(decay >= 0.0 && decay.is_finite()) {
            return Err(Error::param(format!(
                "schedule needs a > 0 and decay >= 0 (got a={a}, decay={decay})"
            )));
        }
        Ok(Schedule { a, decay })
    }

    pub fn constant(a: f64) -> Self {
        Schedule { a, decay: 0.0 }
    }

    pub fn rate(&self, k: usize) -> f64 {
        self.a * (-self.decay * k as f64).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sgd,
    Momentum,
    Nesterov,
    AdaGrad,
    /// Read as RMSprop (printed "PRMSprop" in some texts).
    RmsProp,
    Adam,
    Newton,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Sgd,
        Method::Momentum,
        Method::Nesterov,
        Method::AdaGrad,
        Method::RmsProp,
        Method::Adam,
        Method::Newton,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Sgd => "sgd",
            Method::Momentum => "momentum",
            Method::Nesterov => "nesterov",
            Method::AdaGrad => "adagrad",
            Method::RmsProp => "rmsprop",
            Method::Adam => "adam",
            Method::Newton => "newton",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::param(format!("unknown optimizer `{s}`")))
    }
}

/// Optimizer with its auxiliary state.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub method: Method,
    /// Velocity (momentum, nesterov, adam).
    pub v: Vec<f64>,
    /// Squared-gradient accumulator (adagrad, rmsprop, adam).
    pub c: Vec<f64>,
    pub mu: f64,
    pub d: f64,
    pub eps: f64,
    /// Newton damping λ.
    pub damping: f64,
}

impl OptimizerState {
    /// Defaults: μ = 0.9, d = 0.9, ε = 1e-8, λ = 0.
    pub fn new(method: Method, n_params: usize) -> Self {
        OptimizerState {
            method,
            v: vec![0.0; n_params],
            c: vec![0.0; n_params],
            mu: 0.9,
            d: 0.9,
            eps: 1e-8,
            damping: 0.0,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_d(mut self, d: f64) -> Self {
        self.d = d;
        self
    }

    pub fn with_damping(mut self, damping: f64) -> Self {
        self.damping = damping;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.v.len() != n || self.c.len() != n {
            return Err(Error::shape(format!(
                "optimizer state sized for {} parameters, got {n}",
                self.v.len()
            )));
        }
        if !(0.0..1.0).contains(&self.mu) || !(0.0..1.0).contains(&self.d) {
            return Err(Error::param("mu and d must lie in [0, 1)"));
        }
        if !(self.eps > 0.0) || self.damping < 0.0 {
            return Err(Error::param("eps must be positive and damping nonnegative"));
        }
        Ok(())
    }

    /// One update of `params` at iteration `k`.
    pub fn step(
        &mut self,
        params: &mut [f64],
        grad_fn: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
        k: usize,
        schedule: &Schedule,
    ) -> Result<()> {
        self.validate(params.len())?;
        let t = schedule.rate(k);
        let checked = |g: Vec<f64>| -> Result<Vec<f64>> {
            if g.len() != params.len() {
                return Err(Error::shape("gradient length differs from parameter count"));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence {
                    iteration: k,
                    last_good: None,
                });
            }
            Ok(g)
        };
        match self.method {
            Method::Sgd => {
                let g = checked(grad_fn(params)?)?;
                params.iter_mut().zip(&g).for_each(|(p, gi)| *p -= t * gi);
            }
            Method::Momentum => {
                let g = checked(grad_fn(params)?)?;
                for i in 0..params.len() {
                    self.v[i] = self.mu * self.v[i] - t * g[i];
                    params[i] += self.v[i];
                }
            }
            Method::Nesterov => {
                let ahead: Vec<f64> = params
                    .iter()
                    .zip(&self.v)
                    .map(|(p, v)| p + self.mu * v)
                    .collect();
                let g = checked(grad_fn(&ahead)?)?;
                for i in 0..params.len() {
                    self.v[i] = self.mu * self.v[i] - t * g[i];
                    params[i] += self.v[i];
                }
            }
            Method::AdaGrad => {
                let g = checked(grad_fn(params)?)?;
                for i in 0..params.len() {
                    self.c[i] += g[i] * g[i];
                    params[i] -= t * g[i] / (self.c[i].sqrt() + self.eps);
                }
            }
            Method::RmsProp => {
                let g = checked(grad_fn(params)?)?;
                for i in 0..params.len() {
                    self.c[i] = self.d * self.c[i] + (1.0 - self.d) * g[i] * g[i];
                    params[i] -= t * g[i] / (self.c[i].sqrt() + self.eps);
                }
            }
            Method::Adam => {
                let g = checked(grad_fn(params)?)?;
                for i in 0..params.len() {
                    self.v[i] = self.mu * self.v[i] + (1.0 - self.mu) * g[i];
                    self.c[i] = self.d * self.c[i] + (1.0 - self.d) * g[i] * g[i];
                    params[i] -= t * self.v[i] / (self.c[i].sqrt() + self.eps);
                }
            }
            Method::Newton => {
                let mut wrapped = |p: &[f64]| -> Result<Vec<f64>> { checked(grad_fn(p)?) };
                let next = newton_step(&mut wrapped, params, self.damping)?;
                params.copy_from_slice(&next);
            }
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Divergence {
                iteration: k,
                last_good: None,
            });
        }
        Ok(())
    }
}

/// Indices of mini-batch `k` (0-based): a block of `batch_size` consecutive
/// records starting where batch `k − 1` ended, wrapping modulo `total`.
pub fn minibatch_indices(total: usize, batch_size: usize, k: usize) -> Result<Vec<usize>> {
    if batch_size == 0 || batch_size > total {
        return Err(Error::param(format!(
            "batch size {batch_size} must lie in 1..={total}"
        )));
    }
    let start = ((k as u128 * batch_size as u128) % total as u128) as usize;
    Ok((0..batch_size).map(|j| (start + j) % total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_grad(p: &[f64]) -> Result<Vec<f64>> {
        Ok(p.to_vec())
    }

    #[test]
    fn minibatch_cycles() {
        let one_based = |t, b, k| -> Vec<usize> {
            minibatch_indices(t, b, k).unwrap().iter().map(|i| i + 1).collect()
        };
        assert_eq!(one_based(5, 2, 0), vec![1, 2]);
        assert_eq!(one_based(5, 2, 1), vec![3, 4]);
        assert_eq!(one_based(5, 2, 2), vec![5, 1]);
        assert_eq!(one_based(5, 2, 3), vec![2, 3]);
        let singles: Vec<usize> = (0..6).map(|k| one_based(3, 1, k)[0]).collect();
        assert_eq!(singles, vec![1, 2, 3, 1, 2, 3]);
        for k in 0..4 {
            assert_eq!(minibatch_indices(4, 4, k).unwrap(), vec![0, 1, 2, 3]);
        }
        assert!(minibatch_indices(3, 4, 0).is_err());
        assert!(minibatch_indices(3, 0, 0).is_err());
    }

    #[test]
    fn sgd_hand_step() {
        let mut st = OptimizerState::new(Method::Sgd, 1);
        let mut w = vec![1.0];
        st.step(&mut w, &mut quad_grad, 0, &Schedule::constant(0.1)).unwrap();
        assert!((w[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn momentum_without_memory_is_sgd() {
        let mut a = OptimizerState::new(Method::Momentum, 2).with_mu(0.0);
        let mut b = OptimizerState::new(Method::Sgd, 2);
        let mut wa = vec![1.0, -3.0];
        let mut wb = wa.clone();
        let mut g = |p: &[f64]| -> Result<Vec<f64>> { Ok(vec![p[0] * p[0], 2.0 * p[1] + 1.0]) };
        let sched = Schedule::new(0.05, 0.01).unwrap();
        for k in 0..50 {
            a.step(&mut wa, &mut g, k, &sched).unwrap();
            b.step(&mut wb, &mut g, k, &sched).unwrap();
            assert_eq!(wa, wb);
        }
    }

    #[test]
    fn adagrad_hand_step() {
        let mut st = OptimizerState::new(Method::AdaGrad, 1);
        let mut w = vec![1.0];
        let mut g = |_: &[f64]| -> Result<Vec<f64>> { Ok(vec![1.0]) };
        st.step(&mut w, &mut g, 0, &Schedule::constant(1.0)).unwrap();
        assert!(w[0].abs() < 1e-7);
    }

    #[test]
    fn adam_zero_gradient_is_fixed_point() {
        let mut st = OptimizerState::new(Method::Adam, 3);
        let mut w = vec![0.5, -1.0, 2.0];
        let start = w.clone();
        let mut g = |_: &[f64]| -> Result<Vec<f64>> { Ok(vec![0.0; 3]) };
        for k in 0..100 {
            st.step(&mut w, &mut g, k, &Schedule::constant(0.1)).unwrap();
        }
        assert_eq!(w, start);
    }

    #[test]
    fn non_finite_gradient_reports_iteration() {
        let mut st = OptimizerState::new(Method::Sgd, 1);
        let mut w = vec![1.0];
        let mut g = |_: &[f64]| -> Result<Vec<f64>> { Ok(vec![f64::NAN]) };
        match st.step(&mut w, &mut g, 17, &Schedule::constant(0.1)) {
            Err(Error::Divergence { iteration, .. }) => assert_eq!(iteration, 17),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn schedule_decays() {
        let s = Schedule::new(2.0, 0.5).unwrap();
        assert_eq!(s.rate(0), 2.0);
        assert!((s.rate(2) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!(Schedule::new(0.0, 0.0).is_err());
        assert!(Schedule::new(1.0, -1.0).is_err());
    }

    #[test]
    fn accumulators_stay_nonnegative() {
        for method in [Method::AdaGrad, Method::RmsProp, Method::Adam] {
            let mut st = OptimizerState::new(method, 2);
            let mut w = vec![3.0, -2.0];
            let mut g = |p: &[f64]| -> Result<Vec<f64>> { Ok(vec![p[0] - p[1], -p[1].sin()]) };
            for k in 0..200 {
                st.step(&mut w, &mut g, k, &Schedule::constant(0.05)).unwrap();
                assert!(st.c.iter().all(|&c| c >= 0.0));
            }
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::parse(m.name()).unwrap(), m);
        }
        assert!(Method::parse("lbfgs").is_err());
    }
}
