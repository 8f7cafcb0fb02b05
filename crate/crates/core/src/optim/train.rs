use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{minibatch_indices, OptimizerState, Schedule};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nnet::{backprop, objective, LossSpec, Network, Penalty};
use crate::rng::Rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Fixes the one-time permutation of records before cycling.
    pub seed: u64,
    pub schedule: Schedule,
    /// Evaluate the metric hook every this many epochs.
    pub eval_every: usize,
}

impl TrainConfig {
    pub fn new(epochs: usize, batch_size: usize, seed: u64, schedule: Schedule) -> Self {
        TrainConfig {
            epochs,
            batch_size,
            seed,
            schedule,
            eval_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

/// One row of the training trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub epoch: usize,
    /// Objective divided by the number of records.
    pub objective: f64,
    pub metric: Option<Metric>,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub network: Network,
    pub trace: Vec<TraceRecord>,
    pub steps: usize,
}

pub type EvalHook<'a> = dyn FnMut(&Network, usize) -> Result<Metric> + 'a;

/// Mini-batch gradient `(1/|E|) Σ_{i∈E} ∇Lᵢ + (1/T) λ∇φ`, flattened.
///
/// Averaging it over a full cycle of batches gives the gradient of
/// `objective / T`.
pub fn batch_gradient(
    net: &Network,
    x: &Matrix,
    y: &Matrix,
    spec: &LossSpec,
    indices: &[usize],
) -> Result<Vec<f64>> {
    let total = x.cols();
    let xb = x.select_columns(indices);
    let yb = y.select_columns(indices);
    let data_spec = LossSpec {
        loss: spec.loss,
        penalty: Penalty::None,
    };
    let (_, grads) = backprop(net, &xb, &yb, &data_spec)?;
    let inv_batch = 1.0 / indices.len() as f64;
    let inv_total = 1.0 / total as f64;
    let params = net.params();
    Ok(grads
        .flatten()
        .into_iter()
        .zip(&params)
        .map(|(g, &w)| g * inv_batch + inv_total * spec.penalty.grad(w))
        .collect())
}

/// Runs `epochs × ⌈T / batch_size⌉` optimizer steps over cyclic mini-batches.
///
/// Records are permuted once (seeded) and then visited cyclically. The
/// trace holds `objective / T` after every epoch and the hook's metric every
/// `eval_every` epochs.
pub fn train(
    net: &Network,
    x: &Matrix,
    y: &Matrix,
    spec: &LossSpec,
    config: &TrainConfig,
    mut optimizer: OptimizerState,
    mut eval: Option<&mut EvalHook<'_>>,
) -> Result<TrainReport> {
    let total = x.cols();
    if total == 0 {
        return Err(Error::param("training data is empty"));
    }
    if config.epochs == 0 {
        return Err(Error::param("epochs must be at least 1"));
    }
    if config.eval_every == 0 {
        return Err(Error::param("eval_every must be at least 1"));
    }
    if y.cols() != total {
        return Err(Error::shape("inputs and targets have different record counts"));
    }
    minibatch_indices(total, config.batch_size, 0)?;

    let mut order: Vec<usize> = (0..total).collect();
    Rng::new(config.seed).shuffle(&mut order);
    let x = x.select_columns(&order);
    let y = y.select_columns(&order);

    let steps_per_epoch = total.div_ceil(config.batch_size);
    let mut current = net.clone();
    let mut params = current.params();
    if optimizer.v.len() != params.len() {
        optimizer = OptimizerState {
            v: vec![0.0; params.len()],
            c: vec![0.0; params.len()],
            ..optimizer
        };
    }
    let mut last_good = current.clone();
    let mut trace = Vec::with_capacity(config.epochs);
    let mut k = 0;
    for epoch in 1..=config.epochs {
        for _ in 0..steps_per_epoch {
            let idx = minibatch_indices(total, config.batch_size, k)?;
            let mut probe = current.clone();
            let mut grad_fn = |p: &[f64]| -> Result<Vec<f64>> {
                probe.set_params(p)?;
                batch_gradient(&probe, &x, &y, spec, &idx)
            };
            optimizer
                .step(&mut params, &mut grad_fn, k, &config.schedule)
                .map_err(|e| match e {
                    Error::Divergence { iteration, .. } => Error::Divergence {
                        iteration,
                        last_good: Some(Box::new(last_good.clone())),
                    },
                    other => other,
                })?;
            current.set_params(&params)?;
            k += 1;
        }
        let obj = objective(&current, &x, &y, spec)? / total as f64;
        if !obj.is_finite() {
            return Err(Error::Divergence {
                iteration: k,
                last_good: Some(Box::new(last_good)),
            });
        }
        last_good = current.clone();
        let metric = match eval.as_mut() {
            Some(hook) if epoch % config.eval_every == 0 => Some(hook(&current, epoch)?),
            _ => None,
        };
        trace.push(TraceRecord {
            epoch,
            objective: obj,
            metric,
        });
    }
    Ok(TrainReport {
        network: current,
        trace,
        steps: k,
    })
}

/// Trace as CSV with header `epoch,objective,metric_name,metric_value`.
pub fn write_trace_csv(trace: &[TraceRecord]) -> String {
    let mut s = String::from("epoch,objective,metric_name,metric_value\n");
    for r in trace {
        let (name, value) = match &r.metric {
            Some(m) => (m.name.as_str(), m.value.to_string()),
            None => ("", String::new()),
        };
        let _ = writeln!(s, "{},{},{},{}", r.epoch, r.objective, name, value);
    }
    s
}
