use serde::{Deserialize, Serialize};

use super::{Activation, ForwardCache, Network};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// Σ ‖y − ŷ‖²
    L2,
    /// −Σ yᵀ log softmax(z); needs a softmax output layer and one-hot targets.
    CrossEntropy,
}

/// Penalty `λ φ(W, b)` over every weight and bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    None,
    L2(f64),
    L1(f64),
}

impl Penalty {
    pub fn lambda(self) -> f64 {
        match self {
            Penalty::None => 0.0,
            Penalty::L2(l) | Penalty::L1(l) => l,
        }
    }

    pub fn value(self, params: &[f64]) -> f64 {
        match self {
            Penalty::None => 0.0,
            Penalty::L2(l) => l * params.iter().map(|w| w * w).sum::<f64>(),
            Penalty::L1(l) => l * params.iter().map(|w| w.abs()).sum::<f64>(),
        }
    }

    /// Gradient of the penalty at one parameter; the L1 subgradient at 0 is 0.
    pub fn grad(self, w: f64) -> f64 {
        match self {
            Penalty::None => 0.0,
            Penalty::L2(l) => 2.0 * l * w,
            Penalty::L1(l) => {
                if w > 0.0 {
                    l
                } else if w < 0.0 {
                    -l
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub loss: Loss,
    pub penalty: Penalty,
}

impl LossSpec {
    pub fn new(loss: Loss, penalty: Penalty) -> Result<Self> {
        if penalty.lambda() < 0.0 || !penalty.lambda().is_finite() {
            return Err(Error::param(format!(
                "penalty weight must be a finite nonnegative number, got {}",
                penalty.lambda()
            )));
        }
        Ok(LossSpec { loss, penalty })
    }

    pub fn l2() -> Self {
        LossSpec {
            loss: Loss::L2,
            penalty: Penalty::None,
        }
    }

    pub fn cross_entropy() -> Self {
        LossSpec {
            loss: Loss::CrossEntropy,
            penalty: Penalty::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub w: Matrix,
    pub b: Vec<f64>,
}

/// Per-layer gradients, same layout as [`Network::params`] when flattened.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for g in &self.layers {
            out.extend_from_slice(g.w.as_slice());
            out.extend_from_slice(&g.b);
        }
        out
    }
}

fn check_targets(net: &Network, y: &Matrix, x: &Matrix, spec: &LossSpec) -> Result<()> {
    if y.rows() != net.output_dim() || y.cols() != x.cols() {
        return Err(Error::shape(format!(
            "targets are {}x{}, network produces {}x{}",
            y.rows(),
            y.cols(),
            net.output_dim(),
            x.cols()
        )));
    }
    if spec.loss == Loss::CrossEntropy {
        if net.layers().last().map(|l| l.act) != Some(Activation::Softmax) {
            return Err(Error::InputFormat(
                "cross-entropy needs a softmax output layer".into(),
            ));
        }
        for j in 0..y.cols() {
            let col = y.column(j);
            let ones = col.iter().filter(|&&v| v == 1.0).count();
            let zeros = col.iter().filter(|&&v| v == 0.0).count();
            if ones != 1 || ones + zeros != col.len() {
                return Err(Error::InputFormat(format!(
                    "cross-entropy target column {j} is not one-hot"
                )));
            }
        }
    }
    Ok(())
}

fn data_loss(cache: &ForwardCache, y: &Matrix, loss: Loss) -> f64 {
    match loss {
        Loss::L2 => cache
            .output()
            .as_slice()
            .iter()
            .zip(y.as_slice())
            .map(|(a, b)| (a - b).powi(2))
            .sum(),
        Loss::CrossEntropy => {
            let z = cache.pre.last().expect("nonempty");
            let mut total = 0.0;
            for j in 0..z.cols() {
                let m = (0..z.rows()).map(|i| z[(i, j)]).fold(f64::NEG_INFINITY, f64::max);
                let lse = m + (0..z.rows()).map(|i| (z[(i, j)] - m).exp()).sum::<f64>().ln();
                for i in 0..z.rows() {
                    if y[(i, j)] != 0.0 {
                        total -= y[(i, j)] * (z[(i, j)] - lse);
                    }
                }
            }
            total
        }
    }
}

/// Penalized negative log-posterior `Σᵢ L(yᵢ, ŷᵢ) + λ φ(W, b)`.
pub fn objective(net: &Network, x: &Matrix, y: &Matrix, spec: &LossSpec) -> Result<f64> {
    check_targets(net, y, x, spec)?;
    let cache = net.forward(x)?;
    Ok(data_loss(&cache, y, spec.loss) + spec.penalty.value(&net.params()))
}

/// Exact reverse-mode gradient of [`objective`]. Returns the objective value too.
pub fn backprop(net: &Network, x: &Matrix, y: &Matrix, spec: &LossSpec) -> Result<(f64, Gradients)> {
    check_targets(net, y, x, spec)?;
    if let Some(l) = net.layers().iter().find(|l| l.act == Activation::Heaviside) {
        return Err(Error::UnsupportedGradient(l.act.name()));
    }
    let cache = net.forward(x)?;
    let value = data_loss(&cache, y, spec.loss) + spec.penalty.value(&net.params());
    let grads = backprop_cache(net, &cache, y, spec)?;
    Ok((value, grads))
}

pub(crate) fn backprop_cache(
    net: &Network,
    cache: &ForwardCache,
    y: &Matrix,
    spec: &LossSpec,
) -> Result<Gradients> {
    let layers = net.layers();
    let last = layers.len() - 1;
    let mut grad_pre = match spec.loss {
        Loss::CrossEntropy => cache.output().sub(y)?,
        Loss::L2 => {
            let grad_out = cache.output().sub(y)?.scale(2.0);
            layers[last]
                .act
                .backward(&cache.pre[last], &cache.post[last], &grad_out)?
        }
    };
    let mut out = Vec::with_capacity(layers.len());
    for l in (0..layers.len()).rev() {
        let layer = &layers[l];
        let mut gw = grad_pre.matmul_t(&cache.inputs[l])?;
        let mut gb = grad_pre.row_sums();
        if spec.penalty != Penalty::None {
            for (g, &w) in gw.as_mut_slice().iter_mut().zip(layer.w.as_slice()) {
                *g += spec.penalty.grad(w);
            }
            for (g, &b) in gb.iter_mut().zip(&layer.b) {
                *g += spec.penalty.grad(b);
            }
        }
        out.push(LayerGrad { w: gw, b: gb });
        if l > 0 {
            let grad_input = layer.w.t_matmul(&grad_pre)?;
            grad_pre = layers[l - 1]
                .act
                .backward(&cache.pre[l - 1], &cache.post[l - 1], &grad_input)?;
        }
    }
    out.reverse();
    Ok(Gradients { layers: out })
}

/// Largest relative disagreement between [`backprop`] and central finite
/// differences (step 1e-6): `|a − n| / max(1e-8, |a| + |n|)`.
pub fn grad_check(net: &Network, x: &Matrix, y: &Matrix, spec: &LossSpec) -> Result<f64> {
    const MAX_PARAMS: usize = 2000;
    const STEP: f64 = 1e-6;
    if net.param_count() > MAX_PARAMS {
        return Err(Error::param(format!(
            "gradient check limited to {MAX_PARAMS} parameters, network has {}",
            net.param_count()
        )));
    }
    let (_, grads) = backprop(net, x, y, spec)?;
    let analytic = grads.flatten();
    let base = net.params();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for (i, &a) in analytic.iter().enumerate() {
        let mut p = base.clone();
        p[i] = base[i] + STEP;
        probe.set_params(&p)?;
        let plus = objective(&probe, x, y, spec)?;
        p[i] = base[i] - STEP;
        probe.set_params(&p)?;
        let minus = objective(&probe, x, y, spec)?;
        let numeric = (plus - minus) / (2.0 * STEP);
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}
