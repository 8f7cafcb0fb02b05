use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nnet::{backprop, objective, Activation, Loss, LossSpec, Network, Penalty};
use crate::optim::{
    newton_minimize, train, Method, NewtonOptions, OptimizerState, Schedule, TraceRecord,
    TrainConfig,
};
use crate::rng::Rng;

#[derive(Debug, Clone)]
pub struct AutoencoderConfig {
    pub epochs: usize,
    /// Full batch when `None`.
    pub batch_size: Option<usize>,
    pub learning_rate: f64,
    pub seed: u64,
    /// Newton polishing iterations after Adam; 0 disables.
    pub newton_iters: usize,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        AutoencoderConfig {
            epochs: 2000,
            batch_size: None,
            learning_rate: 0.01,
            seed: 0,
            newton_iters: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AutoencoderFit {
    /// Encoder `K × p` with the chosen activation, identity decoder `p × K`.
    pub network: Network,
    /// `‖X − F_W(X)‖²`.
    pub reconstruction_error: f64,
    /// Split objective at the encoder's own codes.
    pub split_objective: f64,
    pub trace: Vec<TraceRecord>,
}

/// `‖X − W₂Z − b₂‖² + λφ(Z) + ‖Z − f(W₁X + b₁)‖²` for given codes `Z`.
///
/// `φ` is the squared norm; `net` must be a two-layer autoencoder.
pub fn split_objective(net: &Network, x: &Matrix, z: &Matrix, lambda: f64) -> Result<f64> {
    let [enc, dec] = net.layers() else {
        return Err(Error::shape("split objective needs a two-layer network"));
    };
    let mut decoded = dec.w.matmul(z)?;
    decoded.add_column_broadcast(&dec.b);
    let encoded = enc.act.apply(&enc.affine(x)?);
    Ok(x.sub(&decoded)?.sum_sq() + lambda * z.sum_sq() + z.sub(&encoded)?.sum_sq())
}

/// Fits `X ≈ F_W(X)` through a `K`-unit bottleneck, penalty `λ‖W, b‖²`.
///
/// Adam on the full objective, then damped Newton polishing when the
/// parameter count allows it. `K = p` is accepted (the identity is then
/// attainable with an identity encoder).
pub fn autoencoder_fit(
    x: &Matrix,
    k: usize,
    lambda: f64,
    activation: Activation,
    config: &AutoencoderConfig,
) -> Result<AutoencoderFit> {
    let (p, n) = x.shape();
    if k == 0 || k > p {
        return Err(Error::param(format!("bottleneck K = {k} must lie in 1..={p}")));
    }
    if matches!(activation, Activation::Softmax | Activation::Heaviside) {
        return Err(Error::param(format!("{} cannot be an encoder activation", activation.name())));
    }
    let penalty = if lambda == 0.0 { Penalty::None } else { Penalty::L2(lambda) };
    let spec = LossSpec::new(Loss::L2, penalty)?;
    let mut rng = Rng::new(config.seed);
    let net = Network::init(p, &[(k, activation), (p, Activation::Identity)], &mut rng)?;
    let tc = TrainConfig::new(
        config.epochs,
        config.batch_size.unwrap_or(n).min(n),
        config.seed,
        Schedule::new(config.learning_rate, 0.0)?,
    );
    let opt = OptimizerState::new(Method::Adam, net.param_count());
    let report = train(&net, x, x, &spec, &tc, opt, None)?;
    let mut network = report.network;

    if config.newton_iters > 0 && network.param_count() <= 500 {
        let template = network.clone();
        let mut f = |w: &[f64]| objective(&template.with_params(w)?, x, x, &spec);
        let mut g = |w: &[f64]| -> Result<Vec<f64>> {
            Ok(backprop(&template.with_params(w)?, x, x, &spec)?.1.flatten())
        };
        let opts = NewtonOptions {
            max_iter: config.newton_iters,
            ..NewtonOptions::default()
        };
        let start = objective(&network, x, x, &spec)?;
        let polished = newton_minimize(&mut f, &mut g, &network.params(), opts)?;
        if f(&polished.x)? <= start {
            network.set_params(&polished.x)?;
        }
    }

    let recon = network.predict(x)?;
    let enc = &network.layers()[0];
    let z = enc.act.apply(&enc.affine(x)?);
    Ok(AutoencoderFit {
        reconstruction_error: x.sub(&recon)?.sum_sq(),
        split_objective: split_objective(&network, x, &z, lambda)?,
        network,
        trace: report.trace,
    })
}
