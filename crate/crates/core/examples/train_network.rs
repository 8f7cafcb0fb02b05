//! Training a small classifier with each first-order optimizer.

use deepbayes::geom::{gen_dataset2d, DatasetKind};
use deepbayes::nnet::{Activation, LossSpec, Network};
use deepbayes::optim::{train, Method, OptimizerState, Schedule, TrainConfig};
use deepbayes::{Matrix, Rng};

fn main() -> deepbayes::Result<()> {
    let data = gen_dataset2d(DatasetKind::Circle, 300, 0.1, 0)?;
    let y = Matrix::from_fn(2, data.labels.len(), |i, j| f64::from(u8::from(data.labels[j] == i)));
    let init = Network::init(2, &[(8, Activation::Tanh), (2, Activation::Softmax)], &mut Rng::new(1))?;
    for method in [Method::Sgd, Method::Momentum, Method::Nesterov, Method::AdaGrad, Method::RmsProp, Method::Adam] {
        let rate = if matches!(method, Method::Sgd | Method::Momentum | Method::Nesterov) { 0.1 } else { 0.02 };
        let config = TrainConfig::new(100, 32, 0, Schedule::constant(rate));
        let state = OptimizerState::new(method, init.param_count());
        let r = train(&init, &data.points, &y, &LossSpec::cross_entropy(), &config, state, None)?;
        let pred = r.network.predict(&data.points)?;
        let hits = (0..pred.cols()).filter(|&j| (pred[(1, j)] > 0.5) == (data.labels[j] == 1)).count();
        println!(
            "{:9} final objective {:.4}  training accuracy {:.3}",
            method.name(),
            r.trace.last().map_or(f64::NAN, |t| t.objective),
            hits as f64 / pred.cols() as f64
        );
    }
    Ok(())
}
