//! Monte Carlo dropout predictions and ensemble averaging.

use deepbayes::bayes::{ensemble_average, mc_dropout_predict, DropoutSpec};
use deepbayes::experiments::ensemble_jensen;
use deepbayes::nnet::{Activation, Network};
use deepbayes::{Matrix, Rng};

fn main() -> deepbayes::Result<()> {
    let mut rng = Rng::new(5);
    let net = Network::init(3, &[(16, Activation::Relu), (1, Activation::Identity)], &mut rng)?;
    let x = Matrix::from_fn(3, 4, |i, j| (i + j) as f64 * 0.5 - 1.0);
    let (mean, var) = mc_dropout_predict(&net, &DropoutSpec::new(vec![1.0, 0.8])?, &x, 2000, &mut rng)?;
    let plain = net.predict(&x)?;
    for j in 0..x.cols() {
        println!(
            "input {j}: deterministic {:7.4}  dropout mean {:7.4}  sd {:.4}",
            plain[(0, j)],
            mean[(0, j)],
            var[(0, j)].sqrt()
        );
    }

    let members: Vec<Matrix> = (0..5)
        .map(|_| Network::init(3, &[(8, Activation::Tanh), (1, Activation::Identity)], &mut rng)?.predict(&x))
        .collect::<deepbayes::Result<_>>()?;
    println!("ensemble of 5: {:.4?}", ensemble_average(&members, None)?.row(0));

    let j = ensemble_jensen(1000, 0)?;
    println!(
        "ensemble loss never above mean member loss: {} l2 and {} cross-entropy violations in {} trials",
        j.l2_violations, j.cross_entropy_violations, j.instances
    );
    Ok(())
}
