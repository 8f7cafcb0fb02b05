//! Backpropagation against central finite differences.

use deepbayes::experiments::gradient_corpus;
use deepbayes::nnet::{backprop, grad_check, Activation, LossSpec, Network};
use deepbayes::{Matrix, Rng};

fn main() -> deepbayes::Result<()> {
    let mut rng = Rng::new(3);
    let net = Network::init(4, &[(6, Activation::Tanh), (3, Activation::Softmax)], &mut rng)?;
    let x = Matrix::from_fn(4, 10, |_, _| rng.normal());
    let y = Matrix::from_fn(3, 10, |i, j| if i == j % 3 { 1.0 } else { 0.0 });
    let spec = LossSpec::cross_entropy();
    let (value, grads) = backprop(&net, &x, &y, &spec)?;
    println!("objective {value:.4}, {} gradient entries", grads.flatten().len());
    println!("max relative error vs finite differences: {:.2e}", grad_check(&net, &x, &y, &spec)?);

    println!("\ncorpus:");
    for case in gradient_corpus(0)? {
        println!("  {:20} {:.2e}", case.name, case.max_relative_error);
    }
    Ok(())
}
