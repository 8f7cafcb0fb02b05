//! PCA, a linear autoencoder, PLS, sliced inverse regression and factor models.

use deepbayes::linalg::{norm, principal_angles_deg};
use deepbayes::nnet::Activation;
use deepbayes::shallow::{autoencoder_fit, factor_fit, pca_fit, pls_fit, sir_fit, AutoencoderConfig, FactorNorm};
use deepbayes::{Matrix, Rng};

fn main() -> deepbayes::Result<()> {
    let mut rng = Rng::new(9);
    let sd = [3.0, 2.0, 0.5, 0.3, 0.1];
    let x = Matrix::from_fn(5, 300, |i, _| sd[i] * rng.normal());

    let pca = pca_fit(&x, 2)?;
    let ae = autoencoder_fit(&x, 2, 0.0, Activation::Identity, &AutoencoderConfig::default())?;
    println!("PCA reconstruction error         {:.4}", pca.reconstruction_error(&x)?);
    println!("linear autoencoder reconstruction {:.4}", ae.reconstruction_error);
    println!("angles between subspaces (deg)    {:.3?}", principal_angles_deg(&ae.network.layers()[1].w, &pca.w)?);

    let y = Matrix::from_fn(1, 300, |_, j| 2.0 * x[(0, j)] - x[(2, j)] + 0.1 * rng.normal());
    let pls = pls_fit(&x, &y, 2)?;
    let resid = pls.fitted()?.sub(&y)?.sum_sq() / y.sum_sq();
    println!("PLS with 2 components, relative residual {resid:.4}");

    let n = 2000;
    let xs = Matrix::from_fn(4, n, |_, _| rng.normal());
    let ys: Vec<f64> = (0..n).map(|j| (xs[(1, j)]).powi(3) + 0.1 * rng.normal()).collect();
    let d = sir_fit(&xs, &ys, 10, 1)?.directions.column(0);
    println!("SIR direction {:.3?} (truth e2), cosine {:.4}", d, d[1].abs() / norm(&d));

    for lambda in [0.0, 1.0, 10.0] {
        let f = factor_fit(&x, 2, lambda, FactorNorm::L1)?;
        println!("factor model, lambda {lambda:4}: error {:.3} in {} sweeps", f.reconstruction_error(&x)?, f.sweeps);
    }
    Ok(())
}
