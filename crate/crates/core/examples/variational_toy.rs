//! Variational inference on a conjugate Gaussian model, where the exact
//! posterior is known, plus score-function vs reparameterization gradients.

use deepbayes::bayes::EstimatorKind;
use deepbayes::experiments::{estimator_comparison, vi_toy, ViToyConfig};

fn main() -> deepbayes::Result<()> {
    for kind in [EstimatorKind::Reparam, EstimatorKind::Score] {
        let r = vi_toy(&ViToyConfig {
            estimator: kind,
            ..ViToyConfig::default()
        })?;
        println!("{} estimator", kind.name());
        println!("  fitted    mean {:.4} sd {:.4}", r.fitted.mu[0], r.fitted.sigma()[0]);
        println!("  posterior mean {:.4} sd {:.4}", r.posterior.mu[0], r.posterior.sigma()[0]);
        println!("  KL(q || posterior) {:.2e}, ELBO {:.4}, log evidence {:.4}", r.kl_to_posterior, r.elbo, r.log_evidence);
    }
    println!("\ngradient of E[x²] under N(1.5, 1), analytic value 3:");
    for e in estimator_comparison(1.5, 10_000, 0)? {
        println!("  {:8} {:.4} ± {:.4}", e.estimator, e.mean, e.se);
    }
    Ok(())
}
