//! Dropout on a linear model equals a ridge penalty with a g-prior scale.

use deepbayes::experiments::{dropout_equivalence, ridge_path};

fn main() -> deepbayes::Result<()> {
    println!("p     monte carlo        closed form   rel. error");
    for r in dropout_equivalence(&[0.2, 0.5, 0.8], 50_000, 0)? {
        println!("{:.1}  {:10.4} ± {:.4}  {:10.4}   {:.1e}", r.p, r.monte_carlo, r.se, r.closed_form, r.relative_error);
    }
    let path = ridge_path(&[0.1, 0.3, 0.5, 0.7, 0.9, 1.0], 3, 50, 0)?;
    println!("\nridge path (keep probability, coefficients, stationarity):");
    for ((p, beta), g) in path.p_values.iter().zip(&path.coefficients).zip(&path.gradient_norms) {
        println!("{p:.1}  {beta:.4?}  {g:.1e}");
    }
    Ok(())
}
