//! Uniform draws from high-dimensional balls: one-dimensional marginals
//! shrink like 1/(p+2) and approach a Gaussian.

use deepbayes::experiments::ball_experiment;

fn main() -> deepbayes::Result<()> {
    let e = ball_experiment(&[2, 10, 50, 100, 200, 400], 10_000, 0)?;
    println!("   p   variance   1/(p+2)    KS vs normal");
    for r in &e.rows {
        println!("{:4}  {:.6}  {:.6}  {:.4}", r.dim, r.variance, r.expected, r.ks);
    }
    let r2 = e.plane.iter().map(|(a, b)| a * a + b * b).sum::<f64>() / e.plane.len() as f64;
    println!("\nfirst two coordinates of draws from the 50-ball: mean squared radius {r2:.4}");
    Ok(())
}
