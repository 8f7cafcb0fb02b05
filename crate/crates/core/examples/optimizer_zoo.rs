//! First-order optimizers and Newton's method on a quadratic and on Rosenbrock.

use deepbayes::experiments::optimizer_battery;
use deepbayes::optim::{newton_minimize, NewtonOptions};

fn main() -> deepbayes::Result<()> {
    let b = optimizer_battery(200, 0)?;
    println!("quadratic minimum f* = {:.6}", b.f_star);
    for run in &b.runs {
        let last = run.trace.last().copied().unwrap_or(f64::NAN);
        println!(
            "{:9} rate {:.4}  final gap {:.3e}  monotone {}",
            run.method.name(),
            run.learning_rate,
            last - b.f_star,
            run.monotone
        );
    }
    println!("one Newton step on the quadratic misses the minimizer by {:.1e}", b.newton_quadratic_error);
    println!("mini-batch cycle gradient gap {:.1e}", b.minibatch_cycle_gap);

    let mut f = |x: &[f64]| Ok((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
    let mut g = |x: &[f64]| {
        Ok(vec![
            -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]),
            200.0 * (x[1] - x[0] * x[0]),
        ])
    };
    let r = newton_minimize(&mut f, &mut g, &[-1.2, 1.0], NewtonOptions::default())?;
    println!("Rosenbrock from (-1.2, 1): {:?} after {} iterations", r.x, r.iterations);
    Ok(())
}
