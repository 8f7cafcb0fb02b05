//! End-to-end destination ranking on synthetic Airbnb-style data.
//!
//! Pass a user count as the first argument (default 20000).

use deepbayes::data::synth_airbnb;
use deepbayes::pipeline::{run_pipeline, PipelineConfig};

fn main() -> deepbayes::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20_000);
    let s = synth_airbnb(n, 0)?;
    println!("{} users, {} session rows", s.users.n_rows(), s.sessions.n_rows());
    let r = run_pipeline(&s.users, Some(&s.sessions), &PipelineConfig::default())?;
    println!("{} features, {} classes, {} holdout users", r.feature_names.len(), r.classes.len(), r.split.holdout.len());
    for t in &r.trace {
        let m = t.metric.as_ref().map_or(f64::NAN, |m| m.value);
        println!("epoch {:2}  objective {:.4}  holdout NDCG@5 {:.4}", t.epoch, t.objective, m);
    }
    println!("network {:.4}  class-frequency ranking {:.4}  random {:.4}", r.holdout_ndcg, r.prior_ndcg, r.random_ndcg);
    for a in &r.accuracy {
        println!("top-{} accuracy {:.4}", a.k, a.overall);
    }
    Ok(())
}
