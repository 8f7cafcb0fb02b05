//! Acceptance criteria, one pass/fail line each. Runs as a plain binary so
//! the lines are always printed.

use std::time::Instant;

use deepbayes::data::{class_priors, class_labels, dcg_at_k, synth_airbnb, AGE_MISSING};
use deepbayes::experiments::{
    ball_experiment, dropout_equivalence, ensemble_jensen, estimator_comparison, gradient_corpus, identity_sweep,
    optimizer_battery, relu_partition, ridge_path, tangent_fan, vi_toy, ViToyConfig,
};
use deepbayes::geom::{count_regions, relu_regions, RegionMethod};
use deepbayes::linalg::{norm, principal_angles_deg, svd};
use deepbayes::nnet::{Activation, Layer, Network};
use deepbayes::pipeline::{run_pipeline, PipelineConfig};
use deepbayes::shallow::{autoencoder_fit, factor_fit, pca_fit, sir_fit, AutoencoderConfig, FactorNorm};
use deepbayes::{Matrix, Result, Rng};

type Check = Result<(bool, String)>;

fn dcg_values() -> Check {
    let first = dcg_at_k("FR", &["FR", "US", "DE", "NDF", "IT"], 5)?;
    let second = dcg_at_k("FR", &["US", "FR", "DE", "NDF", "IT"], 5)?;
    Ok((first == 1.0 && (second - 0.6309).abs() < 1e-4, format!("first {first}, second {second:.6}")))
}

fn seven_regions() -> Check {
    let fan = tangent_fan(3)?;
    let w = Matrix::from_rows(&fan.hyperplanes.iter().map(|(w, _)| w.clone()).collect::<Vec<_>>())?;
    let b = fan.hyperplanes.iter().map(|(_, b)| *b).collect();
    let net = Network::new(2, vec![Layer::new(w, b, Activation::Relu)?])?;
    let relu = relu_regions(&net)?;
    let random = relu_partition(3, 7, 50)?.region_count;
    let expect = [2, 4, 7, 11, 16, 22];
    let mut counts = Vec::new();
    for n in 1..=6 {
        let arr = tangent_fan(n)?;
        counts.push((count_regions(&arr, RegionMethod::Grid)?, count_regions(&arr, RegionMethod::Oracle)?));
    }
    let agree = counts.iter().zip(expect).all(|(&(g, o), e)| g == e && o == e);
    Ok((relu == 7 && random == 7 && agree, format!("relu net {relu}, random net {random}, (grid, oracle) {counts:?}")))
}

fn dropout_equivalence_check() -> Check {
    let rows = dropout_equivalence(&[0.2, 0.5, 0.8], 100_000, 11)?;
    let worst = rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    let path = ridge_path(&[0.2, 0.5, 0.8, 1.0], 5, 50, 12)?;
    let grad = path.gradient_norms.iter().copied().fold(0.0, f64::max);
    Ok((worst < 5e-3 && grad < 1e-8, format!("max relative error {worst:.2e}, stationarity {grad:.2e}")))
}

fn gradient_fidelity() -> Check {
    let cases = gradient_corpus(13)?;
    let worst = cases.iter().map(|c| c.max_relative_error).fold(0.0, f64::max);
    let names: Vec<&str> = cases.iter().map(|c| c.name.as_str()).collect();
    Ok((worst < 1e-5, format!("max error {worst:.2e} over {names:?}")))
}

fn shallow_oracles() -> Check {
    let mut rng = Rng::new(14);
    let sd = [3.0, 2.0, 0.5, 0.3, 0.1];
    let x = Matrix::from_fn(5, 200, |i, _| sd[i] * rng.normal() + i as f64);
    let ae = autoencoder_fit(&x, 2, 0.0, Activation::Identity, &AutoencoderConfig::default())?;
    let pca = pca_fit(&x, 2)?;
    let pe = pca.reconstruction_error(&x)?;
    let ae_ratio = ae.reconstruction_error / pe;
    let angles = principal_angles_deg(&ae.network.layers()[1].w, &pca.w)?;

    let z = Matrix::from_fn(8, 50, |_, _| rng.normal());
    let s = svd(&z)?;
    let mut factor_gap: f64 = 0.0;
    for k in 1..4 {
        let m = factor_fit(&z, k, 0.0, FactorNorm::L2)?;
        let exact: f64 = s.s[k..].iter().map(|v| v * v).sum();
        factor_gap = factor_gap.max((m.reconstruction_error(&z)? - exact).abs());
    }

    let n = 5000;
    let xs = Matrix::from_fn(4, n, |_, _| rng.normal());
    let y: Vec<f64> = (0..n).map(|j| xs[(0, j)]).collect();
    let d = sir_fit(&xs, &y, 10, 1)?.directions.column(0);
    let sir_angle = (d[0].abs() / norm(&d)).clamp(0.0, 1.0).acos().to_degrees();
    Ok((
        ae_ratio <= 1.01 && factor_gap < 1e-6 && sir_angle < 5.0,
        format!(
            "autoencoder/PCA error ratio {ae_ratio:.6} (angles {angles:.2?}), factor gap {factor_gap:.1e}, SIR angle {sir_angle:.3}°"
        ),
    ))
}

fn vi_recovery() -> Check {
    let r = vi_toy(&ViToyConfig::default())?;
    let est = estimator_comparison(1.5, 10_000, 15)?;
    let combined = est.iter().map(|e| e.se * e.se).sum::<f64>().sqrt();
    let agree = est.iter().all(|e| (e.mean - e.analytic).abs() < 3.0 * combined)
        && (est[0].mean - est[1].mean).abs() < 3.0 * combined;
    Ok((
        r.kl_to_posterior < 1e-3 && r.decomposition_gap < 1e-6 && agree,
        format!(
            "KL {:.2e}, ELBO + KL - log evidence {:.1e}, score {:.4}, reparam {:.4}, 2μ = 3, combined se {combined:.4}",
            r.kl_to_posterior, r.decomposition_gap, est[0].mean, est[1].mean
        ),
    ))
}

fn optimizer_check() -> Check {
    let b = optimizer_battery(200, 16)?;
    let monotone = b.runs.iter().all(|r| r.monotone);
    let rb = &b.rosenbrock;
    let rosen_ok = rb.iterations <= 100 && (rb.x[0] - 1.0).abs() < 1e-6 && (rb.x[1] - 1.0).abs() < 1e-6;
    Ok((
        monotone && b.newton_quadratic_error < 1e-8 && rosen_ok && b.minibatch_cycle_gap < 1e-12,
        format!(
            "all monotone {monotone}, newton one-step error {:.1e}, rosenbrock {} steps to {:?}, cycle gap {:.1e}",
            b.newton_quadratic_error, rb.iterations, rb.x, b.minibatch_cycle_gap
        ),
    ))
}

fn ball_geometry() -> Check {
    let e = ball_experiment(&[2, 10, 50, 100, 400], 10_000, 17)?;
    let var_ok = e
        .rows
        .iter()
        .filter(|r| r.dim != 10)
        .all(|r| (r.variance - r.expected).abs() < 3.0 * r.se);
    let ks = |p| e.rows.iter().find(|r| r.dim == p).map(|r| r.ks).unwrap_or(f64::NAN);
    let (k10, k400) = (ks(10), ks(400));
    let detail: Vec<String> = e
        .rows
        .iter()
        .map(|r| format!("p={} var {:.5}/{:.5}±{:.1e} ks {:.4}", r.dim, r.variance, r.expected, r.se, r.ks))
        .collect();
    Ok((var_ok && k400 < 0.05 && k400 < k10, detail.join("; ")))
}

fn pipeline_check() -> Check {
    let s = synth_airbnb(100_000, 18)?;
    let n = s.truth.len() as f64;
    let mut worst_share: f64 = 0.0;
    for (label, prior) in class_labels().iter().zip(class_priors()) {
        let got = s.truth.iter().filter(|t| *t == label).count() as f64 / n;
        worst_share = worst_share.max((got - prior).abs() * 100.0);
    }
    let age = s.users.numeric("age")?;
    let missing = age.iter().filter(|a| a.is_none()).count() as f64 / n;
    let r = run_pipeline(&s.users, Some(&s.sessions), &PipelineConfig::default())?;
    let trace_ok = r.trace.len() == 20 && r.trace.iter().all(|t| t.metric.is_some());
    Ok((
        worst_share < 0.5
            && (missing - AGE_MISSING).abs() < 0.005
            && r.holdout_ndcg > r.prior_ndcg
            && r.holdout_ndcg > r.random_ndcg
            && trace_ok,
        format!(
            "max share deviation {worst_share:.3} points, age missing {missing:.4}, holdout NDCG@5 {:.4} vs prior {:.4} and random {:.4}, {} epochs traced",
            r.holdout_ndcg,
            r.prior_ndcg,
            r.random_ndcg,
            r.trace.len()
        ),
    ))
}

fn jensen_check() -> Check {
    let r = ensemble_jensen(1000, 19)?;
    Ok((
        r.l2_violations == 0 && r.cross_entropy_violations == 0,
        format!(
            "{} instances, violations l2 {} cross-entropy {}, min margin {:.2e}",
            r.instances, r.l2_violations, r.cross_entropy_violations, r.min_margin
        ),
    ))
}

fn identity_check() -> Check {
    let rows = identity_sweep(10_000, 20)?;
    let worst = rows.iter().map(|r| r.max_gap).fold(0.0, f64::max);
    let names: Vec<String> = rows.iter().map(|r| format!("{} {:.1e}", r.identity, r.max_gap)).collect();
    Ok((worst < 1e-9, names.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("DCG worked values", dcg_values),
        ("seven regions and grid/oracle agreement", seven_regions),
        ("dropout marginal equivalence", dropout_equivalence_check),
        ("gradient fidelity", gradient_fidelity),
        ("shallow learner oracles", shallow_oracles),
        ("VI recovery", vi_recovery),
        ("optimizer battery", optimizer_check),
        ("ball geometry", ball_geometry),
        ("end-to-end pipeline", pipeline_check),
        ("ensemble Jensen bound", jensen_check),
        ("identity sweep", identity_check),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {:2} {}: {name} ({:.1}s) {detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
