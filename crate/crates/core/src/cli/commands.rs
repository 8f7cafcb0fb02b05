use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::RunDir;
use crate::bayes::EstimatorKind;
use crate::data::{
    accuracy_report_csv, class_labels, class_priors, ndcg, ndcg_by_class, ndcg_report_csv, synth_airbnb,
    topk_accuracy, Table,
};
use crate::error::{Error, Result};
use crate::experiments::{
    ball_experiment, dropout_equivalence, estimator_comparison, identity_sweep, optimizer_battery, relu_partition,
    ridge_path, tree_vs_network, vi_toy as run_vi_toy, ViToyConfig,
};
use crate::figure::Figure;
use crate::geom::DatasetKind;
use crate::optim::write_trace_csv;
use crate::pipeline::{rankings_csv, read_rankings_csv, run_pipeline, PipelineConfig};

fn table_csv<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::InputFormat(e.to_string()))?)
        .map_err(|e| Error::InputFormat(e.to_string()))
}

fn summary_csv(rows: &[(&str, String)]) -> String {
    let mut s = String::from("quantity,value\n");
    for (k, v) in rows {
        let _ = writeln!(s, "{k},{v}");
    }
    s
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthArgs {
    pub n_users: usize,
    pub seed: u64,
}

impl Default for SynthArgs {
    fn default() -> Self {
        SynthArgs { n_users: 10_000, seed: 0 }
    }
}

pub fn synth(command: &str, args: SynthArgs, mut dir: RunDir) -> Result<RunDir> {
    dir.resolved(command, &args)?;
    let s = synth_airbnb(args.n_users, args.seed)?;
    dir.write("users.csv", s.users.to_csv_string()?)?;
    dir.write("sessions.csv", s.sessions.to_csv_string()?)?;
    let mut shares = String::from("class,prior,empirical\n");
    for (label, prior) in class_labels().iter().zip(class_priors()) {
        let got = s.truth.iter().filter(|t| *t == label).count() as f64 / s.truth.len() as f64;
        let _ = writeln!(shares, "{label},{prior},{got}");
    }
    dir.write("class_shares.csv", shares)?;
    println!("{} users, {} sessions", s.users.n_rows(), s.sessions.n_rows());
    Ok(dir)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainArgs {
    /// Users CSV; when empty, `synth_users` synthetic users are generated.
    pub users: String,
    /// Optional raw sessions CSV.
    pub sessions: String,
    pub synth_users: usize,
    pub id_column: String,
    pub label_column: String,
    pub holdout_frac: f64,
    pub stratify: bool,
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub k: usize,
    pub seed: u64,
}

impl Default for TrainArgs {
    fn default() -> Self {
        let p = PipelineConfig::default();
        TrainArgs {
            users: String::new(),
            sessions: String::new(),
            synth_users: 0,
            id_column: p.id_column,
            label_column: p.label_column,
            holdout_frac: p.holdout_frac,
            stratify: p.stratify,
            hidden: p.hidden,
            epochs: p.epochs,
            batch_size: p.batch_size,
            learning_rate: p.learning_rate,
            k: p.k,
            seed: p.seed,
        }
    }
}

pub fn train(command: &str, args: TrainArgs, mut dir: RunDir) -> Result<RunDir> {
    let (users, sessions) = match (args.users.is_empty(), args.synth_users) {
        (false, _) => (
            Table::read_csv(&args.users)?,
            if args.sessions.is_empty() {
                None
            } else {
                Some(Table::read_csv(&args.sessions)?)
            },
        ),
        (true, 0) => return Err(Error::Config("set `users` to a CSV path or `synth_users` > 0".into())),
        (true, n) => {
            let s = synth_airbnb(n, args.seed)?;
            (s.users, Some(s.sessions))
        }
    };
    dir.resolved(command, &args)?;
    let config = PipelineConfig {
        id_column: args.id_column,
        label_column: args.label_column,
        holdout_frac: args.holdout_frac,
        stratify: args.stratify,
        hidden: args.hidden,
        epochs: args.epochs,
        batch_size: args.batch_size,
        learning_rate: args.learning_rate,
        k: args.k,
        seed: args.seed,
    };
    let r = run_pipeline(&users, sessions.as_ref(), &config)?;
    dir.write("trace.csv", write_trace_csv(&r.trace))?;
    let curve: Vec<(f64, f64)> = r
        .trace
        .iter()
        .filter_map(|t| t.metric.as_ref().map(|m| (t.epoch as f64, m.value)))
        .collect();
    let flat = |v: f64| curve.iter().map(|&(e, _)| (e, v)).collect::<Vec<_>>();
    dir.figure(
        "ndcg_trace",
        &Figure::Lines {
            title: format!("holdout NDCG@{}", config.k),
            x_label: "epoch".into(),
            y_label: "NDCG".into(),
            series: vec![
                ("network".into(), curve.clone()),
                ("prior ranker".into(), flat(r.prior_ndcg)),
                ("uniform random".into(), flat(r.random_ndcg)),
            ],
        },
    )?;
    dir.write("holdout_rankings.csv", rankings_csv(&r.holdout_truth, &r.holdout_rankings, config.k)?)?;
    dir.write("ndcg_by_destination.csv", ndcg_report_csv(&r.ndcg_by_class, r.holdout_ndcg))?;
    dir.write("accuracy.csv", accuracy_report_csv(&r.accuracy))?;
    dir.write("model.json", r.network.to_json())?;
    dir.write(
        "summary.csv",
        summary_csv(&[
            ("holdout_ndcg", r.holdout_ndcg.to_string()),
            ("prior_ndcg", r.prior_ndcg.to_string()),
            ("random_ndcg", r.random_ndcg.to_string()),
            ("train_records", r.split.train.len().to_string()),
            ("holdout_records", r.split.holdout.len().to_string()),
            ("features", r.feature_names.len().to_string()),
        ]),
    )?;
    println!(
        "holdout NDCG@{k} = {:.4} (prior ranker {:.4}, uniform random {:.4})",
        r.holdout_ndcg,
        r.prior_ndcg,
        r.random_ndcg,
        k = config.k
    );
    Ok(dir)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluateArgs {
    /// CSV with columns `truth,rank_1,…`.
    pub predictions: String,
    pub k: usize,
}

impl Default for EvaluateArgs {
    fn default() -> Self {
        EvaluateArgs {
            predictions: String::new(),
            k: 5,
        }
    }
}

pub fn evaluate(command: &str, args: EvaluateArgs, mut dir: RunDir) -> Result<RunDir> {
    if args.predictions.is_empty() {
        return Err(Error::Config("`predictions` must name a rankings CSV".into()));
    }
    let (truth, lists) = read_rankings_csv(&std::fs::read_to_string(&args.predictions)?)?;
    dir.resolved(command, &args)?;
    let score = ndcg(&truth, &lists, args.k)?;
    let accuracy = (1..=3.min(args.k))
        .map(|j| topk_accuracy(&truth, &lists, j))
        .collect::<Result<Vec<_>>>()?;
    dir.write("ndcg_by_destination.csv", ndcg_report_csv(&ndcg_by_class(&truth, &lists, args.k)?, score))?;
    dir.write("accuracy.csv", accuracy_report_csv(&accuracy))?;
    dir.write(
        "summary.csv",
        summary_csv(&[("ndcg", score.to_string()), ("records", truth.len().to_string())]),
    )?;
    println!("NDCG@{} = {score:.4} over {} records", args.k, truth.len());
    Ok(dir)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BallArgs {
    pub dims: Vec<usize>,
    pub n: usize,
    pub bins: usize,
    pub seed: u64,
}

impl Default for BallArgs {
    fn default() -> Self {
        BallArgs {
            dims: vec![2, 10, 50, 100, 200, 300, 400],
            n: 10_000,
            bins: 50,
            seed: 0,
        }
    }
}

pub fn ball(command: &str, args: BallArgs, mut dir: RunDir) -> Result<RunDir> {
    dir.resolved(command, &args)?;
    let e = ball_experiment(&args.dims, args.n, args.seed)?;
    dir.write("ball_marginals.csv", table_csv(&e.rows)?)?;
    dir.figure(
        "ball50_plane",
        &Figure::Scatter {
            title: "first two coordinates of uniform draws from the 50-ball".into(),
            groups: vec![0; e.plane.len()],
            points: e.plane.clone(),
        },
    )?;
    for (p, proj) in &e.projections {
        dir.figure(
            &format!("marginal_p{p}"),
            &Figure::Histogram {
                title: format!("first coordinate, p = {p}"),
                values: proj.clone(),
                bins: args.bins,
            },
        )?;
    }
    dir.figure(
        "ks_by_dimension",
        &Figure::Lines {
            title: "KS distance to N(0,1) after scaling".into(),
            x_label: "dimension".into(),
            y_label: "KS".into(),
            series: vec![("ks".into(), e.rows.iter().map(|r| (r.dim as f64, r.ks)).collect())],
        },
    )?;
    for r in &e.rows {
        println!("p = {:4}: variance {:.6} (1/(p+2) = {:.6}), KS {:.4}", r.dim, r.variance, r.expected, r.ks);
    }
    Ok(dir)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PartitionArgs {
    pub neurons: usize,
    pub resolution: usize,
    /// Toy datasets for the tree vs network comparison.
    pub datasets: Vec<String>,
    pub n: usize,
    pub noise: f64,
    pub max_depth: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for PartitionArgs {
    fn default() -> Self {
        PartitionArgs {
            neurons: 3,
            resolution: 200,
            datasets: DatasetKind::ALL.iter().map(|k| k.name().to_string()).collect(),
            n: 200,
            noise: 0.1,
            max_depth: 4,
            epochs: 300,
            seed: 0,
        }
    }
}

pub fn partition(command: &str, args: PartitionArgs, mut dir: RunDir) -> Result<RunDir> {
    let kinds = args
        .datasets
        .iter()
        .map(|name| {
            DatasetKind::ALL
                .into_iter()
                .find(|k| k.name() == name)
                .ok_or_else(|| Error::Config(format!("unknown dataset `{name}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    dir.resolved(command, &args)?;
    let r = relu_partition(args.neurons, args.seed, args.resolution)?;
    let mut planes = String::from("w1,w2,b\n");
    for (w, b) in &r.arrangement.hyperplanes {
        let _ = writeln!(planes, "{},{},{b}", w[0], w[1]);
    }
    dir.write("hyperplanes.csv", planes)?;
    dir.write(
        "regions.csv",
        summary_csv(&[
            ("neurons", args.neurons.to_string()),
            ("region_count", r.region_count.to_string()),
            ("grid_region_count", r.grid_count.to_string()),
        ]),
    )?;
    dir.figure(
        "relu_regions",
        &Figure::Raster {
            title: format!("{} ReLU neurons: {} regions", args.neurons, r.region_count),
            cells: r.raster.clone(),
            x_range: r.range,
            y_range: r.range,
        },
    )?;
    println!("region_count = {}", r.region_count);
    println!("grid_region_count = {} (window [-5, 5]^2)", r.grid_count);

    let mut acc = String::from("dataset,tree_accuracy,tree_leaves,network_accuracy\n");
    for kind in kinds {
        let t = tree_vs_network(kind, args.n, args.noise, args.seed, args.max_depth, args.epochs, args.resolution / 2)?;
        let name = kind.name();
        let _ = writeln!(acc, "{name},{},{},{}", t.tree_accuracy, t.tree_leaves, t.network_accuracy);
        dir.figure(
            &format!("data_{name}"),
            &Figure::Scatter {
                title: format!("{name} data"),
                points: t.points.clone(),
                groups: t.labels.clone(),
            },
        )?;
        for (label, cells) in [("tree", &t.tree_raster), ("network", &t.network_raster)] {
            dir.figure(
                &format!("{label}_{name}"),
                &Figure::Raster {
                    title: format!("{label} partition, {name} data"),
                    cells: cells.clone(),
                    x_range: t.x_range,
                    y_range: t.y_range,
                },
            )?;
        }
    }
    dir.write("partition_accuracy.csv", acc)?;
    Ok(dir)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DropoutRidgeArgs {
    pub p_values: Vec<f64>,
    pub masks: usize,
    /// Keep-probabilities on the ridge path.
    pub path_points: usize,
    pub dim: usize,
    pub n: usize,
    pub seed: u64,
}

impl Default for DropoutRidgeArgs {
    fn default() -> Self {
        DropoutRidgeArgs {
            p_values: vec![0.2, 0.5, 0.8],
            masks: 100_000,
            path_points: 20,
            dim: 5,
            n: 50,
            seed: 0,
        }
    }
}

pub fn dropout_ridge(command: &str, args: DropoutRidgeArgs, mut dir: RunDir) -> Result<RunDir> {
    if args.path_points < 2 {
        return Err(Error::Config("path_points must be at least 2".into()));
    }
    dir.resolved(command, &args)?;
    let rows = dropout_equivalence(&args.p_values, args.masks, args.seed)?;
    dir.write("dropout_equivalence.csv", table_csv(&rows)?)?;
    let ps: Vec<f64> = (1..=args.path_points).map(|i| i as f64 / args.path_points as f64).collect();
    let path = ridge_path(&ps, args.dim, args.n, args.seed)?;
    let mut csv = String::from("p");
    (1..=args.dim).for_each(|i| {
        let _ = write!(csv, ",w{i}");
    });
    csv.push_str(",gradient_norm\n");
    for ((p, w), g) in path.p_values.iter().zip(&path.coefficients).zip(&path.gradient_norms) {
        let ws: Vec<String> = w.iter().map(f64::to_string).collect();
        let _ = writeln!(csv, "{p},{},{g}", ws.join(","));
    }
    dir.write("ridge_path.csv", csv)?;
    dir.figure(
        "ridge_path",
        &Figure::Lines {
            title: "g-prior ridge coefficients against keep-probability".into(),
            x_label: "p".into(),
            y_label: "coefficient".into(),
            series: (0..args.dim)
                .map(|i| {
                    (
                        format!("w{}", i + 1),
                        path.p_values.iter().zip(&path.coefficients).map(|(p, w)| (*p, w[i])).collect(),
                    )
                })
                .collect(),
        },
    )?;
    for r in &rows {
        println!(
            "p = {}: Monte Carlo {:.5} ± {:.5}, closed form {:.5}, relative error {:.2e}",
            r.p, r.monte_carlo, r.se, r.closed_form, r.relative_error
        );
    }
    let worst = path.gradient_norms.iter().copied().fold(0.0, f64::max);
    println!("largest stationarity gradient norm on the ridge path: {worst:.2e}");
    Ok(dir)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ViToyArgs {
    pub n: usize,
    pub theta: f64,
    pub steps: usize,
    pub samples: usize,
    pub estimator: EstimatorKind,
    pub learning_rate: f64,
    pub decay: f64,
    /// Draws for the gradient estimator comparison.
    pub gradient_samples: usize,
    /// Mean of q in the estimator comparison.
    pub mu: f64,
    pub seed: u64,
}

impl Default for ViToyArgs {
    fn default() -> Self {
        let v = ViToyConfig::default();
        ViToyArgs {
            n: v.n,
            theta: v.theta,
            steps: v.steps,
            samples: v.samples,
            estimator: v.estimator,
            learning_rate: v.learning_rate,
            decay: v.decay,
            gradient_samples: 10_000,
            mu: 1.5,
            seed: v.seed,
        }
    }
}

pub fn vi_toy(command: &str, args: ViToyArgs, mut dir: RunDir) -> Result<RunDir> {
    dir.resolved(command, &args)?;
    let r = run_vi_toy(&ViToyConfig {
        n: args.n,
        theta: args.theta,
        steps: args.steps,
        samples: args.samples,
        estimator: args.estimator,
        learning_rate: args.learning_rate,
        decay: args.decay,
        seed: args.seed,
    })?;
    dir.write(
        "vi_summary.csv",
        summary_csv(&[
            ("q_mu", r.fitted.mu[0].to_string()),
            ("q_sigma", r.fitted.sigma()[0].to_string()),
            ("posterior_mu", r.posterior.mu[0].to_string()),
            ("posterior_sigma", r.posterior.sigma()[0].to_string()),
            ("kl_to_posterior", r.kl_to_posterior.to_string()),
            ("elbo", r.elbo.to_string()),
            ("log_evidence", r.log_evidence.to_string()),
            ("decomposition_gap", r.decomposition_gap.to_string()),
        ]),
    )?;
    dir.figure(
        "elbo_trace",
        &Figure::Lines {
            title: "ELBO estimate".into(),
            x_label: "step".into(),
            y_label: "ELBO".into(),
            series: vec![("elbo".into(), r.trace.iter().enumerate().map(|(i, v)| (i as f64, *v)).collect())],
        },
    )?;
    let est = estimator_comparison(args.mu, args.gradient_samples, args.seed)?;
    dir.write("gradient_estimators.csv", table_csv(&est)?)?;
    println!(
        "q = N({:.4}, {:.4}²), posterior N({:.4}, {:.4}²), KL {:.2e}",
        r.fitted.mu[0],
        r.fitted.sigma()[0],
        r.posterior.mu[0],
        r.posterior.sigma()[0],
        r.kl_to_posterior
    );
    for e in &est {
        println!("{} estimator: {:.4} ± {:.4} (analytic {})", e.estimator, e.mean, e.se, e.analytic);
    }
    Ok(dir)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentitiesArgs {
    pub n: usize,
    pub seed: u64,
}

impl Default for IdentitiesArgs {
    fn default() -> Self {
        IdentitiesArgs { n: 10_000, seed: 0 }
    }
}

pub fn identities(command: &str, args: IdentitiesArgs, mut dir: RunDir) -> Result<RunDir> {
    dir.resolved(command, &args)?;
    let rows = identity_sweep(args.n, args.seed)?;
    dir.write("identities.csv", table_csv(&rows)?)?;
    for r in &rows {
        println!("{:16} max relative gap {:.2e} over {} inputs", r.identity, r.max_gap, r.samples);
    }
    Ok(dir)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptzooArgs {
    pub steps: usize,
    pub seed: u64,
}

impl Default for OptzooArgs {
    fn default() -> Self {
        OptzooArgs { steps: 200, seed: 0 }
    }
}

pub fn optzoo(command: &str, args: OptzooArgs, mut dir: RunDir) -> Result<RunDir> {
    dir.resolved(command, &args)?;
    let b = optimizer_battery(args.steps, args.seed)?;
    let mut csv = String::from("method,learning_rate,monotone,initial_gap,final_gap\n");
    for r in &b.runs {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.method.name(),
            r.learning_rate,
            r.monotone,
            r.trace[0] - b.f_star,
            r.trace.last().expect("nonempty trace") - b.f_star
        );
    }
    dir.write("optimizers.csv", csv)?;
    dir.figure(
        "optimizer_traces",
        &Figure::Lines {
            title: "log10 suboptimality on a quadratic".into(),
            x_label: "step".into(),
            y_label: "log10(f - f*)".into(),
            series: b
                .runs
                .iter()
                .map(|r| {
                    (
                        r.method.name().to_string(),
                        r.trace
                            .iter()
                            .enumerate()
                            .map(|(k, f)| (k as f64, (f - b.f_star).max(1e-16).log10()))
                            .collect(),
                    )
                })
                .collect(),
        },
    )?;
    dir.write(
        "newton.csv",
        summary_csv(&[
            ("quadratic_one_step_error", b.newton_quadratic_error.to_string()),
            ("rosenbrock_iterations", b.rosenbrock.iterations.to_string()),
            ("rosenbrock_x1", b.rosenbrock.x[0].to_string()),
            ("rosenbrock_x2", b.rosenbrock.x[1].to_string()),
            ("minibatch_cycle_gap", b.minibatch_cycle_gap.to_string()),
        ]),
    )?;
    for r in &b.runs {
        println!("{:9} monotone {}", r.method.name(), r.monotone);
    }
    println!(
        "newton: quadratic error {:.1e}, rosenbrock solved in {} steps",
        b.newton_quadratic_error, b.rosenbrock.iterations
    );
    Ok(dir)
}
