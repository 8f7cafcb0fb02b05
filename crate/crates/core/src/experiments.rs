//! Reproducible experiment drivers returning plain result structs. The CLI
//! turns them into CSV tables and figures.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bayes::{
    dropout_marginal_gradient, dropout_marginal_objective, dropout_mc_objective, expectation_gradient_samples,
    gprior_ridge_solve, kl_gaussians, vi_fit, ConjugateGaussianToy, EstimatorKind, QuadraticToy,
    VariationalGaussian, ViConfig,
};
use crate::error::{Error, Result};
use crate::geom::{
    ball_sample, cart_fit, count_regions, gen_dataset2d, ks_statistic, project, sign_pattern, Arrangement, BallSpec,
    DatasetKind, Grid2, RegionMethod,
};
use crate::identities::{verify_identity, IdentityKind};
use crate::linalg::{norm, solve_spd, Matrix};
use crate::nnet::{backprop, Activation, LossSpec, Network, Penalty};
use crate::optim::{
    batch_gradient, minibatch_indices, newton_minimize, newton_step, train, Method, NewtonOptions, NewtonReport,
    OptimizerState, Schedule, TrainConfig,
};
use crate::rng::Rng;

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallRow {
    pub dim: usize,
    /// Sample variance of the first coordinate of unit-ball draws.
    pub variance: f64,
    /// `1 / (p + 2)`.
    pub expected: f64,
    /// Standard error of `variance`.
    pub se: f64,
    /// KS distance to N(0,1) after scaling by `√(p+2)`.
    pub ks: f64,
}

#[derive(Debug, Clone)]
pub struct BallExperiment {
    pub rows: Vec<BallRow>,
    /// First-coordinate draws per dimension.
    pub projections: Vec<(usize, Vec<f64>)>,
    /// First two coordinates of draws from the 50-ball.
    pub plane: Vec<(f64, f64)>,
}

/// Marginal variance and normality of uniform draws from `B_p`.
pub fn ball_experiment(dims: &[usize], n: usize, seed: u64) -> Result<BallExperiment> {
    if n < 2 {
        return Err(Error::param("need at least two samples"));
    }
    let root = Rng::new(seed);
    let normal = statrs::distribution::Normal::new(0.0, 1.0).expect("standard normal");
    let mut rows = Vec::new();
    let mut projections = Vec::new();
    for (i, &p) in dims.iter().enumerate() {
        if p < 2 {
            return Err(Error::param(format!("dimension must be at least 2, got {p}")));
        }
        let y = ball_sample(BallSpec::unit(p)?, n, &mut root.child(i as u64))?;
        let mut e1 = vec![0.0; p];
        e1[0] = 1.0;
        let proj = project(&y, &e1)?;
        let m = proj.iter().sum::<f64>() / n as f64;
        let variance = proj.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        let m4 = proj.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n as f64;
        let scale = ((p + 2) as f64).sqrt();
        let scaled: Vec<f64> = proj.iter().map(|v| v * scale).collect();
        use statrs::distribution::ContinuousCDF;
        rows.push(BallRow {
            dim: p,
            variance,
            expected: 1.0 / (p + 2) as f64,
            se: ((m4 - variance * variance).max(0.0) / n as f64).sqrt(),
            ks: ks_statistic(&scaled, |t| normal.cdf(t)),
        });
        projections.push((p, proj));
    }
    let y50 = ball_sample(BallSpec::unit(50)?, 1000, &mut root.child(u64::MAX))?;
    let plane = (0..y50.cols()).map(|j| (y50[(0, j)], y50[(1, j)])).collect();
    Ok(BallExperiment {
        rows,
        projections,
        plane,
    })
}

#[derive(Debug, Clone)]
pub struct PartitionReport {
    pub arrangement: Arrangement,
    /// Regions of the whole plane.
    pub region_count: usize,
    /// Regions met by the grid over `[−5, 5]²`.
    pub grid_count: usize,
    /// Sign pattern per display cell, rows from the bottom.
    pub raster: Vec<Vec<u64>>,
    pub range: (f64, f64),
}

/// A first layer of `neurons` ReLU units with standard normal weights and
/// biases, and the activation regions it cuts out of the plane.
pub fn relu_partition(neurons: usize, seed: u64, resolution: usize) -> Result<PartitionReport> {
    if neurons == 0 || neurons > 64 {
        return Err(Error::param(format!("neurons must lie in 1..=64, got {neurons}")));
    }
    if resolution < 2 {
        return Err(Error::param("resolution must be at least 2"));
    }
    let mut rng = Rng::new(seed);
    let planes = (0..neurons)
        .map(|_| (vec![rng.normal(), rng.normal()], rng.normal()))
        .collect();
    let arrangement = Arrangement::new(2, planes)?;
    let range = (-5.0, 5.0);
    let grid = Grid2::square(range.0, range.1, resolution);
    let raster = (0..resolution)
        .map(|i| {
            (0..resolution)
                .map(|j| sign_pattern(&arrangement.hyperplanes, &grid.point(i, j)))
                .collect()
        })
        .collect();
    Ok(PartitionReport {
        region_count: count_regions(&arrangement, RegionMethod::Oracle)?,
        grid_count: count_regions(&arrangement, RegionMethod::Grid)?,
        arrangement,
        raster,
        range,
    })
}

#[derive(Debug, Clone)]
pub struct TreeVsNetwork {
    pub kind: DatasetKind,
    pub points: Vec<(f64, f64)>,
    pub labels: Vec<usize>,
    pub tree_accuracy: f64,
    pub tree_leaves: usize,
    pub network_accuracy: f64,
    /// Predicted class per cell, rows from the bottom.
    pub tree_raster: Vec<Vec<u64>>,
    pub network_raster: Vec<Vec<u64>>,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

/// Width of the second tanh layer used for each dataset.
pub fn tanh_width(kind: DatasetKind) -> usize {
    match kind {
        DatasetKind::Simple => 2,
        DatasetKind::Circle => 3,
        DatasetKind::Spiral => 4,
    }
}

/// Decision regions of a depth-limited CART and of the tanh network
/// `softmax(W⁰ tanh(W² tanh(W¹x + b¹) + b²) + b⁰)` on one toy dataset.
pub fn tree_vs_network(
    kind: DatasetKind,
    n: usize,
    noise: f64,
    seed: u64,
    max_depth: usize,
    epochs: usize,
    resolution: usize,
) -> Result<TreeVsNetwork> {
    let data = gen_dataset2d(kind, n, noise, seed)?;
    let x = &data.points;
    let tree = cart_fit(x, &data.labels, max_depth, 1)?;
    let mut rng = Rng::new(seed).child(1);
    let net = Network::init(
        2,
        &[(2, Activation::Tanh), (tanh_width(kind), Activation::Tanh), (2, Activation::Softmax)],
        &mut rng,
    )?;
    let mut y = Matrix::zeros(2, n);
    data.labels.iter().enumerate().for_each(|(j, &c)| y[(c, j)] = 1.0);
    let config = TrainConfig::new(epochs, n.min(32), seed, Schedule::constant(0.02));
    let fit = train(
        &net,
        x,
        &y,
        &LossSpec::cross_entropy(),
        &config,
        OptimizerState::new(Method::Adam, net.param_count()).with_d(0.999),
        None,
    )?;
    let argmax = |col: &[f64]| usize::from(col[1] > col[0]);
    let probs = fit.network.predict(x)?;
    let network_accuracy =
        (0..n).filter(|&j| argmax(&probs.column(j)) == data.labels[j]).count() as f64 / n as f64;

    let pad = |v: &[f64]| {
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
        let m = 0.1 * (hi - lo).max(1e-9);
        (lo - m, hi + m)
    };
    let (x_range, y_range) = (pad(x.row(0)), pad(x.row(1)));
    let grid = Grid2 {
        x_lo: x_range.0,
        x_hi: x_range.1,
        y_lo: y_range.0,
        y_hi: y_range.1,
        resolution,
    };
    let mut cells = Matrix::zeros(2, resolution * resolution);
    for i in 0..resolution {
        for j in 0..resolution {
            let p = grid.point(i, j);
            cells[(0, i * resolution + j)] = p[0];
            cells[(1, i * resolution + j)] = p[1];
        }
    }
    let grid_probs = fit.network.predict(&cells)?;
    let tree_raster = (0..resolution)
        .map(|i| (0..resolution).map(|j| tree.predict(&grid.point(i, j)) as u64).collect())
        .collect();
    let network_raster = (0..resolution)
        .map(|i| {
            (0..resolution)
                .map(|j| argmax(&grid_probs.column(i * resolution + j)) as u64)
                .collect()
        })
        .collect();
    Ok(TreeVsNetwork {
        kind,
        points: (0..n).map(|j| (x[(0, j)], x[(1, j)])).collect(),
        labels: data.labels.clone(),
        tree_accuracy: tree.accuracy(x, &data.labels),
        tree_leaves: tree.leaves().len(),
        network_accuracy,
        tree_raster,
        network_raster,
        x_range,
        y_range,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropoutRow {
    pub p: f64,
    pub monte_carlo: f64,
    pub se: f64,
    pub closed_form: f64,
    pub relative_error: f64,
}

/// Monte Carlo dropout loss against its closed form on a random instance
/// (`W` 2×3, `X` 3×8, `Y` 2×8) for each keep-probability.
pub fn dropout_equivalence(p_values: &[f64], masks: usize, seed: u64) -> Result<Vec<DropoutRow>> {
    let root = Rng::new(seed);
    p_values
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut rng = root.child(i as u64);
            let mut draw = |r, c| Matrix::from_fn(r, c, |_, _| rng.normal());
            let (w, x, y) = (draw(2, 3), draw(3, 8), draw(2, 8));
            let closed_form = dropout_marginal_objective(&w, &x, &y, p)?;
            let (monte_carlo, se) = dropout_mc_objective(&w, &x, &y, p, masks, &mut rng)?;
            Ok(DropoutRow {
                p,
                monte_carlo,
                se,
                closed_form,
                relative_error: (monte_carlo - closed_form).abs() / closed_form,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RidgePath {
    pub p_values: Vec<f64>,
    /// Coefficients at each `p`.
    pub coefficients: Vec<Vec<f64>>,
    /// ‖∇‖ of the marginal objective at each solution.
    pub gradient_norms: Vec<f64>,
}

/// g-prior ridge solutions over `p` for a random regression with `dim`
/// features and `n` records.
pub fn ridge_path(p_values: &[f64], dim: usize, n: usize, seed: u64) -> Result<RidgePath> {
    let mut rng = Rng::new(seed);
    let x = Matrix::from_fn(dim, n, |_, _| rng.normal());
    let beta: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
    let y: Vec<f64> = (0..n)
        .map(|j| (0..dim).map(|i| beta[i] * x[(i, j)]).sum::<f64>() + 0.5 * rng.normal())
        .collect();
    let ym = Matrix::from_vec(1, n, y.clone())?;
    let mut coefficients = Vec::new();
    let mut gradient_norms = Vec::new();
    for &p in p_values {
        let w = gprior_ridge_solve(&x, &y, p)?;
        let g = dropout_marginal_gradient(&Matrix::from_vec(1, dim, w.clone())?, &x, &ym, p)?;
        gradient_norms.push(norm(g.as_slice()));
        coefficients.push(w);
    }
    Ok(RidgePath {
        p_values: p_values.to_vec(),
        coefficients,
        gradient_norms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorRow {
    pub estimator: String,
    pub samples: usize,
    pub mean: f64,
    pub se: f64,
    pub analytic: f64,
}

/// Score and reparametrization estimates of `∂/∂μ E_{N(μ,1)}[θ²] = 2μ`.
pub fn estimator_comparison(mu: f64, samples: usize, seed: u64) -> Result<Vec<EstimatorRow>> {
    let q = VariationalGaussian::new(vec![mu], vec![0.0])?;
    [EstimatorKind::Score, EstimatorKind::Reparam]
        .into_iter()
        .enumerate()
        .map(|(i, kind)| {
            let draws =
                expectation_gradient_samples(&q, &QuadraticToy, samples, &mut Rng::new(seed).child(i as u64), kind)?;
            let (mean, se) = mean_se(&draws.iter().map(|(_, g)| g[0]).collect::<Vec<_>>());
            Ok(EstimatorRow {
                estimator: kind.name().into(),
                samples,
                mean,
                se,
                analytic: 2.0 * mu,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ViToyConfig {
    pub n: usize,
    pub theta: f64,
    pub steps: usize,
    pub samples: usize,
    pub estimator: EstimatorKind,
    pub learning_rate: f64,
    pub decay: f64,
    pub seed: u64,
}

impl Default for ViToyConfig {
    fn default() -> Self {
        ViToyConfig {
            n: 20,
            theta: 0.8,
            steps: 3000,
            samples: 16,
            estimator: EstimatorKind::Reparam,
            learning_rate: 0.02,
            decay: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ViToyReport {
    pub fitted: VariationalGaussian,
    pub posterior: VariationalGaussian,
    pub kl_to_posterior: f64,
    pub log_evidence: f64,
    /// Exact ELBO of the fitted q.
    pub elbo: f64,
    /// `|ELBO(q) + KL(q‖posterior) − log evidence|`.
    pub decomposition_gap: f64,
    /// ELBO estimate per step.
    pub trace: Vec<f64>,
}

/// Mean-field Gaussian VI on the conjugate model `θ ~ N(0,1)`,
/// `yᵢ ~ N(θ,1)`, fitted with Adam.
pub fn vi_toy(config: &ViToyConfig) -> Result<ViToyReport> {
    let root = Rng::new(config.seed);
    let toy = ConjugateGaussianToy::sample(config.theta, config.n, &mut root.child(0));
    let fit = vi_fit(
        &toy,
        &toy.prior(),
        &VariationalGaussian::standard(1),
        &ViConfig {
            steps: config.steps,
            samples: config.samples,
            kind: config.estimator,
            schedule: Schedule::new(config.learning_rate, config.decay)?,
        },
        OptimizerState::new(Method::Adam, 2),
        &mut root.child(1),
    )?;
    let posterior = toy.posterior();
    let kl_to_posterior = kl_gaussians(&fit.q, &posterior)?;
    let elbo = toy.exact_elbo(&fit.q)?;
    let log_evidence = toy.log_evidence();
    Ok(ViToyReport {
        decomposition_gap: (elbo + kl_to_posterior - log_evidence).abs(),
        fitted: fit.q,
        posterior,
        kl_to_posterior,
        log_evidence,
        elbo,
        trace: fit.trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRow {
    pub identity: String,
    pub samples: usize,
    /// Largest `|lhs − rhs| / (1 + |lhs|)`.
    pub max_gap: f64,
}

/// Every identity at `n` uniform points of `[−5, 5]^d`; the max-sum chain
/// uses random lengths up to 10.
pub fn identity_sweep(n: usize, seed: u64) -> Result<Vec<IdentityRow>> {
    let root = Rng::new(seed);
    IdentityKind::ALL
        .into_iter()
        .enumerate()
        .map(|(i, kind)| {
            let mut rng = root.child(i as u64);
            let mut max_gap: f64 = 0.0;
            for _ in 0..n {
                let len = if kind == IdentityKind::MaxSum { 1 + rng.below(10) } else { 2 };
                let x: Vec<f64> = (0..len).map(|_| rng.uniform_range(-5.0, 5.0)).collect();
                max_gap = max_gap.max(verify_identity(kind, &x)?.relative_gap());
            }
            Ok(IdentityRow {
                identity: kind.name().into(),
                samples: n,
                max_gap,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JensenReport {
    pub instances: usize,
    pub l2_violations: usize,
    pub cross_entropy_violations: usize,
    /// Smallest `mean individual loss − loss of the average` seen.
    pub min_margin: f64,
}

/// Loss of the uniform ensemble average against the mean member loss, for
/// random ensembles of 2 to 8 members.
pub fn ensemble_jensen(instances: usize, seed: u64) -> Result<JensenReport> {
    let mut rng = Rng::new(seed);
    let (mut l2_bad, mut ce_bad, mut margin) = (0, 0, f64::INFINITY);
    for _ in 0..instances {
        let members = 2 + rng.below(7);
        let (classes, n) = (2 + rng.below(5), 1 + rng.below(6));
        let preds: Vec<Matrix> = (0..members)
            .map(|_| Matrix::from_fn(classes, n, |_, _| rng.normal()))
            .collect();
        let truth = Matrix::from_fn(classes, n, |_, _| rng.normal());
        let avg = crate::bayes::ensemble_average(&preds, None)?;
        let l2 = |p: &Matrix| p.sub(&truth).map(|m| m.sum_sq());
        let mean_l2 = preds.iter().map(l2).sum::<Result<f64>>()? / members as f64;
        let gap = mean_l2 - l2(&avg)?;
        margin = margin.min(gap);
        l2_bad += usize::from(gap < -1e-12 * mean_l2.max(1.0));

        let probs: Vec<Matrix> = preds.iter().map(crate::nnet::softmax_columns).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.below(classes)).collect();
        let ce = |p: &Matrix| -> f64 { labels.iter().enumerate().map(|(j, &c)| -p[(c, j)].ln()).sum() };
        let mean_ce = probs.iter().map(ce).sum::<f64>() / members as f64;
        let gap = mean_ce - ce(&crate::bayes::ensemble_average(&probs, None)?);
        margin = margin.min(gap);
        ce_bad += usize::from(gap < -1e-12 * mean_ce.max(1.0));
    }
    Ok(JensenReport {
        instances,
        l2_violations: l2_bad,
        cross_entropy_violations: ce_bad,
        min_margin: margin,
    })
}

#[derive(Debug, Clone)]
pub struct GradientCase {
    pub name: String,
    pub max_relative_error: f64,
}

/// `grad_check` over a fixed corpus of architectures, losses and penalties.
pub fn gradient_corpus(seed: u64) -> Result<Vec<GradientCase>> {
    use Activation::*;
    let mut rng = Rng::new(seed);
    let cases: Vec<(&str, usize, Vec<(usize, Activation)>, LossSpec, usize)> = vec![
        ("identity-l2", 3, vec![(2, Identity)], LossSpec::l2(), 5),
        (
            "tanh-2-2-2-softmax",
            2,
            vec![(2, Tanh), (2, Tanh), (2, Softmax)],
            LossSpec::cross_entropy(),
            6,
        ),
        (
            "relu-8-8-softmax12",
            10,
            vec![(8, Relu), (8, Relu), (12, Softmax)],
            LossSpec::cross_entropy(),
            6,
        ),
        ("sigmoid-l2-ridge", 4, vec![(5, Sigmoid), (3, Identity)], LossSpec::new(crate::nnet::Loss::L2, Penalty::L2(0.1))?, 5),
        ("tanh-relu-l1", 3, vec![(4, Tanh), (4, Relu), (2, Identity)], LossSpec::new(crate::nnet::Loss::L2, Penalty::L1(0.05))?, 5),
        ("softmax-l2", 3, vec![(4, Tanh), (3, Softmax)], LossSpec::l2(), 4),
    ];
    cases
        .into_iter()
        .map(|(name, p, widths, spec, n)| {
            let net = Network::init(p, &widths, &mut rng)?;
            let x = Matrix::from_fn(p, n, |_, _| rng.normal());
            let out = net.output_dim();
            let y = if spec.loss == crate::nnet::Loss::CrossEntropy {
                let mut y = Matrix::zeros(out, n);
                (0..n).for_each(|j| y[(rng.below(out), j)] = 1.0);
                y
            } else {
                Matrix::from_fn(out, n, |_, _| rng.normal())
            };
            Ok(GradientCase {
                name: name.into(),
                max_relative_error: crate::nnet::grad_check(&net, &x, &y, &spec)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct OptimizerRun {
    pub method: Method,
    pub learning_rate: f64,
    /// Objective before each step and after the last.
    pub trace: Vec<f64>,
    /// Each step lowers the objective until it reaches the minimum to
    /// rounding.
    pub monotone: bool,
}

#[derive(Debug, Clone)]
pub struct OptimizerBattery {
    pub runs: Vec<OptimizerRun>,
    /// Minimum value of the quadratic.
    pub f_star: f64,
    /// ‖x₁ − x*‖ after one undamped Newton step on the quadratic.
    pub newton_quadratic_error: f64,
    pub rosenbrock: NewtonReport,
    /// Largest gap between the cycle-averaged mini-batch gradient and the
    /// full gradient.
    pub minibatch_cycle_gap: f64,
}

/// Rate used for each first-order method on a quadratic with largest
/// eigenvalue `l`.
pub fn battery_rate(method: Method, l: f64) -> f64 {
    match method {
        // heavy ball with μ = 0.5 stays overshoot-free for t·L ≤ (1 − √μ)²
        Method::Momentum | Method::Nesterov => 0.08 / l,
        Method::Sgd => 0.5 / l,
        _ => 0.01,
    }
}

/// Every method on `f(x) = ½xᵀAx − bᵀx` with `A` of eigenvalues in [1, 4],
/// damped Newton on Rosenbrock, and the mini-batch cycle identity.
pub fn optimizer_battery(steps: usize, seed: u64) -> Result<OptimizerBattery> {
    let dim = 6;
    let mut rng = Rng::new(seed);
    let q = crate::linalg::svd(&Matrix::from_fn(dim, dim, |_, _| rng.normal()))?.u;
    let eig: Vec<f64> = (0..dim).map(|i| 1.0 + 3.0 * i as f64 / (dim - 1) as f64).collect();
    let a = q.matmul(&Matrix::from_diag(&eig))?.matmul_t(&q)?;
    let b: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
    let x_star = solve_spd(&a, &b)?;
    let x0: Vec<f64> = x_star.iter().map(|v| v + 3.0 * rng.normal()).collect();
    let f = |x: &[f64]| -> f64 {
        let ax = a.matvec(x).expect("conformable");
        0.5 * crate::linalg::dot(x, &ax) - crate::linalg::dot(&b, x)
    };
    let grad = |x: &[f64]| -> Result<Vec<f64>> { Ok(a.matvec(x)?.iter().zip(&b).map(|(u, v)| u - v).collect()) };

    let f_star = f(&x_star);
    let mut runs = Vec::new();
    for method in Method::ALL {
        if method == Method::Newton {
            continue;
        }
        let t = battery_rate(method, 4.0);
        let mut state = OptimizerState::new(method, dim);
        if matches!(method, Method::Momentum | Method::Nesterov) {
            state = state.with_mu(0.5);
        }
        let schedule = Schedule::constant(t);
        let mut x = x0.clone();
        let mut trace = vec![f(&x)];
        for k in 0..steps {
            state.step(&mut x, &mut |p| grad(p), k, &schedule)?;
            trace.push(f(&x));
        }
        runs.push(OptimizerRun {
            method,
            learning_rate: t,
            monotone: trace.windows(2).all(|w| w[1] < w[0] || w[0] - f_star <= 1e-12 * (1.0 + f_star.abs())),
            trace,
        });
    }
    let x1 = newton_step(&mut |p| grad(p), &x0, 0.0)?;
    let newton_quadratic_error = norm(&x1.iter().zip(&x_star).map(|(u, v)| u - v).collect::<Vec<_>>());
    let rosenbrock = newton_minimize(
        &mut |x| Ok((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)),
        &mut |x| {
            Ok(vec![
                -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]),
                200.0 * (x[1] - x[0] * x[0]),
            ])
        },
        &[-1.2, 1.0],
        NewtonOptions::default(),
    )?;
    Ok(OptimizerBattery {
        runs,
        f_star,
        newton_quadratic_error,
        rosenbrock,
        minibatch_cycle_gap: minibatch_cycle_gap(seed)?,
    })
}

/// Averages the mini-batch gradient over `lcm(T, B) / B` consecutive batches,
/// which visits every record equally often, and compares with the full
/// gradient of `objective / T`.
pub fn minibatch_cycle_gap(seed: u64) -> Result<f64> {
    let mut rng = Rng::new(seed);
    let (total, batch) = (12, 8);
    let net = Network::init(3, &[(4, Activation::Tanh), (2, Activation::Identity)], &mut rng)?;
    let x = Matrix::from_fn(3, total, |_, _| rng.normal());
    let y = Matrix::from_fn(2, total, |_, _| rng.normal());
    let spec = LossSpec::new(crate::nnet::Loss::L2, Penalty::L2(0.2))?;
    let gcd = |mut a: usize, mut b: usize| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    };
    let cycle = total / gcd(total, batch);
    let mut avg = vec![0.0; net.param_count()];
    for k in 0..cycle {
        let g = batch_gradient(&net, &x, &y, &spec, &minibatch_indices(total, batch, k)?)?;
        avg.iter_mut().zip(g).for_each(|(a, g)| *a += g / cycle as f64);
    }
    let (_, full) = backprop(&net, &x, &y, &spec)?;
    Ok(avg
        .iter()
        .zip(full.flatten())
        .map(|(a, f)| (a - f / total as f64).abs())
        .fold(0.0, f64::max))
}

/// Angles `0.1 + kπ/n`: `n` lines tangent to the unit circle in general
/// position.
pub fn tangent_fan(n: usize) -> Result<Arrangement> {
    let angles: Vec<f64> = (0..n).map(|k| 0.1 + k as f64 * PI / n as f64).collect();
    Arrangement::tangent_lines(1.0, &angles)
}
