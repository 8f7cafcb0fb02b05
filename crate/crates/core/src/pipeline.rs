//! Tabular destination ranking: feature engineering, a two-hidden-layer
//! ReLU/softmax classifier trained with AdaGrad, and NDCG evaluation.

use serde::{Deserialize, Serialize};

use crate::data::{
    attach_sessions, holdout_split, ndcg, ndcg_by_class, one_hot, rank_labels, session_features, topk_accuracy,
    uniform_random_ndcg, Column, ColumnData, Split, Table, TopkAccuracy,
};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nnet::{Activation, LossSpec, Network};
use crate::optim::{train, Method, Metric, OptimizerState, Schedule, TraceRecord, TrainConfig};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub id_column: String,
    pub label_column: String,
    pub holdout_frac: f64,
    pub stratify: bool,
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Ranked list length for NDCG.
    pub k: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            id_column: "id".into(),
            label_column: "country_destination".into(),
            holdout_frac: 0.1,
            stratify: true,
            hidden: vec![64, 64],
            epochs: 20,
            batch_size: 256,
            learning_rate: 0.05,
            k: 5,
            seed: 0,
        }
    }
}

/// Numeric design matrix built from a users table.
#[derive(Debug, Clone)]
pub struct Features {
    /// Features × records.
    pub x: Matrix,
    pub names: Vec<String>,
}

/// Turns `users` (plus optional raw `sessions`) into numeric features.
///
/// Session aggregates are joined on `id_column`, the id and label columns
/// are dropped, categoricals are one-hot encoded and a numeric column with
/// missing cells is filled with 0 and followed by a `col_missing` indicator.
pub fn build_features(users: &Table, sessions: Option<&Table>, id_column: &str, label_column: &str) -> Result<Features> {
    let mut t = users.clone();
    if t.index_of(label_column).is_some() {
        t.drop_column(label_column)?;
    }
    if let Some(s) = sessions {
        t = attach_sessions(&t, id_column, &session_features(s)?)?;
    }
    t.drop_column(id_column)?;
    let names: Vec<String> = t.names().iter().map(|s| s.to_string()).collect();
    for name in &names {
        t = match &t.column(name)?.data {
            ColumnData::Categorical(_) => one_hot(&t, name)?,
            ColumnData::Numeric(v) if v.iter().any(Option::is_none) => {
                let filled = v.iter().map(|x| Some(x.unwrap_or(0.0))).collect();
                let flag = v.iter().map(|x| Some(if x.is_none() { 1.0 } else { 0.0 })).collect();
                let mut out = t.clone();
                out.splice(
                    name,
                    vec![Column::numeric(name.clone(), filled), Column::numeric(format!("{name}_missing"), flag)],
                )?;
                out
            }
            ColumnData::Numeric(_) => continue,
        };
    }
    let rows: Vec<Vec<f64>> = t
        .columns()
        .iter()
        .map(|c| match &c.data {
            ColumnData::Numeric(v) => v.iter().map(|x| x.unwrap_or(0.0)).collect(),
            ColumnData::Categorical(_) => unreachable!("categoricals were encoded"),
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::Schema("no feature columns left".into()));
    }
    Ok(Features {
        x: Matrix::from_rows(&rows)?,
        names: t.names().iter().map(|s| s.to_string()).collect(),
    })
}

/// Per-feature affine map to zero mean and unit variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Constant features get scale 1.
    pub fn fit(x: &Matrix) -> Standardizer {
        let n = x.cols() as f64;
        let mean = x.row_means();
        let scale = (0..x.rows())
            .map(|i| {
                let v = x.row(i).iter().map(|a| (a - mean[i]).powi(2)).sum::<f64>() / n;
                if v > 1e-24 {
                    v.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.rows() != self.mean.len() {
            return Err(Error::shape("feature count differs from the fitted standardizer"));
        }
        Ok(Matrix::from_fn(x.rows(), x.cols(), |i, j| (x[(i, j)] - self.mean[i]) / self.scale[i]))
    }
}

/// One-hot targets (classes × records). Unknown labels are an input error.
pub fn encode_labels(labels: &[String], classes: &[String]) -> Result<Matrix> {
    let mut y = Matrix::zeros(classes.len(), labels.len());
    for (j, l) in labels.iter().enumerate() {
        let c = classes
            .iter()
            .position(|c| c == l)
            .ok_or_else(|| Error::InputFormat(format!("unknown class label `{l}`")))?;
        y[(c, j)] = 1.0;
    }
    Ok(y)
}

/// Top-`k` labels per record by predicted probability.
pub fn predict_rankings(net: &Network, x: &Matrix, classes: &[String], k: usize) -> Result<Vec<Vec<String>>> {
    let p = net.predict(x)?;
    Ok((0..p.cols()).map(|j| rank_labels(classes, &p.column(j), k)).collect())
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub network: Network,
    pub standardizer: Standardizer,
    pub classes: Vec<String>,
    pub feature_names: Vec<String>,
    pub split: Split,
    /// Per epoch: training objective per record and holdout NDCG@k.
    pub trace: Vec<TraceRecord>,
    pub holdout_truth: Vec<String>,
    pub holdout_rankings: Vec<Vec<String>>,
    pub holdout_ndcg: f64,
    /// Same list for every record: classes by training frequency.
    pub prior_ranking: Vec<String>,
    pub prior_ndcg: f64,
    pub random_ndcg: f64,
    /// Top-1, top-2 and top-3 accuracy on the holdout.
    pub accuracy: Vec<TopkAccuracy>,
    pub ndcg_by_class: Vec<(String, usize, f64)>,
}

/// Fits the ranking classifier on a stratified split of `users` and scores
/// the holdout against the prior-frequency and uniform-random rankers.
pub fn run_pipeline(users: &Table, sessions: Option<&Table>, config: &PipelineConfig) -> Result<PipelineReport> {
    if config.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let labels: Vec<String> = users
        .categorical(&config.label_column)?
        .iter()
        .enumerate()
        .map(|(i, l)| l.clone().ok_or_else(|| Error::InputFormat(format!("row {} has no label", i + 1))))
        .collect::<Result<_>>()?;
    let mut classes = labels.clone();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::InputFormat("need at least two classes".into()));
    }
    let features = build_features(users, sessions, &config.id_column, &config.label_column)?;
    let split = holdout_split(
        labels.len(),
        config.holdout_frac,
        config.seed,
        config.stratify.then_some(labels.as_slice()),
    )?;
    if split.train.is_empty() || split.holdout.is_empty() {
        return Err(Error::InputFormat("split leaves an empty side".into()));
    }
    let pick = |idx: &[usize]| idx.iter().map(|&i| labels[i].clone()).collect::<Vec<_>>();
    let (train_labels, hold_labels) = (pick(&split.train), pick(&split.holdout));
    let x_train_raw = features.x.select_columns(&split.train);
    let standardizer = Standardizer::fit(&x_train_raw);
    let x_train = standardizer.apply(&x_train_raw)?;
    let x_hold = standardizer.apply(&features.x.select_columns(&split.holdout))?;
    let y_train = encode_labels(&train_labels, &classes)?;

    let mut widths: Vec<(usize, Activation)> = config.hidden.iter().map(|&w| (w, Activation::Relu)).collect();
    widths.push((classes.len(), Activation::Softmax));
    let mut rng = Rng::new(config.seed).child(1);
    let net = Network::init(x_train.rows(), &widths, &mut rng)?;
    let mut train_cfg = TrainConfig::new(
        config.epochs,
        config.batch_size.min(split.train.len()),
        crate::rng::child_seed(config.seed, 2),
        Schedule::constant(config.learning_rate),
    );
    train_cfg.eval_every = 1;
    let optimizer = OptimizerState::new(Method::AdaGrad, net.param_count());
    let k = config.k;
    let mut hook = |n: &Network, _epoch: usize| -> Result<Metric> {
        let r = predict_rankings(n, &x_hold, &classes, k)?;
        Ok(Metric {
            name: format!("holdout_ndcg@{k}"),
            value: ndcg(&hold_labels, &r, k)?,
        })
    };
    let report = train(&net, &x_train, &y_train, &LossSpec::cross_entropy(), &train_cfg, optimizer, Some(&mut hook))?;

    let rankings = predict_rankings(&report.network, &x_hold, &classes, k)?;
    let freq: Vec<f64> = classes
        .iter()
        .map(|c| train_labels.iter().filter(|l| *l == c).count() as f64)
        .collect();
    let prior_ranking = rank_labels(&classes, &freq, k);
    let prior_lists = vec![prior_ranking.clone(); hold_labels.len()];
    let accuracy = (1..=3.min(k))
        .map(|j| topk_accuracy(&hold_labels, &rankings, j))
        .collect::<Result<_>>()?;
    Ok(PipelineReport {
        holdout_ndcg: ndcg(&hold_labels, &rankings, k)?,
        prior_ndcg: ndcg(&hold_labels, &prior_lists, k)?,
        random_ndcg: uniform_random_ndcg(classes.len(), k),
        ndcg_by_class: ndcg_by_class(&hold_labels, &rankings, k)?,
        accuracy,
        prior_ranking,
        network: report.network,
        standardizer,
        feature_names: features.names,
        split,
        trace: report.trace,
        holdout_truth: hold_labels,
        holdout_rankings: rankings,
        classes,
    })
}

/// Rankings as CSV with columns `truth,rank_1,…,rank_k`.
pub fn rankings_csv(truth: &[String], rankings: &[Vec<String>], k: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["truth".to_string()];
    header.extend((1..=k).map(|i| format!("rank_{i}")));
    w.write_record(&header)?;
    for (t, r) in truth.iter().zip(rankings) {
        let mut row = vec![t.clone()];
        row.extend((0..k).map(|i| r.get(i).cloned().unwrap_or_default()));
        w.write_record(&row)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::InputFormat(e.to_string()))?)
        .map_err(|e| Error::InputFormat(e.to_string()))
}

/// Parses [`rankings_csv`] output; blank rank cells end a list early.
pub fn read_rankings_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    if headers.get(0) != Some("truth") || headers.len() < 2 {
        return Err(Error::Schema("expected columns truth,rank_1,…".into()));
    }
    let (mut truth, mut lists) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        truth.push(rec[0].to_string());
        lists.push(rec.iter().skip(1).take_while(|s| !s.is_empty()).map(str::to_string).collect());
    }
    Ok((truth, lists))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_airbnb;

    #[test]
    fn features_have_no_missing_and_indicators() {
        let s = synth_airbnb(400, 3).unwrap();
        let f = build_features(&s.users, Some(&s.sessions), "id", "country_destination").unwrap();
        assert!(f.names.iter().any(|n| n == "age_missing"));
        assert!(f.names.iter().any(|n| n == "gender_missing"));
        assert!(f.names.iter().any(|n| n == "had_sessions"));
        assert!(!f.names.iter().any(|n| n.starts_with("country_destination") || n == "id"));
        assert_eq!(f.x.cols(), 400);
        assert!(f.x.as_slice().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn standardizer_zero_mean_unit_variance() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0, 3.0, 4.0], vec![5.0; 4]]).unwrap();
        let s = Standardizer::fit(&x);
        let z = s.apply(&x).unwrap();
        assert!(z.row_means().iter().all(|m| m.abs() < 1e-12));
        assert!((z.row(0).iter().map(|v| v * v).sum::<f64>() / 4.0 - 1.0).abs() < 1e-12);
        assert_eq!(z.row(1), &[0.0; 4]);
    }

    #[test]
    fn rankings_round_trip() {
        let truth = vec!["a,b".to_string(), "c".to_string()];
        let lists = vec![vec!["a,b".to_string(), "c".to_string()], vec!["c".to_string()]];
        let text = rankings_csv(&truth, &lists, 2).unwrap();
        assert_eq!(read_rankings_csv(&text).unwrap(), (truth, lists));
    }

    #[test]
    fn small_pipeline_is_deterministic() {
        let s = synth_airbnb(2000, 4).unwrap();
        let cfg = PipelineConfig {
            epochs: 3,
            hidden: vec![8, 8],
            ..PipelineConfig::default()
        };
        let a = run_pipeline(&s.users, Some(&s.sessions), &cfg).unwrap();
        let b = run_pipeline(&s.users, Some(&s.sessions), &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.trace.len(), 3);
        assert_eq!(a.split.holdout.len(), 200);
        assert_eq!(a.prior_ranking[0], "NDF");
        assert!(a.holdout_ndcg > 0.0 && a.holdout_ndcg <= 1.0);
    }
}
