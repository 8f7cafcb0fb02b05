use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};

fn check_distinct<S: AsRef<str>>(ranked: &[S]) -> Result<()> {
    let mut seen = HashSet::new();
    for l in ranked {
        if !seen.insert(l.as_ref()) {
            return Err(Error::InputFormat(format!(
                "label {:?} ranked twice",
                l.as_ref()
            )));
        }
    }
    Ok(())
}

/// `1 / log₂(pos + 1)` for the 1-based position of `truth` among the first
/// `k` labels, 0 if it is not there.
pub fn dcg_at_k<S: AsRef<str>>(truth: &str, ranked: &[S], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    check_distinct(ranked)?;
    Ok(ranked
        .iter()
        .take(k)
        .position(|l| l.as_ref() == truth)
        .map_or(0.0, |i| 1.0 / ((i + 2) as f64).log2()))
}

/// Mean of [`dcg_at_k`] over records.
pub fn ndcg<S: AsRef<str>, T: AsRef<str>>(truths: &[T], predictions: &[Vec<S>], k: usize) -> Result<f64> {
    Ok(ndcg_values(truths, predictions, k)?.iter().sum::<f64>() / truths.len() as f64)
}

fn ndcg_values<S: AsRef<str>, T: AsRef<str>>(truths: &[T], predictions: &[Vec<S>], k: usize) -> Result<Vec<f64>> {
    if truths.is_empty() {
        return Err(Error::param("no records to score"));
    }
    if truths.len() != predictions.len() {
        return Err(Error::shape(format!(
            "{} truths but {} rankings",
            truths.len(),
            predictions.len()
        )));
    }
    truths
        .iter()
        .zip(predictions)
        .map(|(t, r)| dcg_at_k(t.as_ref(), r, k))
        .collect()
}

/// NDCG restricted to the records of each true class, in label order.
pub fn ndcg_by_class<S: AsRef<str>, T: AsRef<str>>(
    truths: &[T],
    predictions: &[Vec<S>],
    k: usize,
) -> Result<Vec<(String, usize, f64)>> {
    let values = ndcg_values(truths, predictions, k)?;
    let mut acc: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for (t, v) in truths.iter().zip(values) {
        let e = acc.entry(t.as_ref()).or_default();
        e.0 += 1;
        e.1 += v;
    }
    Ok(acc
        .into_iter()
        .map(|(l, (n, s))| (l.to_string(), n, s / n as f64))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopkAccuracy {
    pub k: usize,
    pub overall: f64,
    /// `(class, records, accuracy)` in label order.
    pub per_class: Vec<(String, usize, f64)>,
}

/// Share of records whose true label is among the first `k` predictions.
pub fn topk_accuracy<S: AsRef<str>, T: AsRef<str>>(
    truths: &[T],
    predictions: &[Vec<S>],
    k: usize,
) -> Result<TopkAccuracy> {
    let hits: Vec<f64> = ndcg_values(truths, predictions, k)?
        .into_iter()
        .map(|v| if v > 0.0 { 1.0 } else { 0.0 })
        .collect();
    let mut acc: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for (t, h) in truths.iter().zip(&hits) {
        let e = acc.entry(t.as_ref()).or_default();
        e.0 += 1;
        e.1 += h;
    }
    Ok(TopkAccuracy {
        k,
        overall: hits.iter().sum::<f64>() / hits.len() as f64,
        per_class: acc
            .into_iter()
            .map(|(l, (n, s))| (l.to_string(), n, s / n as f64))
            .collect(),
    })
}

/// Expected NDCG@k of a ranker that orders `classes` labels uniformly at
/// random: the true label is equally likely to sit at any position.
pub fn uniform_random_ndcg(classes: usize, k: usize) -> f64 {
    (1..=k.min(classes))
        .map(|j| 1.0 / ((j + 1) as f64).log2())
        .sum::<f64>()
        / classes as f64
}

/// Labels ordered by decreasing score, ties by label, truncated to `k`.
pub fn rank_labels(labels: &[String], scores: &[f64], k: usize) -> Vec<String> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| labels[a].cmp(&labels[b])));
    order.into_iter().take(k).map(|i| labels[i].clone()).collect()
}

/// Rows `(class, k, accuracy)` for each k, followed by the overall row
/// labeled `all`.
pub fn accuracy_report_csv(reports: &[TopkAccuracy]) -> String {
    let mut out = String::from("class,k,accuracy\n");
    for r in reports {
        for (c, _, a) in &r.per_class {
            out.push_str(&format!("{c},{},{a}\n", r.k));
        }
        out.push_str(&format!("all,{},{}\n", r.k, r.overall));
    }
    out
}

/// Rows `(destination, ndcg)` plus an `all` row.
pub fn ndcg_report_csv(by_class: &[(String, usize, f64)], overall: f64) -> String {
    let mut out = String::from("destination,ndcg\n");
    for (c, _, v) in by_class {
        out.push_str(&format!("{c},{v}\n"));
    }
    out.push_str(&format!("all,{overall}\n"));
    out
}
