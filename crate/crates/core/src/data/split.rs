use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    /// Ascending row indices.
    pub train: Vec<usize>,
    /// Ascending row indices.
    pub holdout: Vec<usize>,
}

/// `round(frac · n)` with halves rounded up.
pub fn holdout_size(n: usize, frac: f64) -> usize {
    (frac * n as f64 + 0.5).floor() as usize
}

/// Random disjoint partition of `0..n` with `round(frac·n)` held out.
///
/// With `strata`, every class receives its floor share and the leftover
/// records go to the largest remainders (ties by class name), so each class
/// is within one record of proportional.
pub fn holdout_split(n: usize, frac: f64, seed: u64, strata: Option<&[String]>) -> Result<Split> {
    if !(frac > 0.0 && frac < 1.0) {
        return Err(Error::param(format!("holdout fraction must lie in (0, 1), got {frac}")));
    }
    let h = holdout_size(n, frac);
    let mut rng = Rng::new(seed);
    let mut holdout = match strata {
        None => {
            let mut idx: Vec<usize> = (0..n).collect();
            rng.shuffle(&mut idx);
            idx.truncate(h);
            idx
        }
        Some(labels) => {
            if labels.len() != n {
                return Err(Error::shape("strata length differs from the row count"));
            }
            let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for (i, l) in labels.iter().enumerate() {
                groups.entry(l.as_str()).or_default().push(i);
            }
            let mut quota: Vec<(usize, f64)> = groups
                .values()
                .map(|g| {
                    let exact = frac * g.len() as f64;
                    (exact.floor() as usize, exact - exact.floor())
                })
                .collect();
            let assigned: usize = quota.iter().map(|q| q.0).sum();
            let mut order: Vec<usize> = (0..quota.len()).collect();
            order.sort_by(|&a, &b| quota[b].1.total_cmp(&quota[a].1));
            for &g in order.iter().take(h.saturating_sub(assigned)) {
                quota[g].0 += 1;
            }
            let mut out = Vec::with_capacity(h);
            for (members, (q, _)) in groups.values().zip(&quota) {
                let mut m = members.clone();
                rng.shuffle(&mut m);
                out.extend_from_slice(&m[..*q]);
            }
            out
        }
    };
    holdout.sort_unstable();
    let mut is_hold = vec![false; n];
    holdout.iter().for_each(|&i| is_hold[i] = true);
    let train = (0..n).filter(|&i| !is_hold[i]).collect();
    Ok(Split { train, holdout })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plain_split_sizes() {
        let s = holdout_split(1000, 0.1, 1, None).unwrap();
        assert_eq!((s.holdout.len(), s.train.len()), (100, 900));
        assert_eq!(holdout_size(213_451, 0.10), 21_345);
        assert!(holdout_split(10, 1.0, 1, None).is_err());
    }

    #[test]
    fn stratified_counts_near_proportional() {
        let mut labels = Vec::new();
        for (l, c) in [("NDF", 590), ("US", 290), ("other", 48), ("FR", 22), ("GB", 12), ("PT", 1)] {
            labels.extend(std::iter::repeat_n(l.to_string(), c));
        }
        let s = holdout_split(labels.len(), 0.1, 2, Some(&labels)).unwrap();
        assert_eq!(s.holdout.len(), holdout_size(labels.len(), 0.1));
        for class in ["NDF", "US", "other", "FR", "GB", "PT"] {
            let total = labels.iter().filter(|l| *l == class).count() as f64;
            let got = s.holdout.iter().filter(|&&i| labels[i] == class).count() as f64;
            assert!((got - 0.1 * total).abs() <= 1.0, "{class}");
        }
    }

    proptest! {
        #[test]
        fn partition_is_exact(n in 1usize..500, frac in 0.01f64..0.99, seed in any::<u64>(), strat in any::<bool>()) {
            let labels: Vec<String> = (0..n).map(|i| (i % 7 % 3).to_string()).collect();
            let s = holdout_split(n, frac, seed, strat.then_some(labels.as_slice())).unwrap();
            let mut all: Vec<usize> = s.train.iter().chain(&s.holdout).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            prop_assert_eq!(s.holdout.len(), holdout_size(n, frac));
        }
    }
}
