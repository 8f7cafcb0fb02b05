use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::table::{Column, Table};
use crate::error::{Error, Result};

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Sample (n − 1) standard deviation; 0 for fewer than two values.
fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Lower median; 0 for an empty list.
fn lower_median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s[(s.len() - 1) / 2]
}

#[derive(Default)]
struct UserAcc {
    sessions: usize,
    durations: Vec<f64>,
    by_action: HashMap<String, Vec<f64>>,
    action_count: HashMap<String, usize>,
    by_device: HashMap<String, Vec<f64>>,
    device_count: HashMap<String, usize>,
}

/// One row per `user_id` (sorted) with session aggregates.
///
/// Columns: `user_id`, `n_sessions`, `action=<a>_count`, `action=<a>_sd`,
/// `device=<d>_count`, `device=<d>_sd`, `duration_mean`, `duration_sd`,
/// `duration_median`, `had_sessions`. Missing durations are counted as
/// sessions but left out of the duration statistics.
pub fn session_features(sessions: &Table) -> Result<Table> {
    for key in ["user_id", "action_type", "device_type", "duration"] {
        if sessions.index_of(key).is_none() {
            return Err(Error::Schema(format!("sessions table lacks `{key}`")));
        }
    }
    let users = sessions.categorical("user_id")?;
    let actions = sessions.categorical("action_type")?;
    let devices = sessions.categorical("device_type")?;
    let durations = sessions.numeric("duration")?;

    let mut acc: BTreeMap<&str, UserAcc> = BTreeMap::new();
    let mut action_levels = BTreeSet::new();
    let mut device_levels = BTreeSet::new();
    for r in 0..sessions.n_rows() {
        let Some(user) = users[r].as_deref() else {
            return Err(Error::InputFormat(format!("session row {r} has no user_id")));
        };
        let a = acc.entry(user).or_default();
        a.sessions += 1;
        if let Some(d) = durations[r] {
            a.durations.push(d);
        }
        if let Some(act) = &actions[r] {
            action_levels.insert(act.clone());
            *a.action_count.entry(act.clone()).or_default() += 1;
            if let Some(d) = durations[r] {
                a.by_action.entry(act.clone()).or_default().push(d);
            }
        }
        if let Some(dev) = &devices[r] {
            device_levels.insert(dev.clone());
            *a.device_count.entry(dev.clone()).or_default() += 1;
            if let Some(d) = durations[r] {
                a.by_device.entry(dev.clone()).or_default().push(d);
            }
        }
    }

    let accs: Vec<&UserAcc> = acc.values().collect();
    let col = |name: String, f: &dyn Fn(&UserAcc) -> f64| {
        Column::numeric(name, accs.iter().map(|a| Some(f(a))).collect())
    };
    let mut cols = vec![
        Column::categorical("user_id", acc.keys().map(|k| Some(k.to_string())).collect()),
        col("n_sessions".into(), &|a| a.sessions as f64),
    ];
    for level in &action_levels {
        cols.push(col(format!("action={level}_count"), &|a| {
            a.action_count.get(level).copied().unwrap_or(0) as f64
        }));
        cols.push(col(format!("action={level}_sd"), &|a| {
            a.by_action.get(level).map_or(0.0, |v| sample_sd(v))
        }));
    }
    for level in &device_levels {
        cols.push(col(format!("device={level}_count"), &|a| {
            a.device_count.get(level).copied().unwrap_or(0) as f64
        }));
        cols.push(col(format!("device={level}_sd"), &|a| {
            a.by_device.get(level).map_or(0.0, |v| sample_sd(v))
        }));
    }
    cols.push(col("duration_mean".into(), &|a| mean(&a.durations)));
    cols.push(col("duration_sd".into(), &|a| sample_sd(&a.durations)));
    cols.push(col("duration_median".into(), &|a| lower_median(&a.durations)));
    cols.push(col("had_sessions".into(), &|_| 1.0));
    Table::new(cols)
}

/// Left join of session features onto `users` by `key` = `user_id`.
///
/// Users without sessions get 0 in every feature, including `had_sessions`.
pub fn attach_sessions(users: &Table, key: &str, features: &Table) -> Result<Table> {
    let ids = users.categorical(key)?;
    let feat_ids = features.categorical("user_id")?;
    let lookup: HashMap<&str, usize> = feat_ids
        .iter()
        .enumerate()
        .filter_map(|(i, id)| id.as_deref().map(|s| (s, i)))
        .collect();
    let mut out = users.clone();
    for c in features.columns().iter().filter(|c| c.name != "user_id") {
        let values = features.numeric(&c.name)?;
        let joined = ids
            .iter()
            .map(|id| {
                Some(
                    id.as_deref()
                        .and_then(|s| lookup.get(s))
                        .and_then(|&i| values[i])
                        .unwrap_or(0.0),
                )
            })
            .collect();
        out.push_column(Column::numeric(c.name.clone(), joined))?;
    }
    Ok(out)
}
