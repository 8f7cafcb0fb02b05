//! Tables, feature engineering, the synthetic Airbnb-like generator,
//! holdout splits and ranking metrics.

mod encode;
mod metrics;
mod sessions;
mod split;
mod synth;
mod table;

pub use encode::one_hot;
pub use metrics::{
    accuracy_report_csv, dcg_at_k, ndcg, ndcg_by_class, ndcg_report_csv, rank_labels, topk_accuracy,
    uniform_random_ndcg, TopkAccuracy,
};
pub use sessions::{attach_sessions, session_features};
pub use split::{holdout_size, holdout_split, Split};
pub use synth::{class_labels, class_priors, synth_airbnb, SynthAirbnb, AGE_MISSING, DESTINATION_PERCENT};
pub use table::{Column, ColumnData, ColumnKind, Table};
