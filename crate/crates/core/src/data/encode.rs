use std::collections::BTreeSet;

use super::table::{Column, Table};
use crate::error::Result;

/// Replaces categorical `column` by 0/1 dummies named `column=level`.
///
/// Levels are in lexicographic order. When any cell is missing a
/// `column_missing` indicator follows the dummies and missing rows are zero
/// in every dummy.
pub fn one_hot(table: &Table, column: &str) -> Result<Table> {
    let values = table.categorical(column)?;
    let levels: BTreeSet<&str> = values.iter().flatten().map(String::as_str).collect();
    let mut cols: Vec<Column> = levels
        .iter()
        .map(|level| {
            Column::numeric(
                format!("{column}={level}"),
                values
                    .iter()
                    .map(|v| Some(if v.as_deref() == Some(*level) { 1.0 } else { 0.0 }))
                    .collect(),
            )
        })
        .collect();
    if values.iter().any(Option::is_none) {
        cols.push(Column::numeric(
            format!("{column}_missing"),
            values.iter().map(|v| Some(if v.is_none() { 1.0 } else { 0.0 })).collect(),
        ));
    }
    let mut out = table.clone();
    out.splice(column, cols)?;
    Ok(out)
}
