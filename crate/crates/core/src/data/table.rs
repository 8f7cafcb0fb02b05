use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

/// Cells of one column; `None` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<Option<f64>>),
    Categorical(Vec<Option<String>>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnData::Numeric(_) => ColumnKind::Numeric,
            ColumnData::Categorical(_) => ColumnKind::Categorical,
        }
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            ColumnData::Numeric(v) => v[row].is_none(),
            ColumnData::Categorical(v) => v[row].is_none(),
        }
    }

    fn select(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Categorical(v) => {
                ColumnData::Categorical(rows.iter().map(|&r| v[r].clone()).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn numeric(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        Column {
            name: name.into(),
            data: ColumnData::Numeric(values),
        }
    }

    pub fn categorical(name: impl Into<String>, values: Vec<Option<String>>) -> Self {
        Column {
            name: name.into(),
            data: ColumnData::Categorical(values),
        }
    }
}

/// Named, typed columns of equal length. Records are rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    columns: Vec<Column>,
}

const MISSING: &str = "NA";

fn is_missing_cell(s: &str) -> bool {
    s.is_empty() || s == MISSING
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column `{}`", c.name)));
            }
        }
        if let Some(first) = columns.first() {
            let n = first.data.len();
            if let Some(bad) = columns.iter().find(|c| c.data.len() != n) {
                return Err(Error::Schema(format!(
                    "column `{}` has {} rows, expected {n}",
                    bad.name,
                    bad.data.len()
                )));
            }
        }
        if let Some(c) = columns.iter().find(|c| {
            matches!(&c.data, ColumnData::Numeric(v) if v.iter().flatten().any(|x| !x.is_finite()))
        }) {
            return Err(Error::InputFormat(format!("column `{}` has a non-finite value", c.name)));
        }
        Ok(Table { columns })
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.data.len())
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn kinds(&self) -> HashMap<String, ColumnKind> {
        self.columns.iter().map(|c| (c.name.clone(), c.data.kind())).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::Schema(format!("no column `{name}`")))
    }

    pub fn numeric(&self, name: &str) -> Result<&[Option<f64>]> {
        match &self.column(name)?.data {
            ColumnData::Numeric(v) => Ok(v),
            ColumnData::Categorical(_) => Err(Error::ColumnType(name.to_string())),
        }
    }

    pub fn categorical(&self, name: &str) -> Result<&[Option<String>]> {
        match &self.column(name)?.data {
            ColumnData::Categorical(v) => Ok(v),
            ColumnData::Numeric(_) => Err(Error::ColumnType(name.to_string())),
        }
    }

    pub fn push_column(&mut self, column: Column) -> Result<()> {
        if self.index_of(&column.name).is_some() {
            return Err(Error::Schema(format!("duplicate column `{}`", column.name)));
        }
        if !self.columns.is_empty() && column.data.len() != self.n_rows() {
            return Err(Error::Schema(format!(
                "column `{}` has {} rows, table has {}",
                column.name,
                column.data.len(),
                self.n_rows()
            )));
        }
        self.columns.push(column);
        Ok(())
    }

    pub fn drop_column(&mut self, name: &str) -> Result<Column> {
        let i = self
            .index_of(name)
            .ok_or_else(|| Error::Schema(format!("no column `{name}`")))?;
        Ok(self.columns.remove(i))
    }

    /// Replaces column `name` in place by `replacement` (possibly several columns).
    pub(crate) fn splice(&mut self, name: &str, replacement: Vec<Column>) -> Result<()> {
        let i = self
            .index_of(name)
            .ok_or_else(|| Error::Schema(format!("no column `{name}`")))?;
        let mut cols = std::mem::take(&mut self.columns);
        cols.splice(i..=i, replacement);
        *self = Table::new(cols)?;
        Ok(())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Table {
        Table {
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    name: c.name.clone(),
                    data: c.data.select(rows),
                })
                .collect(),
        }
    }

    /// Parses CSV with a header row. A column is numeric when every
    /// non-missing cell parses as a finite number; `""` and `"NA"` are missing.
    pub fn from_csv_reader(reader: impl Read) -> Result<Table> {
        Table::from_csv_reader_typed(reader, &HashMap::new())
    }

    /// As [`Table::from_csv_reader`] with the kinds of some columns forced.
    pub fn from_csv_reader_typed(
        reader: impl Read,
        kinds: &HashMap<String, ColumnKind>,
    ) -> Result<Table> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut cells: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
        for record in rdr.records() {
            let record = record?;
            for (col, field) in cells.iter_mut().zip(record.iter()) {
                col.push(field.to_string());
            }
        }
        let columns = headers
            .into_iter()
            .zip(cells)
            .map(|(name, raw)| {
                let parsed: Option<Vec<Option<f64>>> = raw
                    .iter()
                    .map(|s| {
                        if is_missing_cell(s) {
                            Some(None)
                        } else {
                            s.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some)
                        }
                    })
                    .collect();
                let kind = kinds.get(&name).copied();
                match (kind, parsed) {
                    (Some(ColumnKind::Numeric), None) => Err(Error::ColumnType(name)),
                    (Some(ColumnKind::Categorical), _) | (None, None) => Ok(Column::categorical(
                        name,
                        raw.into_iter()
                            .map(|s| if is_missing_cell(&s) { None } else { Some(s) })
                            .collect(),
                    )),
                    (_, Some(values)) => Ok(Column::numeric(name, values)),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Table::new(columns)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Table> {
        Table::from_csv_reader(std::fs::File::open(path)?)
    }

    /// Writes RFC-4180 CSV; missing cells are written as `NA`.
    pub fn to_csv_writer(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::WriterBuilder::new().from_writer(writer);
        w.write_record(self.names())?;
        for r in 0..self.n_rows() {
            let row: Vec<String> = self
                .columns
                .iter()
                .map(|c| match &c.data {
                    ColumnData::Numeric(v) => v[r].map_or(MISSING.to_string(), |x| x.to_string()),
                    ColumnData::Categorical(v) => {
                        v[r].clone().unwrap_or_else(|| MISSING.to_string())
                    }
                })
                .collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.to_csv_writer(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::InputFormat(e.to_string()))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_csv_writer(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}
