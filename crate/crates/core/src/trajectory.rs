//! Recorded simulation output and its CSV form.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::ActionOp;

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// One realized event action.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub t: f64,
    pub event: String,
    pub target: String,
    pub op: ActionOp,
    /// Removed amount for `-=`, added amount for `+=`, assigned value for `=`.
    pub amount: f64,
    /// Signed change of the target stock.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("malformed CSV: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Stocks, then flows, then auxiliaries, each in declaration order.
    pub columns: Vec<Column>,
    pub events: Vec<EventRecord>,
    /// Cumulative realized amount moved by each flow up to each recorded time.
    pub totals: Vec<Column>,
    pub parameters: Vec<(String, f64)>,
    /// How many leading columns are stocks.
    pub stock_count: usize,
}

/// Fixed 6-decimal rendering; negative zero prints as zero.
pub fn fmt_value(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

impl Trajectory {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn require(&self, name: &str) -> Result<&[f64], TrajectoryError> {
        self.column(name)
            .ok_or_else(|| TrajectoryError::MissingColumn(name.to_string()))
    }

    pub fn total(&self, flow: &str) -> Option<&[f64]> {
        self.totals
            .iter()
            .find(|c| c.name == flow)
            .map(|c| c.values.as_slice())
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    pub fn stock_columns(&self) -> &[Column] {
        &self.columns[..self.stock_count.min(self.columns.len())]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for c in &self.columns {
            out.push(',');
            out.push_str(&c.name);
        }
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            out.push_str(&fmt_value(*t));
            for c in &self.columns {
                out.push(',');
                out.push_str(&fmt_value(c.values[i]));
            }
            out.push('\n');
        }
        out
    }

    pub fn events_to_csv(&self) -> String {
        let mut out = String::from("t,event,target,amount\n");
        for e in &self.events {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_value(e.t),
                e.event,
                e.target,
                fmt_value(e.amount)
            );
        }
        out
    }

    /// Reads the `t,<col>,...` format back. Only times and columns survive the
    /// round trip; events, totals and parameters are empty.
    pub fn from_csv(text: &str) -> Result<Trajectory, TrajectoryError> {
        let table = read_table(text)?;
        let mut columns = table.columns;
        let times = columns.remove(0).values;
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(TrajectoryError::Malformed("times must be strictly increasing".into()));
        }
        Ok(Trajectory {
            times,
            columns,
            ..Default::default()
        })
    }
}

/// Numeric CSV table whose first column is time. Empty cells read as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<Column>,
}

pub fn read_table(text: &str) -> Result<Table, TrajectoryError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| TrajectoryError::Malformed(e.to_string()))?
        .clone();
    if headers.get(0) != Some("t") {
        return Err(TrajectoryError::Malformed("first column must be `t`".into()));
    }
    let mut columns: Vec<Column> = headers
        .iter()
        .map(|h| Column {
            name: h.to_string(),
            values: Vec::new(),
        })
        .collect();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| TrajectoryError::Malformed(e.to_string()))?;
        if record.len() != columns.len() {
            return Err(TrajectoryError::Malformed(format!(
                "row {} has {} fields, expected {}",
                row + 2,
                record.len(),
                columns.len()
            )));
        }
        for (col, field) in columns.iter_mut().zip(record.iter()) {
            let v = if field.is_empty() {
                f64::NAN
            } else {
                field.parse::<f64>().map_err(|_| {
                    TrajectoryError::Malformed(format!("row {}: `{field}` is not a number", row + 2))
                })?
            };
            col.values.push(v);
        }
    }
    if columns[0].values.iter().any(|t| !t.is_finite()) {
        return Err(TrajectoryError::Malformed("every row needs a time".into()));
    }
    Ok(Table { columns })
}
