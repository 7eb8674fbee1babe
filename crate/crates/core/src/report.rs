//! Experiment reports: a JSON document and a CSV mirror of its rows.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub type Row = Map<String, Value>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub params: Map<String, Value>,
    pub rows: Vec<Row>,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            seed,
            params: Map::new(),
            rows: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Result<Self> {
        self.params
            .insert(key.to_string(), serde_json::to_value(value)?);
        Ok(self)
    }

    /// Appends a row; its keys must match the first row's keys in order.
    pub fn push_row(&mut self, row: Row) -> Result<()> {
        if let Some(first) = self.rows.first() {
            if !first.keys().eq(row.keys()) {
                return Err(Error::ReportColumns(format!(
                    "expected {:?}, got {:?}",
                    first.keys().collect::<Vec<_>>(),
                    row.keys().collect::<Vec<_>>()
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> Vec<&str> {
        self.rows
            .first()
            .map(|r| r.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Header line plus one line per row. Strings are quoted only when they
    /// contain a comma, quote or newline; nested values are written as JSON.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns().join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.values().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn csv_cell(v: &Value) -> String {
    let raw = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

/// Builds a [`Row`] from `key => value` pairs, keeping their order.
#[macro_export]
macro_rules! row {
    ($($key:expr => $value:expr),* $(,)?) => {{
        let mut r = $crate::report::Row::new();
        $( r.insert(($key).to_string(), ::serde_json::json!($value)); )*
        r
    }};
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo", 7)
            .param("p", 0.95)
            .unwrap()
            .param("d", 100)
            .unwrap();
        r.push_row(row!("k" => 1, "acc" => 0.5, "note" => "a,b"))
            .unwrap();
        r.push_row(row!("k" => 2, "acc" => 0.25, "note" => "plain"))
            .unwrap();
        r
    }

    #[test]
    fn csv_mirror() {
        assert_eq!(
            sample().to_csv(),
            "k,acc,note\n1,0.5,\"a,b\"\n2,0.25,plain\n"
        );
    }

    #[test]
    fn mismatched_rows_are_rejected() {
        let mut r = sample();
        assert!(r
            .push_row(row!("acc" => 1, "k" => 2, "note" => "x"))
            .is_err());
        assert!(r.push_row(row!("k" => 1)).is_err());
    }

    #[test]
    fn json_is_ordered_and_round_trips() {
        let r = sample();
        let text = r.to_json().unwrap();
        assert!(text.find("\"schema_version\": 1").unwrap() < text.find("\"experiment\"").unwrap());
        assert!(text.find("\"p\"").unwrap() < text.find("\"d\"").unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        r.write_json(&path).unwrap();
        assert_eq!(ExperimentReport::read_json(&path).unwrap(), r);
        assert_eq!(sample().to_json().unwrap(), text);
    }
}
