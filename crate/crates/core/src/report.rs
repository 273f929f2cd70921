//! Flat key/value records and their CSV, JSON and table renderings.
//!
//! CSV carries 17 significant digits so values survive a round trip; JSON
//! numbers use the shortest representation that parses back to the same
//! f64; tables are for people and show 6 significant digits.

use std::fmt::Write as _;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Integer(i64),
    Flag(bool),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub key: String,
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
}

/// Ordered list of named values.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FlatRecord {
    pub rows: Vec<Row>,
}

/// 17 significant digits in scientific notation.
pub fn sig17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.16e}")
}

fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.5e}")
}

impl FlatRecord {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, key: impl Into<String>, value: Value, error: Option<f64>) -> &mut Self {
        self.rows.push(Row {
            key: key.into(),
            value,
            error,
        });
        self
    }

    pub fn real(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.push(key, Value::Real(value), None)
    }

    pub fn measured(&mut self, key: impl Into<String>, value: f64, error: f64) -> &mut Self {
        self.push(key, Value::Real(value), Some(error))
    }

    pub fn integer(&mut self, key: impl Into<String>, value: i64) -> &mut Self {
        self.push(key, Value::Integer(value), None)
    }

    pub fn flag(&mut self, key: impl Into<String>, value: bool) -> &mut Self {
        self.push(key, Value::Flag(value), None)
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.push(key, Value::Text(value.into()), None)
    }

    pub fn append(&mut self, other: FlatRecord) -> &mut Self {
        self.rows.extend(other.rows);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.key == key)
    }

    pub fn real_value(&self, key: &str) -> Option<f64> {
        match self.get(key)?.value {
            Value::Real(x) => Some(x),
            Value::Integer(i) => Some(i as f64),
            _ => None,
        }
    }

    fn value_string(value: &Value, digits: fn(f64) -> String) -> String {
        match value {
            Value::Real(x) => digits(*x),
            Value::Integer(i) => i.to_string(),
            Value::Flag(b) => b.to_string(),
            Value::Text(s) => s.clone(),
        }
    }

    /// `key,value,error` with a header row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["key", "value", "error"]).expect("in-memory write");
        for row in &self.rows {
            let error = row.error.map(sig17).unwrap_or_default();
            w.write_record([row.key.as_str(), &Self::value_string(&row.value, sig17), &error])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record is serializable");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let key_width = self.rows.iter().map(|r| r.key.chars().count()).max().unwrap_or(0);
        let values: Vec<String> = self.rows.iter().map(|r| Self::value_string(&r.value, sig6)).collect();
        // Free text is left-aligned and does not widen the numeric column.
        let value_width = self
            .rows
            .iter()
            .zip(&values)
            .filter(|(r, _)| !matches!(r.value, Value::Text(_)))
            .map(|(_, v)| v.chars().count())
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        for (row, value) in self.rows.iter().zip(&values) {
            if matches!(row.value, Value::Text(_)) {
                let _ = write!(out, "{:<key_width$}  {}", row.key, value);
            } else {
                let _ = write!(out, "{:<key_width$}  {:>value_width$}", row.key, value);
            }
            if let Some(e) = row.error {
                let _ = write!(out, "  ± {}", sig6(e));
            }
            out.push('\n');
        }
        out
    }
}
