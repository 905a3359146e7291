//! Tabular results and their CSV / JSON encodings.

use serde_json::{json, Map, Value};

/// One table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    /// No value, for example an undefined bound.
    Missing,
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // 17 significant digits round-trip every f64
            Cell::Float(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Float(v) if v.is_nan() => "nan".into(),
            Cell::Float(v) if *v > 0.0 => "inf".into(),
            Cell::Float(_) => "-inf".into(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(_) | Cell::Missing => Value::Null,
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }
}

/// Rows under fixed column names. When `check` names a boolean column, any
/// row holding `false` there counts as a violation.
#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    check: Option<usize>,
    notes: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new(), check: None, notes: Vec::new() }
    }

    pub fn checked(columns: &[&'static str], check: &'static str) -> Self {
        let mut t = Self::new(columns);
        t.check = Some(columns.iter().position(|c| *c == check).expect("check column exists"));
        t
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Records a violation that is not tied to a single row.
    pub fn note_violation(&mut self, message: String) {
        self.notes.push(message);
    }

    fn row_object(&self, row: &[Cell]) -> Value {
        let map: Map<String, Value> =
            self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.to_json())).collect();
        Value::Object(map)
    }

    /// Machine-readable record of every violation, or `None` if there are none.
    pub fn violations(&self, command: &str) -> Option<Value> {
        let failed: Vec<Value> = match self.check {
            Some(i) => self
                .rows
                .iter()
                .filter(|r| r[i] == Cell::Bool(false))
                .map(|r| self.row_object(r))
                .collect(),
            None => Vec::new(),
        };
        if failed.is_empty() && self.notes.is_empty() {
            return None;
        }
        Some(json!({
            "command": command,
            "violations": failed.len() + self.notes.len(),
            "rows": failed,
            "notes": self.notes,
        }))
    }

    pub fn to_csv(&self, metadata: &Value) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv))?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)
            .expect("csv output is utf-8");
        Ok(format!("# {metadata}\n{body}"))
    }

    pub fn to_json(&self, metadata: &Value) -> String {
        let rows: Vec<Value> =
            self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::to_json).collect())).collect();
        let doc = json!({ "metadata": metadata, "columns": self.columns, "rows": rows });
        let mut text = serde_json::to_string_pretty(&doc).expect("json values serialize");
        text.push('\n');
        text
    }
}
