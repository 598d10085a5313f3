//! Small table model with CSV and JSON writers.
//!
//! Complex cells serialize as {re, im} objects in JSON; in CSV a complex
//! value collapses to a plain scalar when |im| < 1e-13 |re| and prints as
//! re+imi otherwise, so both formats carry the same numbers.

use num_complex::Complex64;
use serde_json::{json, Map, Value};

pub enum Cell {
    Int(i64),
    Real(f64),
    Complex(Complex64),
    Bool(bool),
    Text(String),
}

pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn finish(&mut self) {}

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&csv_cell(cell));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    obj.insert(name.to_string(), json_cell(cell));
                }
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("table serializes");
        s.push('\n');
        s
    }
}

fn near_real(v: Complex64) -> bool {
    v.im == 0.0 || v.im.abs() < 1e-13 * v.re.abs()
}

fn csv_cell(cell: &Cell) -> String {
    match cell {
        Cell::Int(v) => v.to_string(),
        Cell::Real(v) => v.to_string(),
        Cell::Complex(v) if near_real(*v) => v.re.to_string(),
        Cell::Complex(v) => format!("{}{}{}i", v.re, if v.im < 0.0 { "" } else { "+" }, v.im),
        Cell::Bool(v) => v.to_string(),
        Cell::Text(v) => {
            if v.contains(',') || v.contains('"') {
                format!("\"{}\"", v.replace('"', "\"\""))
            } else {
                v.clone()
            }
        }
    }
}

fn json_cell(cell: &Cell) -> Value {
    match cell {
        Cell::Int(v) => json!(v),
        Cell::Real(v) => json!(v),
        Cell::Complex(v) => json!({ "re": v.re, "im": v.im }),
        Cell::Bool(v) => json!(v),
        Cell::Text(v) => {
            if v.is_empty() {
                Value::Null
            } else {
                json!(v)
            }
        }
    }
}
