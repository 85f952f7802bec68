//! Table emitter shared by every command.
//!
//! CSV: one header row, then one line per record; missing values are empty.
//! JSON: an array of flat objects with the same keys as the CSV header, in
//! header order. Floats are written as `{:.16e}` (17 significant digits).

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Bool(bool),
    Null,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v as i128)
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

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(csv_field).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        if self.rows.is_empty() {
            return "[]\n".to_string();
        }
        let mut out = String::from("[\n");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str("  {");
            for (j, (key, cell)) in self.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{}: {}", json_string(key), json_value(cell));
            }
            out.push('}');
            if i + 1 < self.rows.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("]\n");
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn csv_field(cell: &Cell) -> String {
    match cell {
        Cell::Int(v) => v.to_string(),
        Cell::Float(x) if x.is_finite() => format_float(*x),
        Cell::Float(_) | Cell::Null => String::new(),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn json_value(cell: &Cell) -> String {
    match cell {
        Cell::Int(v) => v.to_string(),
        Cell::Float(x) if x.is_finite() => format_float(*x),
        Cell::Float(_) | Cell::Null => "null".to_string(),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(s) => json_string(s),
    }
}

/// Writes to `path`, or standard output when `path` is `None`.
pub fn write_output(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["p", "label", "mass", "ok", "extra"]);
        t.push(vec![3u32.into(), "a,b".into(), 0.25.into(), true.into(), Cell::Null]);
        t.push(vec![4u32.into(), "mu+".into(), (1.0 / 3.0).into(), false.into(), f64::NAN.into()]);
        t
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "p,label,mass,ok,extra");
        assert_eq!(lines[1], "3,\"a,b\",2.5000000000000000e-1,true,");
        assert_eq!(lines[2], "4,mu+,3.3333333333333331e-1,false,");
    }

    #[test]
    fn json_layout_round_trips() {
        let json = sample().to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v[0]["label"], "a,b");
        assert_eq!(v[1]["mass"].as_f64().unwrap(), 1.0 / 3.0);
        assert!(v[1]["extra"].is_null());
        assert_eq!(v[0]["ok"], true);
    }

    #[test]
    fn empty_tables() {
        let t = Table::new(&["p", "omega_index", "omega_radians", "mass"]);
        assert_eq!(t.to_csv(), "p,omega_index,omega_radians,mass\n");
        assert_eq!(t.to_json(), "[]\n");
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5e10] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }
}
