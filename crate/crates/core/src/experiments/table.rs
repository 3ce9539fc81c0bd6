//! Tabular results and their CSV encoding.
//!
//! Floats are written with 9 significant digits in C `%.9g` style, so a
//! table's bytes depend only on its values.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_g9(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(x) => Some(*x),
            Cell::Text(s) => s.parse().ok(),
            Cell::Empty => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }
}

/// `%.9g`: nine significant digits, trailing zeros dropped, scientific
/// notation (`1.5e-07`, `2e+10`) outside `1e-4 ≤ |x| < 1e9`.
pub fn format_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{x:.*}", (8 - exp) as usize)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A named table with a fixed column schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Domain(format!("row has {} cells, schema has {}", row.len(), self.columns.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of a numeric column (`None` for empty cells).
    pub fn numbers(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let i = self.column(name).ok_or_else(|| Error::Domain(format!("no column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::render))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Reads a CSV back; every cell comes back as text (or empty), so a
    /// read-write cycle reproduces the bytes.
    pub fn read_csv<R: Read>(name: impl Into<String>, r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let columns = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            rows.push(rec?.iter().map(|s| if s.is_empty() { Cell::Empty } else { Cell::Text(s.into()) }).collect());
        }
        Ok(Self { name: name.into(), columns, rows })
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table").to_string();
        let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::read_csv(name, file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g9_matches_c_printf() {
        // Reference strings from C's printf("%.9g").
        let cases = [
            (1.0, "1"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333"),
            (2.0 / 3.0, "0.666666667"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-3.5e-300, "-3.5e-300"),
            (9.9999999996, "10"),
            (999999999.6, "1e+09"),
            (3.54192, "3.54192"),
            (-3.12335, "-3.12335"),
            (1e100, "1e+100"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g9(x), want, "{x:e}");
        }
        assert_eq!(format_g9(f64::NAN), "nan");
        assert_eq!(format_g9(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_round_trip_preserves_bytes() {
        let mut t = ResultTable::new("t", &["layout", "clusters", "value", "note"]);
        t.push(vec!["da".into(), 16usize.into(), (1.0 / 7.0).into(), Cell::Empty]).unwrap();
        t.push(vec!["ca".into(), 32usize.into(), 2.5e-9.into(), "a,b".into()]).unwrap();
        assert!(t.push(vec![Cell::Empty]).is_err());
        let s = t.to_csv_string().unwrap();
        assert_eq!(s, "layout,clusters,value,note\nda,16,0.142857143,\nca,32,2.5e-09,\"a,b\"\n");
        let back = ResultTable::read_csv("t", s.as_bytes()).unwrap();
        assert_eq!(back.to_csv_string().unwrap(), s);
        assert_eq!(back.numbers("clusters").unwrap(), vec![Some(16.0), Some(32.0)]);
    }
}
