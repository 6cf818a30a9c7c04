//! CSV and JSON emission of result rows.
//!
//! Floats are printed with 12 significant digits (`%.12g` style); missing values are empty CSV
//! cells and JSON `null`s. CSV uses LF line endings.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Number, Value};

use crate::config::OutputFormat;
use crate::error::{Error, Result};
use crate::experiment::{Fig1Row, Fig2Row};
use crate::measure::CensusRow;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Missing,
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => fmt_g12(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) => fmt_g12(*v)
                .parse::<f64>()
                .ok()
                .and_then(Number::from_f64)
                .map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::Number((*v).into()),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Missing => Value::Null,
        }
    }
}

/// A row with a fixed header.
pub trait Record {
    const HEADER: &'static [&'static str];

    fn cells(&self) -> Vec<Cell>;
}

impl Record for Fig1Row {
    const HEADER: &'static [&'static str] =
        &["x", "trial_label", "E_exact", "E_direct", "E_L4", "C_exact", "C_direct", "C_L4", "status"];

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Float(self.x),
            Cell::Text(self.trial.to_string()),
            Cell::Float(self.e_exact),
            Cell::Float(self.e_direct),
            self.e_l4.into(),
            Cell::Float(self.c_exact),
            Cell::Float(self.c_direct),
            self.c_l4.into(),
            Cell::Text(self.status.clone()),
        ]
    }
}

impl Record for Fig2Row {
    const HEADER: &'static [&'static str] =
        &["g", "F_target", "F_achieved", "p", "trial_index", "M_exact", "M_direct", "M_L4", "status"];

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Float(self.g),
            Cell::Float(self.f_target),
            self.f_achieved.into(),
            Cell::Float(self.p),
            Cell::Int(self.trial_index as u64),
            Cell::Float(self.m_exact),
            self.m_direct.into(),
            self.m_l4.into(),
            Cell::Text(self.status.clone()),
        ]
    }
}

impl Record for CensusRow {
    const HEADER: &'static [&'static str] = &["convention", "n_strings", "n_tpb"];

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Text(self.convention.to_string()),
            Cell::Int(self.n_strings as u64),
            Cell::Int(self.n_tpb as u64),
        ]
    }
}

/// `%.12g`: 12 significant digits, trailing zeros trimmed, exponent form outside `[1e-5, 1e12)`.
pub fn fmt_g12(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (DIGITS - 1 - exp) as usize, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<R: Record, W: Write>(rows: &[R], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(R::HEADER)?;
    for r in rows {
        w.write_record(r.cells().iter().map(Cell::csv))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_json<R: Record>(rows: &[R]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                let obj: Map<String, Value> =
                    R::HEADER.iter().zip(r.cells()).map(|(k, c)| (k.to_string(), c.json())).collect();
                Value::Object(obj)
            })
            .collect(),
    )
}

/// Serialized bytes of `rows`.
pub fn render<R: Record>(rows: &[R], format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_csv(rows, &mut buf).expect("writing to memory");
            buf
        }
        OutputFormat::Json => {
            let mut buf = serde_json::to_vec_pretty(&to_json(rows)).expect("JSON values are finite or null");
            buf.push(b'\n');
            buf
        }
    }
}

/// Writes `rows` to `path`.
pub fn emit<R: Record>(rows: &[R], format: OutputFormat, path: &Path) -> Result<()> {
    std::fs::write(path, render(rows, format)).map_err(|source| Error::Io { path: path.to_owned(), source })
}
