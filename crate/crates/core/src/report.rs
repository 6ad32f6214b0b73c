//! CSV and JSON artifacts. Output is byte-for-byte reproducible: reals are
//! written with 17 significant digits, CSV rows end in `\n`, JSON keys
//! follow declaration order.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::bounds::BoundCurve;
use crate::chains::{closed_form_chain_bound, ChainCountTable};
use crate::constants::BoundConstants;
use crate::dynamics::{SimulationSweep, VerificationReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u128),
    Real(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_real(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// 17 significant digits in scientific notation.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Anything that can be written as a report.
pub enum Artifact<'a> {
    Table(&'a Table),
    Json(&'a dyn erased::Json),
}

pub mod erased {
    /// Object-safe wrapper over `Serialize`.
    pub trait Json {
        fn to_value(&self) -> serde_json::Result<serde_json::Value>;
    }

    impl<T: serde::Serialize> Json for T {
        fn to_value(&self) -> serde_json::Result<serde_json::Value> {
            serde_json::to_value(self)
        }
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidArgument(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn emit_report(artifact: Artifact<'_>, format: Format, path: &Path) -> Result<()> {
    let body = match (artifact, format) {
        (Artifact::Table(t), Format::Csv) => t.to_csv()?,
        (Artifact::Table(t), Format::Json) => {
            let rows: Vec<serde_json::Map<String, serde_json::Value>> = t
                .rows
                .iter()
                .map(|r| {
                    t.header
                        .iter()
                        .cloned()
                        .zip(r.iter().map(|c| match c {
                            Cell::Int(i) => serde_json::Value::from(*i as f64),
                            Cell::Real(x) => serde_json::Value::from(*x),
                            Cell::Text(s) => serde_json::Value::from(s.clone()),
                        }))
                        .collect()
                })
                .collect();
            to_json(&rows)?
        }
        (Artifact::Json(v), Format::Json) => {
            to_json(&v.to_value().map_err(|e| Error::InvalidArgument(format!("json: {e}")))?)?
        }
        (Artifact::Json(_), Format::Csv) => {
            return Err(Error::InvalidArgument("structured reports are JSON only".into()));
        }
    };
    write(path, &body)
}

pub fn curve_table(curves: &[BoundCurve]) -> Table {
    let mut t = Table::new(&["d", "t", "B"]);
    for c in curves {
        for &(time, b) in &c.samples {
            t.push(vec![Cell::Int(c.d as u128), Cell::Real(time), Cell::Real(b)]);
        }
    }
    t
}

pub fn sweep_table(sweep: &SimulationSweep) -> Table {
    let mut t = Table::new(&["d", "t", "norm"]);
    for p in &sweep.points {
        t.push(vec![Cell::Int(p.d as u128), Cell::Real(p.t), Cell::Real(p.norm)]);
    }
    t
}

pub fn margins_table(report: &VerificationReport) -> Table {
    let mut t = Table::new(&["d", "t", "measured", "bound", "margin"]);
    for p in &report.points {
        t.push(vec![
            Cell::Int(p.d as u128),
            Cell::Real(p.t),
            Cell::Real(p.measured),
            Cell::Real(p.bound),
            Cell::Real(p.margin),
        ]);
    }
    t
}

/// Columns `n, c_n, closed_form`; `weighted` selects which count flavour.
pub fn chain_table(table: &ChainCountTable, consts: &BoundConstants, d: usize, weighted: bool) -> Table {
    let mut t = Table::new(&["n", "c_n", "closed_form"]);
    let counts = if weighted { &table.weighted } else { &table.counts };
    for (n, c) in counts.iter().enumerate() {
        t.push(vec![
            Cell::Int(n as u128),
            Cell::Text(c.to_string()),
            Cell::Real(closed_form_chain_bound(consts, n, d)),
        ]);
    }
    t
}
