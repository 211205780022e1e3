//! File export and import.
//!
//! Both formats reproduce `f64` values exactly. JSON relies on serde_json's
//! shortest round-trip formatting, and CSV writes each value with Rust's
//! `Display` for `f64`, which also round-trips.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuits::StateVector;
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::tomography::TomographyResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ExportFormat::Json),
            "csv" => Ok(ExportFormat::Csv),
            other => Err(Error::InvalidInput(format!(
                "unknown export format {other:?} (expected json or csv)"
            ))),
        }
    }
}

/// Anything the toolkit can write to disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Exportable {
    State { state: StateVector },
    Density { rho: DensityMatrix },
    Reductions { reductions: Vec<LabelledDensity> },
    Tomography { result: TomographyResult },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelledDensity {
    pub label: String,
    pub rho: DensityMatrix,
}

#[derive(Serialize, Deserialize)]
struct MatrixRow {
    label: String,
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

impl Exportable {
    /// Labelled matrices for the CSV layout.
    fn blocks(&self) -> Vec<(String, ComplexMatrix)> {
        match self {
            Exportable::State { state } => vec![("state".into(), state.to_matrix())],
            Exportable::Density { rho } => vec![("rho".into(), rho.matrix().clone())],
            Exportable::Reductions { reductions } => reductions
                .iter()
                .map(|r| (r.label.clone(), r.rho.matrix().clone()))
                .collect(),
            Exportable::Tomography { result } => vec![
                ("rho".into(), result.rho.matrix().clone()),
                ("raw_rho".into(), result.raw_rho.clone()),
            ],
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// CSV with columns `label,row,col,re,im`, one line per entry.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (label, m) in self.blocks() {
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    let z = m.get(r, c);
                    w.serialize(MatrixRow {
                        label: label.clone(),
                        row: r,
                        col: c,
                        re: z.re,
                        im: z.im,
                    })?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn render(&self, format: ExportFormat) -> Result<String> {
        match format {
            ExportFormat::Json => self.to_json(),
            ExportFormat::Csv => self.to_csv(),
        }
    }

    pub fn write(&self, path: &Path, format: ExportFormat) -> Result<()> {
        fs::write(path, self.render(format)?)?;
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Reads the matrices of a CSV export back, in file order.
pub fn read_csv_blocks(s: &str) -> Result<Vec<(String, ComplexMatrix)>> {
    let mut rdr = csv::Reader::from_reader(s.as_bytes());
    let mut blocks: Vec<(String, Vec<MatrixRow>)> = Vec::new();
    for rec in rdr.deserialize() {
        let row: MatrixRow = rec?;
        match blocks.last_mut() {
            Some((label, rows)) if *label == row.label => rows.push(row),
            _ => blocks.push((row.label.clone(), vec![row])),
        }
    }
    blocks
        .into_iter()
        .map(|(label, rows)| {
            let n_rows = rows.iter().map(|r| r.row + 1).max().unwrap_or(0);
            let n_cols = rows.iter().map(|r| r.col + 1).max().unwrap_or(0);
            if rows.len() != n_rows * n_cols {
                return Err(Error::Format(format!(
                    "block {label} has {} entries for a {n_rows}x{n_cols} matrix",
                    rows.len()
                )));
            }
            let mut m = ComplexMatrix::zeros(n_rows, n_cols);
            for r in rows {
                m[(r.row, r.col)] = C64::new(r.re, r.im);
            }
            Ok((label, m))
        })
        .collect()
}

/// Reads a density matrix from either a bare density JSON payload, an
/// exported `density` document, or a single-block CSV export.
pub fn read_density(path: &Path) -> Result<DensityMatrix> {
    let text = fs::read_to_string(path)?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let blocks = read_csv_blocks(&text)?;
        let (_, m) = blocks
            .into_iter()
            .next()
            .ok_or_else(|| Error::Format("empty csv".into()))?;
        return DensityMatrix::from_matrix(m);
    }
    if let Ok(Exportable::Density { rho }) = Exportable::from_json(&text) {
        return Ok(rho);
    }
    DensityMatrix::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::build_masked_orthogonal;

    #[test]
    fn format_parsing() {
        assert_eq!("JSON".parse::<ExportFormat>().unwrap(), ExportFormat::Json);
        assert!("xml".parse::<ExportFormat>().is_err());
    }

    #[test]
    fn maximally_mixed_round_trips_both_formats() {
        let rho = DensityMatrix::maximally_mixed(1).unwrap();
        let e = Exportable::Density { rho: rho.clone() };
        match Exportable::from_json(&e.to_json().unwrap()).unwrap() {
            Exportable::Density { rho: back } => assert_eq!(back, rho),
            other => panic!("{other:?}"),
        }
        let blocks = read_csv_blocks(&e.to_csv().unwrap()).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(&blocks[0].1, rho.matrix());
    }

    #[test]
    fn awkward_floats_survive_csv() {
        let s = build_masked_orthogonal().run().unwrap();
        let rho = DensityMatrix::from_statevector(&s).unwrap();
        let e = Exportable::Density { rho: rho.clone() };
        let blocks = read_csv_blocks(&e.to_csv().unwrap()).unwrap();
        assert_eq!(&blocks[0].1, rho.matrix());
    }
}
