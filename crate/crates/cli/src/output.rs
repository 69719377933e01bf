//! CSV artifacts and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use netfolio::{DMatrix, DVector};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Collects files written during a run, in write order, with their hashes.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<(String, String)>,
}

impl OutputDir {
    pub fn create(root: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(Self {
            root,
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, relative: &str, contents: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push((relative.to_string(), sha256_hex(contents)));
        Ok(())
    }

    pub fn write_csv(&mut self, relative: &str, rows: Vec<Vec<String>>) -> Result<(), CliError> {
        let bytes = csv_bytes(rows)?;
        self.write(relative, &bytes)
    }

    pub fn written(&self) -> &[(String, String)] {
        &self.written
    }
}

pub fn csv_bytes(rows: Vec<Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new()
        .flexible(false)
        .from_writer(Vec::new());
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Data(format!("csv buffer: {e}")))
}

pub fn num(v: f64) -> String {
    v.to_string()
}

/// Square matrix with a `ticker` header row and label column.
pub fn matrix_rows(tickers: &[String], m: &DMatrix<f64>) -> Vec<Vec<String>> {
    let mut rows = Vec::with_capacity(tickers.len() + 1);
    let mut header = vec!["ticker".to_string()];
    header.extend(tickers.iter().cloned());
    rows.push(header);
    for (i, t) in tickers.iter().enumerate() {
        let mut row = vec![t.clone()];
        row.extend((0..m.ncols()).map(|j| num(m[(i, j)])));
        rows.push(row);
    }
    rows
}

pub fn vector_rows(tickers: &[String], column: &str, v: &DVector<f64>) -> Vec<Vec<String>> {
    let mut rows = vec![vec!["ticker".to_string(), column.to_string()]];
    rows.extend(
        tickers
            .iter()
            .zip(v.iter())
            .map(|(t, x)| vec![t.clone(), num(*x)]),
    );
    rows
}

/// Read a labelled square matrix as written by [`matrix_rows`]. A header
/// without the leading label cell is accepted too.
pub fn read_matrix(path: &Path) -> Result<(Vec<String>, DMatrix<f64>), CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let labelled = matches!(header.first().map(String::as_str), Some("" | "ticker"));
    let tickers: Vec<String> = if labelled {
        header[1..].to_vec()
    } else {
        header.clone()
    };
    let n = tickers.len();
    let mut values = Vec::with_capacity(n * n);
    for (row_idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let cells: Vec<&str> = rec.iter().collect();
        let cells = if labelled { &cells[1..] } else { &cells[..] };
        if cells.len() != n {
            return Err(CliError::Data(format!(
                "{}: row {} has {} values, expected {n}",
                path.display(),
                row_idx + 1,
                cells.len()
            )));
        }
        for c in cells {
            values.push(c.parse::<f64>().map_err(|_| {
                CliError::Data(format!(
                    "{}: row {}: `{c}` is not a number",
                    path.display(),
                    row_idx + 1
                ))
            })?);
        }
    }
    if values.len() != n * n || n == 0 {
        return Err(CliError::Data(format!(
            "{}: expected a non-empty square matrix, got {} values for {n} tickers",
            path.display(),
            values.len()
        )));
    }
    Ok((tickers, DMatrix::from_row_slice(n, n, &values)))
}

/// Read a `ticker,value` file, reordered to `tickers`.
pub fn read_vector(path: &Path, tickers: &[String]) -> Result<DVector<f64>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let (Some(t), Some(v)) = (rec.get(0), rec.get(1)) else {
            return Err(CliError::Data(format!("{}: short row", path.display())));
        };
        let v = v
            .parse::<f64>()
            .map_err(|_| CliError::Data(format!("{}: `{v}` is not a number", path.display())))?;
        pairs.push((t.to_string(), v));
    }
    let mut out = DVector::zeros(tickers.len());
    for (i, t) in tickers.iter().enumerate() {
        out[i] = pairs
            .iter()
            .find(|(name, _)| name == t)
            .map(|(_, v)| *v)
            .ok_or_else(|| CliError::Data(format!("{}: no entry for `{t}`", path.display())))?;
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct SpecStatus {
    pub strategy: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run; deliberately free of timestamps.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub library_version: &'static str,
    pub command: String,
    pub config_sha256: String,
    pub data_sha256: Option<String>,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub strategies: Vec<SpecStatus>,
    pub outputs: Vec<OutputEntry>,
}

impl Manifest {
    pub fn write(self, out: &mut OutputDir, name: &str) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(&self)
            .map_err(|e| CliError::Data(format!("manifest: {e}")))?;
        out.write(name, format!("{text}\n").as_bytes())
    }
}

pub fn outputs(out: &OutputDir) -> Vec<OutputEntry> {
    out.written()
        .iter()
        .map(|(file, sha256)| OutputEntry {
            file: file.clone(),
            sha256: sha256.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let tickers = vec!["A".to_string(), "B,C".to_string()];
        let m = DMatrix::from_row_slice(2, 2, &[0.1, -2e-17, -2e-17, 1.0 / 3.0]);
        let bytes = csv_bytes(matrix_rows(&tickers, &m)).unwrap();
        let p = dir.path().join("m.csv");
        fs::write(&p, bytes).unwrap();
        let (t, back) = read_matrix(&p).unwrap();
        assert_eq!(t, tickers);
        assert_eq!(back, m);
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
