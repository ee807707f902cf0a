//! Text formats: the `d,n`-headed CSV matrix format and the plain-text
//! model file. All floats are written with 17 significant digits, which
//! round-trips f64 exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Result, SpcaError};
use crate::types::{DataMatrix, ProjectionBasis, SampleWeights};

/// Round-trip-exact decimal rendering of an f64 (17 significant digits).
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(tok: &str, path: &Path, what: &str) -> Result<f64> {
    tok.trim()
        .parse::<f64>()
        .map_err(|_| SpcaError::parse(path.display().to_string(), format!("invalid {what}: {tok:?}")))
}

/// Serializes a matrix as `d,n` followed by d rows of n comma-separated
/// values.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{},{}", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format_f64(m[(r, c)])).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn write_matrix_csv(m: &DMatrix<f64>, path: &Path) -> Result<()> {
    fs::write(path, matrix_to_csv(m)).map_err(|e| SpcaError::io(path.display().to_string(), e))
}

fn parse_matrix_lines<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
    path: &Path,
) -> Result<DMatrix<f64>> {
    let header = lines
        .next()
        .ok_or_else(|| SpcaError::parse(path.display().to_string(), "missing matrix header"))?;
    let mut parts = header.split(',');
    let d: usize = parts
        .next()
        .and_then(|t| t.trim().parse().ok())
        .ok_or_else(|| SpcaError::parse(path.display().to_string(), "invalid row count"))?;
    let n: usize = parts
        .next()
        .and_then(|t| t.trim().parse().ok())
        .ok_or_else(|| SpcaError::parse(path.display().to_string(), "invalid column count"))?;
    let mut m = DMatrix::zeros(d, n);
    for r in 0..d {
        let line = lines.next().ok_or_else(|| {
            SpcaError::parse(
                path.display().to_string(),
                format!("matrix truncated at row {r} of {d}"),
            )
        })?;
        let values: Vec<&str> = line.split(',').collect();
        if values.len() != n {
            return Err(SpcaError::parse(
                path.display().to_string(),
                format!("row {r} has {} values, expected {n}", values.len()),
            ));
        }
        for (c, tok) in values.iter().enumerate() {
            m[(r, c)] = parse_f64(tok, path, "matrix entry")?;
        }
    }
    Ok(m)
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| SpcaError::io(path.display().to_string(), e))?;
    parse_matrix_lines(&mut text.lines(), path)
}

pub fn read_data_matrix(path: &Path) -> Result<DataMatrix> {
    DataMatrix::new(read_matrix_csv(path)?)
}

/// A trained model on disk: hyperparameters, the basis, and the final
/// per-sample weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub k: usize,
    pub p: f64,
    pub eta: f64,
    pub c: f64,
    pub basis: ProjectionBasis,
    pub weights: SampleWeights,
}

/// Writes the model format: `k=`, `p=`, `eta=`, `c=` header lines, U in
/// the CSV matrix format, then one comma-separated line of weights.
pub fn write_model(model: &ModelFile, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "k={}", model.k);
    let _ = writeln!(out, "p={}", format_f64(model.p));
    let _ = writeln!(out, "eta={}", format_f64(model.eta));
    let _ = writeln!(out, "c={}", format_f64(model.c));
    out.push_str(&matrix_to_csv(model.basis.matrix()));
    let row: Vec<String> = model.weights.values().iter().map(|&w| format_f64(w)).collect();
    let _ = writeln!(out, "{}", row.join(","));
    fs::write(path, out).map_err(|e| SpcaError::io(path.display().to_string(), e))
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path).map_err(|e| SpcaError::io(path.display().to_string(), e))?;
    let mut lines = text.lines();
    let mut header = |key: &str| -> Result<String> {
        let line = lines
            .next()
            .ok_or_else(|| SpcaError::parse(path.display().to_string(), format!("missing {key}=")))?;
        line.strip_prefix(&format!("{key}="))
            .map(str::to_owned)
            .ok_or_else(|| {
                SpcaError::parse(
                    path.display().to_string(),
                    format!("expected {key}=... line, got {line:?}"),
                )
            })
    };
    let k: usize = header("k")?
        .trim()
        .parse()
        .map_err(|_| SpcaError::parse(path.display().to_string(), "invalid k"))?;
    let p = parse_f64(&header("p")?, path, "p")?;
    let eta = parse_f64(&header("eta")?, path, "eta")?;
    let c = parse_f64(&header("c")?, path, "c")?;

    let u = parse_matrix_lines(&mut lines, path)?;
    let weights_line = lines
        .next()
        .ok_or_else(|| SpcaError::parse(path.display().to_string(), "missing weights line"))?;
    let w: Vec<f64> = weights_line
        .split(',')
        .map(|tok| parse_f64(tok, path, "weight"))
        .collect::<Result<_>>()?;
    Ok(ModelFile {
        k,
        p,
        eta,
        c,
        basis: ProjectionBasis::new(u)?,
        weights: SampleWeights::new(w)?,
    })
}
