//! JSON input formats for the command-line front end.
//!
//! Matrices are arrays of rows. A two-factor pair is `{"l": rows, "r": rows}`
//! with optional `"rel_tol"`; a decomposition is
//! `{"factors": [rows, …], "core": {"dims": [...], "data": [...]}}` with the
//! core data in row-major order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseTensor};
use crate::tucker::TuckerDecomposition;
use crate::two_factor::TwoFactorPair;

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DenseMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().position(|row| row.len() != c) {
        return Err(Error::DimensionMismatch(format!(
            "row {bad} has {} entries, expected {c}",
            rows[bad].len()
        )));
    }
    let m = DenseMatrix::from_fn(r, c, |i, j| rows[i][j]);
    crate::linalg::check_finite(&m, "matrix input")?;
    Ok(m)
}

pub fn matrix_to_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|row| row.iter().copied().collect()).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairFile {
    pub l: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorFile {
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub factors: Vec<Vec<Vec<f64>>>,
    pub core: TensorFile,
}

pub fn parse_pair(json: &str) -> Result<TwoFactorPair> {
    let f: PairFile = serde_json::from_str(json)?;
    TwoFactorPair::with_tolerance(matrix_from_rows(&f.l)?, matrix_from_rows(&f.r)?, f.rel_tol)
}

pub fn pair_to_json(p: &TwoFactorPair) -> Result<String> {
    Ok(serde_json::to_string_pretty(&PairFile {
        l: matrix_to_rows(p.l()),
        r: matrix_to_rows(p.r()),
        rel_tol: None,
    })?)
}

pub fn parse_decomposition(json: &str) -> Result<TuckerDecomposition> {
    let f: DecompositionFile = serde_json::from_str(json)?;
    let factors = f
        .factors
        .iter()
        .map(|rows| matrix_from_rows(rows))
        .collect::<Result<Vec<_>>>()?;
    TuckerDecomposition::new(factors, DenseTensor::new(f.core.dims, f.core.data)?)
}

pub fn decomposition_to_json(d: &TuckerDecomposition) -> Result<String> {
    Ok(serde_json::to_string_pretty(&DecompositionFile {
        factors: d.factors().iter().map(matrix_to_rows).collect(),
        core: TensorFile {
            dims: d.core().dims().to_vec(),
            data: d.core().data().to_vec(),
        },
    })?)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_pair(path: &Path) -> Result<TwoFactorPair> {
    parse_pair(&read(path)?)
}

pub fn read_decomposition(path: &Path) -> Result<TuckerDecomposition> {
    parse_decomposition(&read(path)?)
}
