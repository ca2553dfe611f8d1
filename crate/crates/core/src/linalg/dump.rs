//! CSV debug dumps.
//!
//! Matrices: a header line `# dims=RxC`, then one line per row. Tensors: a
//! header `# dims=n1xn2x...xnD`, then the row-major entries reshaped to
//! `(n1·…·n_{D-1}) × n_D` lines.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{DenseMatrix, DenseTensor};
use crate::error::Result;

fn join(values: impl Iterator<Item = f64>) -> String {
    let mut line = String::new();
    for (i, v) in values.enumerate() {
        if i > 0 {
            line.push(',');
        }
        let _ = write!(line, "{v:?}");
    }
    line
}

pub fn matrix_to_csv(m: &DenseMatrix) -> String {
    let mut out = format!("# dims={}x{}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        out.push_str(&join(m.row(i).iter().copied()));
        out.push('\n');
    }
    out
}

pub fn tensor_to_csv(t: &DenseTensor) -> String {
    let dims: Vec<String> = t.dims().iter().map(|d| d.to_string()).collect();
    let mut out = format!("# dims={}\n", dims.join("x"));
    let last = *t.dims().last().expect("order >= 1");
    if last > 0 {
        for chunk in t.data().chunks(last) {
            out.push_str(&join(chunk.iter().copied()));
            out.push('\n');
        }
    }
    out
}

pub fn write_matrix_csv(path: &Path, m: &DenseMatrix) -> Result<()> {
    std::fs::File::create(path)?.write_all(matrix_to_csv(m).as_bytes())?;
    Ok(())
}

pub fn write_tensor_csv(path: &Path, t: &DenseTensor) -> Result<()> {
    std::fs::File::create(path)?.write_all(tensor_to_csv(t).as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn matrix_dump_is_row_major() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 0.1]);
        assert_eq!(matrix_to_csv(&m), "# dims=2x3\n1.0,2.0,3.0\n4.0,5.0,0.1\n");
    }

    #[test]
    fn tensor_dump_roundtrips_values() {
        let t = DenseTensor::from_fn(vec![2, 2, 2], |ix| (ix[0] * 4 + ix[1] * 2 + ix[2]) as f64 / 3.0);
        let csv = tensor_to_csv(&t);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("# dims=2x2x2"));
        let parsed: Vec<f64> = lines
            .flat_map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
            .collect();
        assert_eq!(parsed, t.data());
    }
}
