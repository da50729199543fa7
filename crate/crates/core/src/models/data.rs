use std::path::Path;

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Reads a numeric CSV with a header row into an `N x D` matrix.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let data_err = |reason: String| Error::Data {
        path: path.to_path_buf(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => data_err(format!("{other:?}")),
        })?;
    let ncols = reader.headers().map_err(|e| data_err(e.to_string()))?.len();
    let mut values = Vec::new();
    let mut nrows = 0;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| data_err(e.to_string()))?;
        if record.len() != ncols {
            return Err(data_err(format!(
                "row {} has {} fields, header has {ncols}",
                line + 2,
                record.len()
            )));
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                data_err(format!(
                    "row {} column {}: `{field}` is not a number",
                    line + 2,
                    col + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(data_err(format!(
                    "row {} column {}: non-finite value",
                    line + 2,
                    col + 1
                )));
            }
            values.push(v);
        }
        nrows += 1;
    }
    if nrows == 0 {
        return Err(data_err("no data rows".into()));
    }
    Ok(DMatrix::from_row_slice(nrows, ncols, &values))
}

/// Reads a single-column numeric CSV with a header row.
pub fn read_vector_csv(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix_csv(path)?;
    if m.ncols() != 1 {
        return Err(Error::Data {
            path: path.to_path_buf(),
            reason: format!("expected a single column, found {}", m.ncols()),
        });
    }
    Ok(m.column(0).iter().copied().collect())
}
