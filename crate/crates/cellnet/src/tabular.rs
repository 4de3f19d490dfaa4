//! Scattered data as CSV: a header row, numeric cells, one label column.

use std::io::Write;
use std::path::Path;

use cellnet_core::Dataset;

use crate::error::{Error, Result};

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::Csv {
            path: path.to_path_buf(),
            line,
            reason: format!("ragged row: {len} fields, expected {expected_len}"),
        },
        other => Error::Csv {
            path: path.to_path_buf(),
            line,
            reason: format!("{other:?}"),
        },
    }
}

/// Features are every column except `label_column`, in header order.
pub fn load_csv(path: &Path, label_column: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let label = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::Csv {
            path: path.to_path_buf(),
            line: 1,
            reason: format!(
                "label column `{label_column}` not found; available columns: {}",
                headers.iter().collect::<Vec<_>>().join(", ")
            ),
        })?;
    let d = headers.len() - 1;
    if d == 0 {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            line: 1,
            reason: "no feature columns".into(),
        });
    }
    let mut features = Vec::new();
    let mut targets = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Csv {
                path: path.to_path_buf(),
                line,
                reason: format!("column `{}`: `{cell}` is not a number", &headers[col]),
            })?;
            if col == label {
                targets.push(v);
            } else {
                features.push(v);
            }
        }
    }
    if targets.is_empty() {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            line: 1,
            reason: "empty dataset".into(),
        });
    }
    Ok(Dataset::new(d, features, targets)?)
}

/// Writes `x0..x{d-1}` feature columns followed by `label_column`.
pub fn write_csv<W: Write>(out: W, data: &Dataset, label_column: &str) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..data.dimensions()).map(|j| format!("x{j}")).collect();
    header.push(label_column.to_string());
    w.write_record(&header)?;
    for (p, t) in data.points().zip(data.targets()) {
        w.write_record(p.iter().chain(std::iter::once(t)).map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(path: &Path, data: &Dataset, label_column: &str) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(std::io::BufWriter::new(file), data, label_column).map_err(|e| csv_error(path, e))
}
