use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mixture::Dataset;

/// Write via a temporary file in the same directory, then rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// Writes pre-formatted string records under a header.
pub fn write_csv_records(path: &Path, header: &[String], rows: Vec<Vec<String>>) -> Result<()> {
    write_atomic(path, &csv_bytes(header, rows.into_iter())?)
}

/// Header plus numeric rows.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn read_table(path: &Path) -> Result<Table> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let file = std::fs::File::open(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(parse_err(0, "file is empty; expected a header line".into()));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, field)| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(parse_err(
                    line,
                    format!("column {} ('{field}') is not a finite number", c + 1),
                )),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(1, "header present but no data rows".into()));
    }
    Ok(Table { header, rows })
}

/// Columns `x0..x{d-1}`, plus a trailing `label` column when labels are present.
pub fn write_dataset_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mut header: Vec<String> = (0..data.dim()).map(|j| format!("x{j}")).collect();
    let labels = data.labels();
    if labels.is_some() {
        header.push("label".into());
    }
    let rows = data.rows().enumerate().map(|(i, r)| {
        let mut out: Vec<String> = r.iter().map(|v| format_f64(*v)).collect();
        if let Some(l) = labels {
            out.push(l[i].to_string());
        }
        out
    });
    write_atomic(path, &csv_bytes(&header, rows)?)
}

/// Reads a dataset; a final column named `label` becomes the label vector.
pub fn read_dataset_csv(path: &Path) -> Result<Dataset> {
    let t = read_table(path)?;
    let has_labels = t.header.last().is_some_and(|h| h == "label");
    let dim = t.header.len() - usize::from(has_labels);
    if dim == 0 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "no feature columns".into(),
        });
    }
    let mut labels = Vec::with_capacity(t.rows.len());
    let mut values = Vec::with_capacity(t.rows.len() * dim);
    for (i, r) in t.rows.iter().enumerate() {
        values.extend_from_slice(&r[..dim]);
        if has_labels {
            let l = r[dim];
            if l < 0.0 || l.fract() != 0.0 {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 2,
                    message: format!("label {l} is not a non-negative integer"),
                });
            }
            labels.push(l as usize);
        }
    }
    let d = Dataset::from_flat(t.rows.len(), dim, values)?;
    if has_labels {
        d.with_labels(labels)
    } else {
        Ok(d)
    }
}

pub fn write_matrix_csv(m: &DMatrix<f64>, header: &[String], path: &Path) -> Result<()> {
    Error::check_dim("CSV header", m.ncols(), header.len())?;
    let rows = m.row_iter().map(|r| r.iter().map(|v| format_f64(*v)).collect());
    write_atomic(path, &csv_bytes(header, rows)?)
}

pub fn read_matrix_csv(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let t = read_table(path)?;
    let m = DMatrix::from_fn(t.rows.len(), t.header.len(), |i, j| t.rows[i][j]);
    Ok((t.header, m))
}
