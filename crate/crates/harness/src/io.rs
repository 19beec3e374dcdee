//! CSV matrix files: a `rows,cols` header line followed by one comma
//! separated line per row. Values are printed with the shortest
//! representation that parses back to the identical f64, so a write/read
//! cycle is lossless.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use pwrc_core::Matrix;

use crate::error::{HarnessError, Result};

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| HarnessError::io(path, e);
    writeln!(w, "{},{}", m.rows(), m.cols()).map_err(io_err)?;
    for i in 0..m.rows() {
        let mut line = String::new();
        for j in 0..m.cols() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&m[(i, j)].to_string());
        }
        writeln!(w, "{line}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| HarnessError::parse(path, 1, "empty file"))?;
    let header = header.map_err(|e| HarnessError::io(path, e))?;
    let mut dims = header.split(',');
    let rows: usize = parse_field(path, 1, dims.next(), "rows")?;
    let cols: usize = parse_field(path, 1, dims.next(), "cols")?;
    if dims.next().is_some() {
        return Err(HarnessError::parse(path, 1, "header must be exactly `rows,cols`"));
    }

    let mut data = Vec::with_capacity(rows.saturating_mul(cols));
    let mut seen = 0usize;
    for (idx, line) in lines {
        let line = line.map_err(|e| HarnessError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        if seen == rows {
            return Err(HarnessError::parse(path, idx + 1, format!("more than {rows} data rows")));
        }
        for (col, field) in line.split(',').enumerate() {
            if col == cols {
                return Err(HarnessError::parse(path, idx + 1, format!("more than {cols} columns")));
            }
            let value: f64 = field.trim().parse().map_err(|_| {
                HarnessError::parse(path, idx + 1, format!("bad number {field:?}"))
            })?;
            data.push(value);
        }
        if data.len() % cols != 0 {
            return Err(HarnessError::parse(path, idx + 1, format!("expected {cols} columns")));
        }
        seen += 1;
    }
    if seen != rows {
        return Err(HarnessError::parse(path, seen + 1, format!("expected {rows} data rows, got {seen}")));
    }
    Ok(Matrix::new(rows, cols, data)?)
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    field: Option<&str>,
    what: &str,
) -> Result<T> {
    field
        .and_then(|f| f.trim().parse().ok())
        .ok_or_else(|| HarnessError::parse(path, line, format!("bad {what} in header")))
}
