//! Matrix files: MatrixMarket dense arrays and headerless CSV.
//!
//! Writers emit 17 significant digits, which round-trips every `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cur::{CurFactors, IndexList, MiddleKind};
use crate::error::{CurError, Result};
use crate::linalg::{ensure_finite, Matrix};

const MM_BANNER: &str = "%%MatrixMarket matrix array real general";

fn parse_err(line: usize, message: impl Into<String>) -> CurError {
    CurError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_value(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("'{}' is not a number", token.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("'{}' is not finite", token.trim())));
    }
    Ok(v)
}

/// Parses a dense MatrixMarket array (column-major body).
pub fn parse_matrix_market(text: &str) -> Result<Matrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, banner) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let fields: Vec<String> = banner.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(1, format!("expected '{MM_BANNER}' header")));
    }
    if fields[2] != "array" {
        return Err(parse_err(1, format!("unsupported storage '{}' (only dense arrays)", fields[2])));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(parse_err(1, format!("unsupported field '{}'", fields[3])));
    }
    if fields[4] != "general" {
        return Err(parse_err(1, format!("unsupported symmetry '{}'", fields[4])));
    }

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(size_line, "size line must hold 'rows cols'"));
    }
    let rows: usize = dims[0].parse().map_err(|_| parse_err(size_line, "bad row count"))?;
    let cols: usize = dims[1].parse().map_err(|_| parse_err(size_line, "bad column count"))?;
    if rows == 0 || cols == 0 {
        return Err(parse_err(size_line, "matrix dimensions must be positive"));
    }

    let mut values = Vec::with_capacity(rows * cols);
    let mut last_line = size_line;
    for (line, content) in body {
        for token in content.split_whitespace() {
            if values.len() == rows * cols {
                return Err(parse_err(line, "more entries than rows x cols"));
            }
            values.push(parse_value(token, line)?);
        }
        last_line = line;
    }
    if values.len() != rows * cols {
        return Err(parse_err(
            last_line,
            format!("expected {} entries, found {}", rows * cols, values.len()),
        ));
    }
    Ok(Matrix::from_column_slice(rows, cols, &values))
}

/// Parses headerless comma-separated rows.
pub fn parse_csv(text: &str) -> Result<Matrix> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, content) in text.lines().enumerate() {
        let line = i + 1;
        if content.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = content
            .split(',')
            .map(|t| parse_value(t, line))
            .collect::<Result<_>>()?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(parse_err(line, format!("row has {} fields, expected {c}", row.len())))
            }
            _ => {}
        }
        data.extend(row);
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_err(1, "no data rows"))?;
    Ok(Matrix::from_row_slice(rows, cols, &data))
}

/// Detects MatrixMarket by its banner and falls back to CSV.
pub fn parse_matrix(text: &str) -> Result<Matrix> {
    if text.trim_start().starts_with("%%") {
        parse_matrix_market(text)
    } else {
        parse_csv(text)
    }
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn format_matrix_market(a: &Matrix) -> String {
    let mut out = String::with_capacity(a.len() * 25 + 64);
    let _ = writeln!(out, "{MM_BANNER}");
    let _ = writeln!(out, "{} {}", a.nrows(), a.ncols());
    // nalgebra storage is column-major, matching the array body order.
    for v in a.iter() {
        let _ = writeln!(out, "{v:.16e}");
    }
    out
}

pub fn format_csv(a: &Matrix) -> String {
    let mut out = String::with_capacity(a.len() * 25);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{:.16e}", a[(i, j)]);
        }
        out.push('\n');
    }
    out
}

/// Writes CSV when the extension is `.csv`, MatrixMarket otherwise.
pub fn write_matrix(path: impl AsRef<Path>, a: &Matrix) -> Result<()> {
    ensure_finite(a)?;
    let path = path.as_ref();
    let is_csv = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("csv"))
        .unwrap_or(false);
    let text = if is_csv { format_csv(a) } else { format_matrix_market(a) };
    fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct FactorSidecar {
    row_idx: Vec<usize>,
    col_idx: Vec<usize>,
    middle: MiddleKind,
}

/// Stores `c.mtx`, `u.mtx`, `r.mtx` and `factors.json` under `dir`.
pub fn write_factors(dir: impl AsRef<Path>, f: &CurFactors) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_matrix(dir.join("c.mtx"), &f.c)?;
    write_matrix(dir.join("u.mtx"), &f.u)?;
    write_matrix(dir.join("r.mtx"), &f.r)?;
    let sidecar = FactorSidecar {
        row_idx: f.row_idx.indices().to_vec(),
        col_idx: f.col_idx.indices().to_vec(),
        middle: f.middle,
    };
    fs::write(dir.join("factors.json"), serde_json::to_string_pretty(&sidecar)? + "\n")?;
    Ok(())
}

pub fn read_factors(dir: impl AsRef<Path>) -> Result<CurFactors> {
    let dir = dir.as_ref();
    let c = read_matrix(dir.join("c.mtx"))?;
    let u = read_matrix(dir.join("u.mtx"))?;
    let r = read_matrix(dir.join("r.mtx"))?;
    let sidecar: FactorSidecar = serde_json::from_str(&fs::read_to_string(dir.join("factors.json"))?)?;
    let row_idx = IndexList::new(sidecar.row_idx, c.nrows())?;
    let col_idx = IndexList::new(sidecar.col_idx, r.ncols())?;
    if u.shape() != (row_idx.len(), col_idx.len())
        || c.ncols() != col_idx.len()
        || r.nrows() != row_idx.len()
    {
        return Err(CurError::shape("stored factors disagree with the index lists"));
    }
    Ok(CurFactors {
        row_idx,
        col_idx,
        c,
        r,
        u,
        middle: sidecar.middle,
    })
}
