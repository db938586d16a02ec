//! Matrix Market coordinate-format reader and writer.
//!
//! Covers the exchange format as published by the SuiteSparse collection:
//! `real`, `integer`, and `pattern` fields with `general` or `symmetric`
//! symmetry. Symmetric inputs are expanded to both triangles on ingestion so
//! downstream code only ever sees general matrices. Parse failures report
//! the offending 1-based line number.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use crate::coo::{CooEntry, CooMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses a Matrix Market coordinate file into a normalized `CooMatrix`.
///
/// Pattern entries receive the value 1.0; 1-based indices are converted to
/// 0-based; symmetric off-diagonal entries are mirrored.
pub fn parse_matrix_market(text: &str) -> Result<CooMatrix> {
    let mut lines = text.lines().enumerate();

    let (header_no, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty input"))?;
    let header_no = header_no + 1;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(parse_err(header_no, "malformed header, expected '%%MatrixMarket matrix coordinate <field> <symmetry>'"));
    }
    if tokens[1] != "matrix" || tokens[2] != "coordinate" {
        return Err(parse_err(
            header_no,
            format!("unsupported object/format '{} {}', only 'matrix coordinate' is handled", tokens[1], tokens[2]),
        ));
    }
    let field = match tokens[3].as_str() {
        "real" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(parse_err(header_no, format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(parse_err(header_no, format!("unsupported symmetry '{other}'"))),
    };

    // Size line: first non-comment, non-blank line after the header.
    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries: Vec<CooEntry> = Vec::new();
    let mut seen = 0usize;

    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let mut parts = line.split_whitespace();
        if size.is_none() {
            let n_rows = next_number::<usize>(&mut parts, line_no, "row count")?;
            let n_cols = next_number::<usize>(&mut parts, line_no, "column count")?;
            let nnz = next_number::<usize>(&mut parts, line_no, "non-zero count")?;
            if parts.next().is_some() {
                return Err(parse_err(line_no, "trailing tokens on size line"));
            }
            size = Some((n_rows, n_cols, nnz));
            entries.reserve(nnz);
            continue;
        }

        let (n_rows, n_cols, nnz) = size.unwrap();
        let row = next_number::<usize>(&mut parts, line_no, "row index")?;
        let col = next_number::<usize>(&mut parts, line_no, "column index")?;
        let val = match field {
            Field::Pattern => 1.0,
            Field::Real | Field::Integer => next_number::<f64>(&mut parts, line_no, "value")?,
        };
        if parts.next().is_some() {
            return Err(parse_err(line_no, "trailing tokens on entry line"));
        }
        if row == 0 || row > n_rows {
            return Err(parse_err(line_no, format!("row index out of range: {row} not in 1..={n_rows}")));
        }
        if col == 0 || col > n_cols {
            return Err(parse_err(line_no, format!("column index out of range: {col} not in 1..={n_cols}")));
        }
        seen += 1;
        if seen > nnz {
            return Err(parse_err(line_no, format!("more than the declared {nnz} entries")));
        }
        let (r, c) = (row as u32 - 1, col as u32 - 1);
        entries.push(CooEntry::new(r, c, val));
        if symmetry == Symmetry::Symmetric && r != c {
            entries.push(CooEntry::new(c, r, val));
        }
    }

    let (n_rows, n_cols, nnz) = size.ok_or_else(|| parse_err(header_no, "missing size line"))?;
    if seen != nnz {
        return Err(parse_err(
            header_no,
            format!("declared {nnz} entries but found {seen}"),
        ));
    }
    if symmetry == Symmetry::Symmetric && n_rows != n_cols {
        return Err(parse_err(header_no, "symmetric matrix must be square"));
    }

    CooMatrix::new(n_rows, n_cols, entries).map_err(|e| match e {
        // Duplicates surface here after normalization; the exact source line
        // is gone, so report the coordinates instead.
        Error::InvalidArgument(msg) => parse_err(header_no, msg),
        other => other,
    })
}

fn next_number<T: std::str::FromStr>(
    parts: &mut std::str::SplitWhitespace<'_>,
    line_no: usize,
    what: &str,
) -> Result<T> {
    let tok = parts
        .next()
        .ok_or_else(|| parse_err(line_no, format!("missing {what}")))?;
    tok.parse::<T>()
        .map_err(|_| parse_err(line_no, format!("invalid {what} '{tok}'")))
}

/// Reads and parses a Matrix Market file from disk.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CooMatrix> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_matrix_market(&text)
}

/// Serializes a matrix as `coordinate real general` with 1-based indices.
///
/// Values print in Rust's shortest round-trip form, so parse -> write ->
/// parse is the identity.
pub fn write_matrix_market(m: &CooMatrix, w: &mut impl Write) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz())?;
    for e in m.entries() {
        writeln!(w, "{} {} {}", e.row + 1, e.col + 1, e.val)?;
    }
    Ok(())
}

/// `write_matrix_market` into a string.
pub fn matrix_market_string(m: &CooMatrix) -> String {
    let mut buf = Vec::new();
    write_matrix_market(m, &mut buf).expect("write to Vec cannot fail");
    String::from_utf8(buf).expect("output is ASCII")
}
