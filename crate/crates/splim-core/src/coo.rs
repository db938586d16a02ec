//! Coordinate-format sparse matrices and their distribution statistics.
//!
//! `CooMatrix` is the canonical representation used for ingestion, for the
//! reference oracle, and for final pipeline outputs. Entries are kept
//! normalized: sorted lexicographically by (row, col) with no duplicates.

use serde::Serialize;

use crate::{Error, Result};

/// One non-zero: row index, column index, value.
///
/// Indices are 32-bit with the sign bit reserved as the hardware invalidity
/// marker, so matrix dimensions are restricted to below 2^31.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CooEntry {
    pub row: u32,
    pub col: u32,
    pub val: f64,
}

impl CooEntry {
    pub fn new(row: u32, col: u32, val: f64) -> Self {
        CooEntry { row, col, val }
    }
}

/// Normalized sparse triple list.
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<CooEntry>,
}

/// Largest representable index: the sign bit of a 32-bit word marks
/// invalidity in the hardware, so genuine indices stay below 2^31.
pub const MAX_DIM: usize = 1 << 31;

impl CooMatrix {
    /// Builds a normalized matrix from arbitrary-order entries.
    ///
    /// Sorts by (row, col) and rejects out-of-range indices and duplicate
    /// coordinates.
    pub fn new(n_rows: usize, n_cols: usize, mut entries: Vec<CooEntry>) -> Result<Self> {
        if n_rows >= MAX_DIM || n_cols >= MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "matrix dimension {n_rows}x{n_cols} exceeds the 2^31-1 index limit"
            )));
        }
        for e in &entries {
            if (e.row as usize) >= n_rows || (e.col as usize) >= n_cols {
                return Err(Error::InvalidArgument(format!(
                    "entry ({}, {}) out of range for a {}x{} matrix",
                    e.row, e.col, n_rows, n_cols
                )));
            }
        }
        entries.sort_by_key(|e| (e.row, e.col));
        for w in entries.windows(2) {
            if w[0].row == w[1].row && w[0].col == w[1].col {
                return Err(Error::InvalidArgument(format!(
                    "duplicate entry at ({}, {})",
                    w[0].row, w[0].col
                )));
            }
        }
        Ok(CooMatrix {
            n_rows,
            n_cols,
            entries,
        })
    }

    pub fn empty(n_rows: usize, n_cols: usize) -> Self {
        CooMatrix {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[CooEntry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<CooEntry> {
        self.entries
    }

    /// Entry (r, c, v) becomes (c, r, v); the result is re-normalized.
    pub fn transpose(&self) -> CooMatrix {
        let mut entries: Vec<CooEntry> = self
            .entries
            .iter()
            .map(|e| CooEntry::new(e.col, e.row, e.val))
            .collect();
        entries.sort_by_key(|e| (e.row, e.col));
        CooMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            entries,
        }
    }

    /// Non-zero count of every row, empty rows included.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_rows];
        for e in &self.entries {
            counts[e.row as usize] += 1;
        }
        counts
    }

    /// Non-zero count of every column, empty columns included.
    pub fn col_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_cols];
        for e in &self.entries {
            counts[e.col as usize] += 1;
        }
        counts
    }

    /// Row-axis statistics: mean / population deviation of per-row counts.
    pub fn row_stats(&self) -> MatrixStats {
        MatrixStats::from_counts(self.row_counts(), self.n_rows, self.n_cols)
    }

    /// Column-axis statistics, used when the condensing axis is columns.
    pub fn col_stats(&self) -> MatrixStats {
        MatrixStats::from_counts(self.col_counts(), self.n_cols, self.n_rows)
    }
}

/// Non-zero distribution summary along one axis.
///
/// `nnz_r[i]` is the count in row `i` (or column `i` when computed along
/// columns); `nnz_a` its mean, `sigma` its population standard deviation,
/// and `tau` the overall fill fraction nnz / (rows * cols).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixStats {
    pub nnz: usize,
    pub nnz_r: Vec<usize>,
    pub nnz_a: f64,
    pub sigma: f64,
    pub tau: f64,
}

impl MatrixStats {
    fn from_counts(counts: Vec<usize>, axis_len: usize, other_len: usize) -> MatrixStats {
        let nnz: usize = counts.iter().sum();
        if axis_len == 0 || nnz == 0 {
            return MatrixStats {
                nnz,
                nnz_r: counts,
                nnz_a: 0.0,
                sigma: 0.0,
                tau: 0.0,
            };
        }
        let n = axis_len as f64;
        let mean = nnz as f64 / n;
        let var = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        let cells = axis_len as f64 * other_len as f64;
        MatrixStats {
            nnz,
            nnz_r: counts,
            nnz_a: mean,
            sigma: var.sqrt(),
            tau: nnz as f64 / cells,
        }
    }
}

/// Row-axis statistics of `m` (mean, population sigma, fill fraction).
pub fn compute_stats(m: &CooMatrix) -> MatrixStats {
    m.row_stats()
}
