//! Compressed sparse formats and the hybrid ELLPACK+COO split.
//!
//! ELLPACK geometry: the grid is `width x positions`. In the row-wise
//! orientation each column of the source matrix is condensed upward, so
//! position j corresponds to source column j and the slot's index field
//! carries the original row. The column-wise orientation condenses each row
//! leftward: position j is source row j and the index field carries the
//! original column. Within a position, valid slots pack at the lowest vector
//! indices in ascending original-index order.
//!
//! Slot invalidity is encoded in the index sign bit, exactly the marker the
//! in-situ search hardware tests: any stored index >= 2^31 is padding.

use crate::coo::{CooEntry, CooMatrix};
use crate::Result;
use crate::coo::MatrixStats;

/// Sign bit of a 32-bit index word; set means "invalid slot".
pub const INVALID_INDEX: u32 = 1 << 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    RowWise,
    ColumnWise,
}

/// One ELLPACK cell: original coordinate (or the invalid marker) plus value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllSlot {
    pub index: u32,
    pub value: f64,
}

impl EllSlot {
    pub fn invalid() -> Self {
        EllSlot {
            index: INVALID_INDEX,
            value: 0.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.index & INVALID_INDEX == 0
    }
}

/// Fixed-width condensed format; see the module docs for the geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct EllpackMatrix {
    pub orientation: Orientation,
    pub n_rows: usize,
    pub n_cols: usize,
    pub width: usize,
    slots: Vec<EllSlot>,
}

impl EllpackMatrix {
    /// Length of every condensed vector: source columns for row-wise,
    /// source rows for column-wise.
    pub fn positions(&self) -> usize {
        match self.orientation {
            Orientation::RowWise => self.n_cols,
            Orientation::ColumnWise => self.n_rows,
        }
    }

    /// Condensed vector `v` as a positions-long slice.
    pub fn vector(&self, v: usize) -> &[EllSlot] {
        let p = self.positions();
        &self.slots[v * p..(v + 1) * p]
    }

    pub fn slot(&self, v: usize, pos: usize) -> EllSlot {
        self.slots[v * self.positions() + pos]
    }

    /// Count of valid slots.
    pub fn valid_count(&self) -> usize {
        self.slots.iter().filter(|s| s.is_valid()).count()
    }

    /// Invalid (padding) slot count: width * positions - valid.
    pub fn padding(&self) -> usize {
        self.slots.len() - self.valid_count()
    }

    /// Expands back to a normalized COO matrix.
    pub fn to_coo(&self) -> CooMatrix {
        let p = self.positions();
        let mut entries = Vec::with_capacity(self.valid_count());
        for v in 0..self.width {
            for j in 0..p {
                let s = self.slot(v, j);
                if !s.is_valid() {
                    continue;
                }
                let (row, col) = match self.orientation {
                    Orientation::RowWise => (s.index, j as u32),
                    Orientation::ColumnWise => (j as u32, s.index),
                };
                entries.push(CooEntry::new(row, col, s.value));
            }
        }
        CooMatrix::new(self.n_rows, self.n_cols, entries).expect("slots were in range")
    }

    /// Aligned text table of the grid, one line per condensed vector.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let p = self.positions();
        let _ = writeln!(
            out,
            "ellpack {:?} width={} positions={}",
            self.orientation, self.width, p
        );
        for v in 0..self.width {
            let _ = write!(out, "V{v:<3}|");
            for j in 0..p {
                let s = self.slot(v, j);
                if s.is_valid() {
                    let _ = write!(out, " {:>4}:{:<8.4}", s.index, s.value);
                } else {
                    let _ = write!(out, " {:>4} {:<8}", "-", "-");
                }
            }
            let _ = writeln!(out);
        }
        out
    }
}

/// Converts to ELLPACK with width = the maximum per-position count.
pub fn to_ellpack(m: &CooMatrix, orientation: Orientation) -> EllpackMatrix {
    build_ellpack(m, orientation, usize::MAX).0
}

fn build_ellpack(
    m: &CooMatrix,
    orientation: Orientation,
    width_limit: usize,
) -> (EllpackMatrix, Vec<CooEntry>) {
    let positions = match orientation {
        Orientation::RowWise => m.n_cols(),
        Orientation::ColumnWise => m.n_rows(),
    };
    let counts = match orientation {
        Orientation::RowWise => m.col_counts(),
        Orientation::ColumnWise => m.row_counts(),
    };
    let max_count = counts.iter().copied().max().unwrap_or(0);
    let width = max_count.min(width_limit);

    let mut slots = vec![EllSlot::invalid(); width * positions];
    let mut overflow = Vec::new();
    let mut cursor = vec![0usize; positions];
    // Entries are sorted by (row, col), so each position fills in ascending
    // original-index order for either orientation.
    for e in m.entries() {
        let (pos, index) = match orientation {
            Orientation::RowWise => (e.col as usize, e.row),
            Orientation::ColumnWise => (e.row as usize, e.col),
        };
        let v = cursor[pos];
        if v < width {
            slots[v * positions + pos] = EllSlot {
                index,
                value: e.val,
            };
            cursor[pos] = v + 1;
        } else {
            overflow.push(*e);
        }
    }

    (
        EllpackMatrix {
            orientation,
            n_rows: m.n_rows(),
            n_cols: m.n_cols(),
            width,
            slots,
        },
        overflow,
    )
}

/// ELLPACK part plus the entries that spilled past the width boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridMatrix {
    pub ell: EllpackMatrix,
    pub overflow: CooMatrix,
}

impl HybridMatrix {
    /// Union of both parts; used to check the lossless-partition invariant.
    pub fn reconstruct(&self) -> CooMatrix {
        let mut entries = self.ell.to_coo().into_entries();
        entries.extend_from_slice(self.overflow.entries());
        CooMatrix::new(self.ell.n_rows, self.ell.n_cols, entries)
            .expect("parts are disjoint and in range")
    }
}

/// Splits at the mean + deviation boundary: the first W non-zeros of every
/// position stay in ELLPACK (W = ceil(nnz_a + sigma), floor 1), the rest
/// spill to COO.
///
/// `stats` must be computed along the condensing axis: column statistics for
/// a row-wise split, row statistics for a column-wise split.
pub fn hybrid_split(
    m: &CooMatrix,
    stats: &MatrixStats,
    orientation: Orientation,
) -> Result<HybridMatrix> {
    let width_limit = if stats.nnz == 0 {
        0
    } else {
        let w = (stats.nnz_a + stats.sigma).ceil();
        // Saturating cast: an infinite sigma degenerates to plain ELLPACK.
        (w as usize).max(1)
    };
    let (ell, overflow) = build_ellpack(m, orientation, width_limit);
    Ok(HybridMatrix {
        ell,
        overflow: CooMatrix::new(m.n_rows(), m.n_cols(), overflow)?,
    })
}

/// Compressed sparse row: `ptr[i]..ptr[i+1]` spans row i of `idx`/`val`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub ptr: Vec<usize>,
    pub idx: Vec<u32>,
    pub val: Vec<f64>,
}

/// Compressed sparse column: `ptr[j]..ptr[j+1]` spans column j.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub ptr: Vec<usize>,
    pub idx: Vec<u32>,
    pub val: Vec<f64>,
}

pub fn to_csr(m: &CooMatrix) -> CsrMatrix {
    let mut ptr = vec![0usize; m.n_rows() + 1];
    for e in m.entries() {
        ptr[e.row as usize + 1] += 1;
    }
    for i in 0..m.n_rows() {
        ptr[i + 1] += ptr[i];
    }
    CsrMatrix {
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        ptr,
        idx: m.entries().iter().map(|e| e.col).collect(),
        val: m.entries().iter().map(|e| e.val).collect(),
    }
}

pub fn to_csc(m: &CooMatrix) -> CscMatrix {
    let t = m.transpose();
    let csr = to_csr(&t);
    CscMatrix {
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        ptr: csr.ptr,
        idx: csr.idx,
        val: csr.val,
    }
}

impl CsrMatrix {
    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (u32, f64)> + '_ {
        let span = self.ptr[i]..self.ptr[i + 1];
        self.idx[span.clone()]
            .iter()
            .copied()
            .zip(self.val[span].iter().copied())
    }

    pub fn to_coo(&self) -> CooMatrix {
        let mut entries = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            for (c, v) in self.row(i) {
                entries.push(CooEntry::new(i as u32, c, v));
            }
        }
        CooMatrix::new(self.n_rows, self.n_cols, entries).expect("csr was well formed")
    }
}

impl CscMatrix {
    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn to_coo(&self) -> CooMatrix {
        let mut entries = Vec::with_capacity(self.nnz());
        for j in 0..self.n_cols {
            for p in self.ptr[j]..self.ptr[j + 1] {
                entries.push(CooEntry::new(self.idx[p], j as u32, self.val[p]));
            }
        }
        CooMatrix::new(self.n_rows, self.n_cols, entries).expect("csc was well formed")
    }
}
