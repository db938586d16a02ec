//! Bit-accurate model of a 1T1M memristor array.
//!
//! Cells are plain bits: '1' is the low-resistance state, '0' high
//! resistance. Voltages never appear here; the switching protocol is honored
//! as its logic-level contract. NOR switching only goes 1 -> 0, so callers
//! initialize output columns to '1' before computing (the array-level
//! protocol does the same).
//!
//! Words are stored MSB-first: the most significant bit sits at the word's
//! column offset. The in-situ minima search walks columns MSB to LSB,
//! winnowing the active row set to the rows whose remaining prefix can still
//! be minimal; it always costs exactly `word_bits` cycles, one per bit,
//! independent of how many rows are driven.

use crate::cost::CostLedger;

/// Fixed-length row activation mask (one bit per crossbar row).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowMask {
    words: Vec<u64>,
    len: usize,
}

impl RowMask {
    pub fn none(len: usize) -> Self {
        RowMask {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn all(len: usize) -> Self {
        let mut m = Self::none(len);
        for i in 0..len {
            m.set(i, true);
        }
        m
    }

    pub fn from_rows(len: usize, rows: &[usize]) -> Self {
        let mut m = Self::none(len);
        for &r in rows {
            m.set(r, true);
        }
        m
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn set(&mut self, row: usize, on: bool) {
        assert!(row < self.len, "row {row} outside mask of length {}", self.len);
        let (w, b) = (row / 64, row % 64);
        if on {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    pub fn get(&self, row: usize) -> bool {
        let (w, b) = (row / 64, row % 64);
        self.words[w] >> b & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }
}

/// One memristor array: a bit grid with a column buffer and word drivers.
#[derive(Debug, Clone)]
pub struct Crossbar {
    rows: usize,
    cols: usize,
    word_bits: u32,
    words_per_row: usize,
    cells: Vec<u64>,
    /// Cols-wide latch filled by row reads; RowClone moves rows through it.
    column_buffer: Vec<u64>,
}

/// Default array geometry.
pub const DEFAULT_ARRAY_DIM: usize = 1024;

impl Crossbar {
    pub fn new(rows: usize, cols: usize, word_bits: u32) -> Self {
        assert!(rows > 0 && cols > 0);
        assert!((1..=64).contains(&word_bits));
        let words_per_row = cols.div_ceil(64);
        Crossbar {
            rows,
            cols,
            word_bits,
            words_per_row,
            cells: vec![0; rows * words_per_row],
            column_buffer: vec![0; words_per_row],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn word_bits(&self) -> u32 {
        self.word_bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        assert!(row < self.rows && col < self.cols, "cell ({row}, {col}) out of range");
        self.cells[row * self.words_per_row + col / 64] >> (col % 64) & 1 == 1
    }

    pub fn set(&mut self, row: usize, col: usize, bit: bool) {
        assert!(row < self.rows && col < self.cols, "cell ({row}, {col}) out of range");
        let w = row * self.words_per_row + col / 64;
        if bit {
            self.cells[w] |= 1 << (col % 64);
        } else {
            self.cells[w] &= !(1 << (col % 64));
        }
    }

    /// Sets `col` to `bit` in every active row (driver-level column write).
    pub fn fill_column(&mut self, col: usize, bit: bool, active: &RowMask) {
        assert_eq!(active.len(), self.rows);
        for r in active.iter_rows() {
            self.set(r, col, bit);
        }
    }

    /// Stores `value`'s low `word_bits` bits MSB-first at `col_offset`.
    pub fn write_word(&mut self, row: usize, col_offset: usize, value: u64) {
        let b = self.word_bits as usize;
        assert!(col_offset + b <= self.cols, "word at {col_offset} exceeds {} columns", self.cols);
        for t in 0..b {
            let bit = value >> (b - 1 - t) & 1 == 1;
            self.set(row, col_offset + t, bit);
        }
    }

    pub fn read_word(&self, row: usize, col_offset: usize) -> u64 {
        let b = self.word_bits as usize;
        assert!(col_offset + b <= self.cols);
        let mut v = 0u64;
        for t in 0..b {
            v = v << 1 | self.get(row, col_offset + t) as u64;
        }
        v
    }

    /// Bit-grid snapshot for debugging.
    pub fn dump(&self) -> String {
        let mut out = String::with_capacity(self.rows * (self.cols + 1));
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(if self.get(r, c) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

/// Array-parallel NOR: for every active row, the output cell switches to '0'
/// whenever any input cell holds '1'. Callers initialize the output column
/// to '1' first; switching is one-directional.
pub fn nor_columns(
    xb: &mut Crossbar,
    inputs: &[usize],
    output: usize,
    active: &RowMask,
    ledger: &mut CostLedger,
) {
    assert!(
        !inputs.contains(&output),
        "output column {output} overlaps the input set"
    );
    assert_eq!(active.len(), xb.rows);
    let mut zero_rows = 0u64;
    for r in active.iter_rows() {
        let any_one = inputs.iter().any(|&c| xb.get(r, c));
        if any_one {
            xb.set(r, output, false);
        } else {
            zero_rows += 1;
        }
    }
    ledger.note_nor(active.count() as u64, zero_rows, xb.word_bits);
}

/// Cycles one inter-array RowClone costs: read to buffer, buffer transfer,
/// write from buffer, for each of the word's bit columns.
pub fn rowclone_cycles(word_bits: u32) -> u64 {
    3 * word_bits as u64
}

/// Copies one row between arrays through the column buffers. Charges the
/// three-phase cost and `cols/8` transfer bytes.
pub fn rowclone(
    src: &mut Crossbar,
    src_row: usize,
    dst: &mut Crossbar,
    dst_row: usize,
    ledger: &mut CostLedger,
) {
    assert_eq!(
        src.cols, dst.cols,
        "rowclone requires equal column counts ({} vs {})",
        src.cols, dst.cols
    );
    let base = src_row * src.words_per_row;
    src.column_buffer
        .copy_from_slice(&src.cells[base..base + src.words_per_row]);
    dst.column_buffer.copy_from_slice(&src.column_buffer);
    let dbase = dst_row * dst.words_per_row;
    dst.cells[dbase..dbase + dst.words_per_row].copy_from_slice(&dst.column_buffer);
    ledger.note_rowclone(rowclone_cycles(src.word_bits), (src.cols / 8) as u64);
}

/// RowClone within one array. Copying a row onto itself is a no-op and
/// charges nothing.
pub fn rowclone_in_place(
    xb: &mut Crossbar,
    src_row: usize,
    dst_row: usize,
    ledger: &mut CostLedger,
) {
    if src_row == dst_row {
        return;
    }
    let base = src_row * xb.words_per_row;
    xb.column_buffer
        .copy_from_slice(&xb.cells[base..base + xb.words_per_row]);
    let dbase = dst_row * xb.words_per_row;
    let buf = xb.column_buffer.clone();
    xb.cells[dbase..dbase + xb.words_per_row].copy_from_slice(&buf);
    ledger.note_rowclone(rowclone_cycles(xb.word_bits), (xb.cols / 8) as u64);
}

fn min_search_grid<F: Fn(usize, usize) -> bool>(
    get: F,
    rows: usize,
    word_bits: u32,
    col_offset: usize,
    active: &RowMask,
) -> RowMask {
    assert!(!active.is_empty(), "min_search requires a non-empty active mask");
    assert_eq!(active.len(), rows);
    let mut current = active.clone();
    for t in 0..word_bits as usize {
        let col = col_offset + t;
        // Rows whose cell holds '0' keep a high word-line; the column buffer
        // records them as surviving candidates.
        let mut candidate = RowMask::none(rows);
        let mut any = false;
        for r in current.iter_rows() {
            if !get(r, col) {
                candidate.set(r, true);
                any = true;
            }
        }
        // No survivor means every current row has this bit set; the driver
        // activation carries over unchanged.
        if any {
            current = candidate;
        }
    }
    current
}

/// In-situ minima search over the words stored MSB-first at `col_offset`.
///
/// Returns the minimum word over the active rows and the exact set of rows
/// holding it. Charges `word_bits` search cycles.
pub fn min_search(
    xb: &Crossbar,
    col_offset: usize,
    active: &RowMask,
    ledger: &mut CostLedger,
) -> (u64, RowMask) {
    assert!(col_offset + xb.word_bits as usize <= xb.cols);
    let holders = min_search_grid(
        |r, c| xb.get(r, c),
        xb.rows,
        xb.word_bits,
        col_offset,
        active,
    );
    ledger.note_search(active.count() as u64, 0, xb.word_bits);
    let first = holders.iter_rows().next().expect("non-empty active set always yields holders");
    (xb.read_word(first, col_offset), holders)
}

/// Sets the sign bit (MSB column) of the addressed word in every target row,
/// excluding those rows from future searches while any valid word remains.
/// Idempotent.
pub fn invalidate(xb: &mut Crossbar, col_offset: usize, targets: &RowMask) {
    assert_eq!(targets.len(), xb.rows);
    for r in targets.iter_rows() {
        xb.set(r, col_offset, true);
    }
}

/// Several arrays presented as one logical row-aligned wide array; columns
/// concatenate in member order.
#[derive(Debug)]
pub struct WideArray {
    members: Vec<Crossbar>,
    rows: usize,
    word_bits: u32,
}

/// Block-size scaling: composes arrays with equal row counts into one
/// logical wide array.
pub fn bss_compose(arrays: Vec<Crossbar>) -> WideArray {
    assert!(!arrays.is_empty(), "cannot compose zero arrays");
    let rows = arrays[0].rows;
    let word_bits = arrays[0].word_bits;
    for a in &arrays {
        assert_eq!(a.rows, rows, "row-count mismatch in composition");
        assert_eq!(a.word_bits, word_bits);
    }
    WideArray {
        members: arrays,
        rows,
        word_bits,
    }
}

impl WideArray {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.members.iter().map(|m| m.cols).sum()
    }

    pub fn members(&self) -> &[Crossbar] {
        &self.members
    }

    /// Routes a logical column to (member, local column).
    pub fn locate(&self, col: usize) -> (usize, usize) {
        let mut offset = 0;
        for (i, m) in self.members.iter().enumerate() {
            if col < offset + m.cols {
                return (i, col - offset);
            }
            offset += m.cols;
        }
        panic!("column {col} outside composed width {}", self.cols());
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        let (m, c) = self.locate(col);
        self.members[m].get(row, c)
    }

    pub fn set(&mut self, row: usize, col: usize, bit: bool) {
        let (m, c) = self.locate(col);
        self.members[m].set(row, c, bit);
    }

    /// Word writes may straddle a member boundary; bits route individually.
    pub fn write_word(&mut self, row: usize, col_offset: usize, value: u64) {
        let b = self.word_bits as usize;
        assert!(col_offset + b <= self.cols());
        for t in 0..b {
            let bit = value >> (b - 1 - t) & 1 == 1;
            self.set(row, col_offset + t, bit);
        }
    }

    pub fn read_word(&self, row: usize, col_offset: usize) -> u64 {
        let b = self.word_bits as usize;
        let mut v = 0u64;
        for t in 0..b {
            v = v << 1 | self.get(row, col_offset + t) as u64;
        }
        v
    }

    /// Same contract as the single-array [`min_search`].
    pub fn min_search(
        &self,
        col_offset: usize,
        active: &RowMask,
        ledger: &mut CostLedger,
    ) -> (u64, RowMask) {
        assert!(col_offset + self.word_bits as usize <= self.cols());
        let holders = min_search_grid(
            |r, c| self.get(r, c),
            self.rows,
            self.word_bits,
            col_offset,
            active,
        );
        ledger.note_search(active.count() as u64, 0, self.word_bits);
        let first = holders.iter_rows().next().expect("non-empty active set");
        (self.read_word(first, col_offset), holders)
    }

    pub fn invalidate(&mut self, col_offset: usize, targets: &RowMask) {
        for r in targets.iter_rows() {
            self.set(r, col_offset, true);
        }
    }
}
