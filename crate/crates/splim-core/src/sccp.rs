//! The structured condensing computation paradigm.
//!
//! The left operand arrives as row-wise ELLPACK (position j = inner index j,
//! index plane = output row), the right as column-wise ELLPACK (position j =
//! inner index j, index plane = output column). Both value planes are
//! position-aligned, so a vector-vector multiplication needs no coordinate
//! decompression: position j contributes `left.value[j] * right.value[j]`
//! tagged (ri, ci) from the two index planes.
//!
//! Vectors map onto a ring of `max(k_a, k_b)` logical slots spread
//! round-robin over the processing elements. Left vectors stay resident;
//! after every multiplication round the right value planes shift one slot
//! along the ring (two RowClone phases), so every (left, right) pair meets
//! exactly once in `max(k_a, k_b)` rounds. When the intermediate results of
//! a full pass would overflow the per-PE array budget, the right vectors are
//! processed in batches and each batch's store is accumulated on its own.
//!
//! Entries that spilled into the COO side of the hybrid split are expanded
//! on the COO processing elements with exact-access reads against the
//! resident ELLPACK planes.

use serde::{Deserialize, Serialize};

use crate::coo::CooMatrix;
use crate::cost::{CostLedger, EnergyConfig};
use crate::formats::{EllSlot, HybridMatrix, Orientation};
use crate::{Error, Result};

/// Platform configuration: geometry, per-event cycle constants, energy
/// constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SccpConfig {
    /// Processing elements (T).
    pub num_pes: usize,
    pub arrays_per_pe: usize,
    pub array_rows: usize,
    pub array_cols: usize,
    /// Stored word width b; indices keep the sign bit free, so operand
    /// dimensions must stay below 2^(b-1).
    pub word_bits: u32,
    /// One in-situ vector multiplication pass. 32-bit multiplication is not
    /// decomposed to NOR gates here; the default models the decomposed
    /// sequence at 13 cycles per bit squared (13 * 32^2).
    pub mult_cycles: u64,
    /// One RowClone phase: read to column buffer, transfer, write back, for
    /// each bit column of a word.
    pub rowclone_phase_cycles: u64,
    /// Exact-access read cost per word on the COO path; the touched rows
    /// have good row locality, so the default is small. Tunable.
    pub coo_access_cycles: u64,
    /// Decompression-paradigm scheduler cost per intermediate element.
    pub baseline_sched_cycles: u64,
    pub energy: EnergyConfig,
}

impl SccpConfig {
    /// Desk-scale defaults: full array geometry, 16 arrays per PE.
    pub fn desk() -> Self {
        SccpConfig {
            num_pes: 32,
            arrays_per_pe: 16,
            array_rows: 1024,
            array_cols: 1024,
            word_bits: 32,
            mult_cycles: 13 * 32 * 32,
            rowclone_phase_cycles: 3 * 32,
            coo_access_cycles: 2,
            baseline_sched_cycles: 1,
            energy: EnergyConfig::default(),
        }
    }

    /// Full platform configuration: 32 PEs of 1000 arrays each.
    pub fn table2() -> Self {
        SccpConfig {
            arrays_per_pe: 1000,
            ..SccpConfig::desk()
        }
    }

    /// Array chunks one logical vector occupies (a chunk is `array_rows`
    /// positions by `word_bits` columns).
    fn chunks_per_vector(&self, n: usize) -> usize {
        n.div_ceil(self.array_rows).max(1)
    }

    /// Vector-column capacity of one PE, in chunks.
    fn chunk_capacity(&self) -> usize {
        self.arrays_per_pe * (self.array_cols / self.word_bits as usize)
    }
}

impl Default for SccpConfig {
    fn default() -> Self {
        SccpConfig::desk()
    }
}

/// Assignment of condensed vectors to ring slots and processing elements:
/// left vector s parks at slot s, right vector j starts at slot j, slot s
/// lives on PE s mod T.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub num_pes: usize,
    /// Ring length: max(k_a, k_b).
    pub ring_slots: usize,
    pub k_a: usize,
    pub k_b: usize,
}

impl Placement {
    pub fn pe_of_slot(&self, slot: usize) -> usize {
        slot % self.num_pes
    }

    /// Left vector ids resident on PE p.
    pub fn lefts_on_pe(&self, pe: usize) -> Vec<usize> {
        (pe..self.k_a).step_by(self.num_pes).collect()
    }

    /// Right vector ids initially on PE p.
    pub fn rights_on_pe(&self, pe: usize) -> Vec<usize> {
        (pe..self.k_b).step_by(self.num_pes).collect()
    }
}

/// Round-robin mapping of `k_a` left and `k_b` right vectors over the PEs.
/// `positions` is the shared inner dimension; a vector that cannot fit one
/// PE at all is a capacity error.
pub fn map_matrices(
    a_ell_width: usize,
    b_ell_width: usize,
    positions: usize,
    cfg: &SccpConfig,
) -> Result<Placement> {
    if cfg.num_pes == 0 {
        return Err(Error::InvalidArgument("at least one PE required".into()));
    }
    let chunks = cfg.chunks_per_vector(positions);
    // Two planes (index + value) per resident vector.
    if 2 * chunks > cfg.chunk_capacity() {
        return Err(Error::Capacity(format!(
            "one vector of {positions} positions needs {} chunks, a PE holds {}",
            2 * chunks,
            cfg.chunk_capacity()
        )));
    }
    Ok(Placement {
        num_pes: cfg.num_pes,
        ring_slots: a_ell_width.max(b_ell_width),
        k_a: a_ell_width,
        k_b: b_ell_width,
    })
}

/// One intermediate result: output coordinates plus the partial product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntEntry {
    pub ri: u32,
    pub ci: u32,
    pub val: f64,
}

/// Intermediates produced by one batch of right vectors, kept per PE in
/// generation order. `padded` counts the invalid-marked slots the lockstep
/// hardware produced alongside; they occupy array rows but never accumulate.
#[derive(Debug, Clone, Default)]
pub struct StoreBatch {
    pub per_pe: Vec<Vec<IntEntry>>,
    pub padded: u64,
}

impl StoreBatch {
    pub fn valid_count(&self) -> u64 {
        self.per_pe.iter().map(|p| p.len() as u64).sum()
    }
}

/// All intermediate results of a run, one batch per accumulation pass.
#[derive(Debug, Clone, Default)]
pub struct IntermediateStore {
    pub batches: Vec<StoreBatch>,
    /// Vector-column capacity of one PE, in array chunks.
    pub chunk_capacity_per_pe: u64,
}

impl IntermediateStore {
    pub fn valid_count(&self) -> u64 {
        self.batches.iter().map(|b| b.valid_count()).sum()
    }

    pub fn padded_count(&self) -> u64 {
        self.batches.iter().map(|b| b.padded).sum()
    }

    /// Slot count including padding: what the arrays physically hold.
    pub fn entry_count(&self) -> u64 {
        self.valid_count() + self.padded_count()
    }
}

/// Position-aligned in-situ vector multiplication.
///
/// Emits one (ri, ci, val) per position where both slots are valid. The
/// hardware computes all positions in lockstep, so invalid positions still
/// occupy a physical slot; they come back as a count, never accumulated.
pub fn vector_multiply(left: &[EllSlot], right: &[EllSlot]) -> (Vec<IntEntry>, u64) {
    assert_eq!(left.len(), right.len(), "vector length mismatch");
    let mut out = Vec::new();
    let mut padded = 0u64;
    for (l, r) in left.iter().zip(right.iter()) {
        if l.is_valid() && r.is_valid() {
            out.push(IntEntry {
                ri: l.index,
                ci: r.index,
                val: l.value * r.value,
            });
        } else {
            padded += 1;
        }
    }
    (out, padded)
}

/// Right-vector ring: `slot_right[s]` is the right vector id whose value
/// plane currently sits at slot s.
#[derive(Debug, Clone)]
pub struct RingState {
    pub slot_right: Vec<Option<usize>>,
}

impl RingState {
    pub fn new(ring_slots: usize, right_ids: &[usize]) -> Self {
        let mut slot_right = vec![None; ring_slots];
        for (offset, &id) in right_ids.iter().enumerate() {
            slot_right[offset] = Some(id);
        }
        RingState { slot_right }
    }
}

/// Shifts every right value plane one slot along the ring (wrapping).
/// Previous value planes are overwritten; index planes are retained, so only
/// the value planes count toward the transfer. Costs two RowClone phases.
pub fn ring_broadcast(
    state: &mut RingState,
    positions: usize,
    cfg: &SccpConfig,
    ledger: &mut CostLedger,
) {
    let moved = state.slot_right.iter().flatten().count() as u64;
    state.slot_right.rotate_right(1);
    let bytes = moved * positions as u64 * (cfg.word_bits as u64 / 8);
    ledger.note_rowclone(2 * cfg.rowclone_phase_cycles, bytes);
}

/// Executes the full condensed multiplication: every (left, right) vector
/// pair exactly once, ring-broadcasting between rounds, batching the right
/// vectors when the intermediates would overflow the PE arrays, then the
/// COO spill path.
pub fn run_sccp(
    a: &HybridMatrix,
    b: &HybridMatrix,
    cfg: &SccpConfig,
) -> Result<(IntermediateStore, CostLedger)> {
    if a.ell.orientation != Orientation::RowWise || b.ell.orientation != Orientation::ColumnWise {
        return Err(Error::InvalidArgument(
            "left operand must be row-wise ELLPACK, right column-wise".into(),
        ));
    }
    if a.ell.n_cols != b.ell.n_rows {
        return Err(Error::DimensionMismatch(format!(
            "inner dimensions differ: {} vs {}",
            a.ell.n_cols, b.ell.n_rows
        )));
    }
    let n = a.ell.positions();
    let limit = 1usize << (cfg.word_bits - 1);
    if a.ell.n_rows >= limit || b.ell.n_cols >= limit || n >= limit {
        return Err(Error::InvalidArgument(format!(
            "dimensions must stay below 2^{} to keep the sign bit free",
            cfg.word_bits - 1
        )));
    }

    let mut ledger = CostLedger::new();
    let mut store = IntermediateStore {
        chunk_capacity_per_pe: cfg.chunk_capacity() as u64,
        ..Default::default()
    };

    let k_a = a.ell.width;
    let k_b = b.ell.width;
    if k_a > 0 && k_b > 0 {
        let placement = map_matrices(k_a, k_b, n, cfg)?;
        for batch in plan_batches(k_a, k_b, n, cfg)? {
            let batch_store = run_batch(a, b, &placement, batch, n, cfg, &mut ledger);
            ledger.intermediate_entries += batch_store.valid_count() + batch_store.padded;
            ledger.padded_entries += batch_store.padded;
            store.batches.push(batch_store);
        }
    }

    run_coo_path(a, b, cfg, &mut store, &mut ledger);
    Ok((store, ledger))
}

/// Splits the right vector ids into contiguous batches sized so the resident
/// vectors plus one batch's intermediates fit each PE.
fn plan_batches(
    k_a: usize,
    k_b: usize,
    n: usize,
    cfg: &SccpConfig,
) -> Result<Vec<std::ops::Range<usize>>> {
    let chunks = cfg.chunks_per_vector(n);
    let cap = cfg.chunk_capacity();
    let t = cfg.num_pes;
    let max_lefts = k_a.div_ceil(t);
    let fits = |beta: usize| -> bool {
        let resident = (max_lefts + beta.div_ceil(t)) * 2 * chunks;
        // ri, ci, val: three planes per intermediate column.
        let intermediates = max_lefts * beta * 3 * chunks;
        resident + intermediates <= cap
    };
    let mut beta = k_b;
    while beta > 0 && !fits(beta) {
        beta -= 1;
    }
    if beta == 0 {
        return Err(Error::Capacity(format!(
            "a single right vector (n = {n}) plus its intermediates exceeds \
             the PE budget of {cap} chunks"
        )));
    }
    Ok((0..k_b)
        .step_by(beta)
        .map(|start| start..(start + beta).min(k_b))
        .collect())
}

fn run_batch(
    a: &HybridMatrix,
    b: &HybridMatrix,
    placement: &Placement,
    batch: std::ops::Range<usize>,
    n: usize,
    cfg: &SccpConfig,
    ledger: &mut CostLedger,
) -> StoreBatch {
    let beta = batch.len();
    let rounds = placement.k_a.max(beta);
    let ring_ids: Vec<usize> = batch.collect();
    let mut ring = RingState::new(rounds, &ring_ids);

    let mut out = StoreBatch {
        per_pe: vec![Vec::new(); cfg.num_pes],
        padded: 0,
    };

    for _round in 0..rounds {
        let mut passes_per_pe = vec![0u64; cfg.num_pes];
        for slot in 0..rounds {
            if slot >= placement.k_a {
                continue; // no left vector parked here
            }
            let Some(right_id) = ring.slot_right[slot] else {
                continue;
            };
            let (entries, padded) = vector_multiply(a.ell.vector(slot), b.ell.vector(right_id));
            let valid = entries.len() as u64;
            let pe = placement.pe_of_slot(slot);
            out.per_pe[pe].extend_from_slice(&entries);
            out.padded += padded;
            ledger.note_mult_pass(n as u64, valid, cfg.mult_cycles, cfg.word_bits);
            passes_per_pe[pe] += 1;
        }
        ledger.mult_rounds += 1;
        let busiest = passes_per_pe.iter().copied().max().unwrap_or(0);
        ledger.add_mult_latency(busiest * cfg.mult_cycles);
        ring_broadcast(&mut ring, n, cfg, ledger);
    }
    out
}

/// Expands the hybrid split's COO spill on the COO processing elements:
/// left-overflow entries multiply against every right-matrix entry sharing
/// the inner index (both parts of the right operand), and right-overflow
/// entries multiply against the resident left ELLPACK planes. Reads are
/// exact accesses with a per-word cost.
fn run_coo_path(
    a: &HybridMatrix,
    b: &HybridMatrix,
    cfg: &SccpConfig,
    store: &mut IntermediateStore,
    ledger: &mut CostLedger,
) {
    if a.overflow.nnz() == 0 && b.overflow.nnz() == 0 {
        return;
    }
    let n = a.ell.n_cols;
    let mut entries: Vec<IntEntry> = Vec::new();
    let mut touched_words = 0u64;

    // Full right operand grouped by inner index (row of B), ascending column.
    let mut b_rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for j in 0..b.ell.positions() {
        for v in 0..b.ell.width {
            let s = b.ell.slot(v, j);
            if s.is_valid() {
                b_rows[j].push((s.index, s.value));
            }
        }
    }
    for e in b.overflow.entries() {
        b_rows[e.row as usize].push((e.col, e.val));
    }

    for e in a.overflow.entries() {
        touched_words += 3; // the overflow triple itself
        for &(ci, bv) in &b_rows[e.col as usize] {
            touched_words += 2; // partner index + value words
            entries.push(IntEntry {
                ri: e.row,
                ci,
                val: e.val * bv,
            });
        }
    }

    // Right spill against the left ELLPACK planes only; the overflow-times-
    // overflow products were already covered above.
    for e in b.overflow.entries() {
        touched_words += 3;
        let j = e.row as usize;
        for v in 0..a.ell.width {
            let s = a.ell.slot(v, j);
            if !s.is_valid() {
                break; // valid slots pack at the low vector indices
            }
            touched_words += 2;
            entries.push(IntEntry {
                ri: s.index,
                ci: e.col,
                val: s.value * e.val,
            });
        }
    }

    let products = entries.len() as u64;
    ledger.note_exact_access(touched_words, cfg.coo_access_cycles, cfg.word_bits);
    ledger.note_coo_compute(products, cfg.mult_cycles, cfg.word_bits);
    // The COO processing elements fill their arrays row-parallel.
    let passes = products.div_ceil(cfg.array_rows as u64);
    ledger.add_mult_latency(passes * cfg.mult_cycles);
    ledger.intermediate_entries += products;

    store.batches.push(StoreBatch {
        per_pe: vec![entries],
        padded: 0,
    });
}

/// Group-by-(ri, ci) sum of the valid intermediates. Test companion for
/// checking functional correctness ahead of the search-based accumulator.
pub fn intermediates_to_coo(
    store: &IntermediateStore,
    n_rows: usize,
    n_cols: usize,
) -> Result<CooMatrix> {
    use std::collections::BTreeMap;
    let mut sums: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for batch in &store.batches {
        for pe in &batch.per_pe {
            for e in pe {
                *sums.entry((e.ri, e.ci)).or_insert(0.0) += e.val;
            }
        }
    }
    CooMatrix::new(
        n_rows,
        n_cols,
        sums.into_iter()
            .map(|((r, c), v)| crate::coo::CooEntry::new(r, c, v))
            .collect(),
    )
}
