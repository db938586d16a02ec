//! Search-based accumulation of intermediate results.
//!
//! The hardware loop: a minima search over the RI plane (all rows driven,
//! invalid sign-bit words never win) picks the smallest output row and the
//! exact set of store rows holding it; nested searches over the CI plane,
//! restricted to those holders, walk that row's columns in ascending order.
//! Each (ri, ci) group's values stream through the on-chip accumulator in
//! one pass and the triple goes to off-chip memory; the group's CI words are
//! invalidated, and once a row is exhausted its RI words follow. The run
//! ends when an RI search comes back with the sign bit set.
//!
//! This module executes that loop at value level. The emission sequence of
//! the nested searches is exactly the (ri, ci)-sorted group sequence with
//! ties merged across PEs in one pass, so a stable sort over the store's
//! PE-then-slot enumeration reproduces it entry for entry, along with the
//! search counts the loop would issue: one RI search per distinct row plus a
//! terminal one, one CI search per distinct column of the row plus a
//! terminal one, each costing `word_bits` cycles. The bit-serial search
//! itself is validated against the crossbar model separately; a
//! crossbar-backed replay of this loop cross-checks both routes in the
//! tests.
//!
//! Zero-valued sums are emitted, not suppressed: the hardware has no
//! zero-compare step. Sums run in PE-id-then-slot order within a batch and
//! batch order across batches, which makes results bit-reproducible.

use crate::coo::{CooEntry, CooMatrix};
use crate::cost::CostLedger;
use crate::sccp::{IntermediateStore, SccpConfig, StoreBatch};
use crate::Result;

/// Accumulates one store into the sorted output COO, charging searches,
/// accumulator adds, and off-chip writes to the ledger. Batches accumulate
/// independently and merge in a final sorted, duplicate-summing pass.
pub fn accumulate(
    store: &IntermediateStore,
    cfg: &SccpConfig,
    n_rows: usize,
    n_cols: usize,
    ledger: &mut CostLedger,
) -> Result<CooMatrix> {
    let mut partials: Vec<Vec<CooEntry>> = Vec::with_capacity(store.batches.len());
    for batch in &store.batches {
        partials.push(accumulate_batch(batch, cfg, ledger));
    }

    // Final sorted merge: equal coordinates sum in batch order.
    let mut merged: Vec<CooEntry> = Vec::new();
    for p in &partials {
        merged.extend_from_slice(p);
    }
    merged.sort_by_key(|e| (e.row, e.col));
    let mut out: Vec<CooEntry> = Vec::with_capacity(merged.len());
    for e in merged {
        match out.last_mut() {
            Some(last) if last.row == e.row && last.col == e.col => last.val += e.val,
            _ => out.push(e),
        }
    }
    CooMatrix::new(n_rows, n_cols, out)
}

/// One accumulation pass over a batch: returns the emissions in order.
fn accumulate_batch(batch: &StoreBatch, cfg: &SccpConfig, ledger: &mut CostLedger) -> Vec<CooEntry> {
    let b = cfg.word_bits;
    // Flat PE-then-slot enumeration; the stable sort keeps that order inside
    // every (ri, ci) group, which fixes the floating-point sum order.
    let mut items: Vec<(u32, u32, f64)> = Vec::new();
    for pe in &batch.per_pe {
        for e in pe {
            items.push((e.ri, e.ci, e.val));
        }
    }
    let total_valid = items.len() as u64;
    let store_rows = total_valid + batch.padded;
    if store_rows == 0 {
        return Vec::new();
    }
    items.sort_by_key(|&(ri, ci, _)| (ri, ci));

    let mut emissions: Vec<CooEntry> = Vec::new();
    // Valid entries not yet RI-invalidated; every RI search drives the whole
    // store, the rest of the rows are dead weight for the energy model.
    let mut remaining = total_valid;
    let mut i = 0;
    while i < items.len() {
        let ri = items[i].0;
        // RI search locating this row's holders.
        ledger.ri_searches += 1;
        ledger.note_search(store_rows, store_rows - remaining, b);

        let row_start = i;
        while i < items.len() && items[i].0 == ri {
            i += 1;
        }
        let row_items = &items[row_start..i];
        let row_len = row_items.len() as u64;

        let mut emitted_in_row = 0u64;
        let mut j = 0;
        while j < row_items.len() {
            let ci = row_items[j].1;
            // CI search restricted to the RI holders.
            ledger.ci_searches += 1;
            ledger.note_search(row_len, emitted_in_row, b);

            let mut sum = 0.0;
            let mut group = 0u64;
            while j < row_items.len() && row_items[j].1 == ci {
                sum += row_items[j].2;
                group += 1;
                j += 1;
            }
            ledger.acc_adds += group;
            emitted_in_row += group;
            ledger.emissions += 1;
            // Exact off-chip write: ri, ci, val words.
            ledger.note_bytes(3 * (b as u64 / 8).max(1));
            emissions.push(CooEntry::new(ri, ci, sum));
        }
        // Terminal CI search of the exhausted row comes back sign-bit set.
        ledger.ci_searches += 1;
        ledger.note_search(row_len, row_len, b);

        remaining -= row_len;
    }
    // Terminal RI search: everything invalidated, the sign bit ends the run.
    ledger.ri_searches += 1;
    ledger.note_search(store_rows, store_rows, b);

    emissions
}

/// Analytic companion for reports: predicted search cycles for `n_rows_out`
/// distinct output rows averaging `k` emissions each. The empty store still
/// pays one terminal search.
pub fn search_cost_estimate(n_rows_out: u64, k: u64, word_bits: u32) -> u64 {
    let b = word_bits as u64;
    if n_rows_out == 0 {
        return b;
    }
    n_rows_out * b + n_rows_out * k * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossbar::{invalidate, min_search, Crossbar, RowMask};
    use crate::sccp::IntEntry;

    fn cfg() -> SccpConfig {
        SccpConfig::desk()
    }

    fn store_of(entries: Vec<IntEntry>, padded: u64) -> IntermediateStore {
        IntermediateStore {
            batches: vec![StoreBatch {
                per_pe: vec![entries],
                padded,
            }],
            chunk_capacity_per_pe: 0,
        }
    }

    #[test]
    fn walkthrough_emits_sorted_rows_and_merges_equal_coordinates() {
        // First emission is the smallest (ri, ci); the second merges the two
        // products that share (0, 2).
        let a = 1.5;
        let h = 2.0;
        let k = 3.0;
        let l = 4.0;
        let bq = 0.5;
        let entries = vec![
            IntEntry { ri: 0, ci: 2, val: a * k },
            IntEntry { ri: 1, ci: 1, val: 9.0 },
            IntEntry { ri: 0, ci: 0, val: a * h },
            IntEntry { ri: 0, ci: 2, val: bq * l },
        ];
        let mut ledger = CostLedger::new();
        let out = accumulate(&store_of(entries, 0), &cfg(), 4, 4, &mut ledger).unwrap();
        assert_eq!(
            out.entries(),
            &[
                CooEntry::new(0, 0, a * h),
                CooEntry::new(0, 2, a * k + bq * l),
                CooEntry::new(1, 1, 9.0),
            ]
        );
        assert_eq!(ledger.emissions, 3);
        assert_eq!(ledger.acc_adds, 4);
        // 2 distinct rows + terminal; per row: distinct columns + terminal.
        assert_eq!(ledger.ri_searches, 3);
        assert_eq!(ledger.ci_searches, (2 + 1) + (1 + 1));
    }

    #[test]
    fn single_entry_store() {
        let entries = vec![IntEntry { ri: 3, ci: 5, val: 2.5 }];
        let mut ledger = CostLedger::new();
        let out = accumulate(&store_of(entries, 0), &cfg(), 8, 8, &mut ledger).unwrap();
        assert_eq!(out.entries(), &[CooEntry::new(3, 5, 2.5)]);
        assert_eq!(ledger.ri_searches, 2);
        assert_eq!(ledger.ci_searches, 2);
        assert_eq!(ledger.cycles.search, 4 * 32);
    }

    #[test]
    fn empty_store_is_empty_matrix() {
        let mut ledger = CostLedger::new();
        let out = accumulate(&store_of(vec![], 0), &cfg(), 4, 4, &mut ledger).unwrap();
        assert_eq!(out.nnz(), 0);
        assert_eq!(ledger.cycles.search, 0);
    }

    #[test]
    fn zero_sums_are_emitted() {
        let entries = vec![
            IntEntry { ri: 1, ci: 1, val: 5.0 },
            IntEntry { ri: 1, ci: 1, val: -5.0 },
        ];
        let mut ledger = CostLedger::new();
        let out = accumulate(&store_of(entries, 0), &cfg(), 2, 2, &mut ledger).unwrap();
        assert_eq!(out.entries(), &[CooEntry::new(1, 1, 0.0)]);
    }

    #[test]
    fn random_stores_match_hash_aggregation_oracle() {
        use std::collections::HashMap;
        let mut state = 2024u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for trial in 0..1000 {
            let len = (next() % 60) as usize;
            let dim = 1 + (next() % 12) as u32;
            let mut entries = Vec::with_capacity(len);
            for _ in 0..len {
                entries.push(IntEntry {
                    ri: (next() % dim as u64) as u32,
                    ci: (next() % dim as u64) as u32,
                    val: ((next() % 2001) as f64 - 1000.0) / 8.0,
                });
            }
            let mut oracle: HashMap<(u32, u32), f64> = HashMap::new();
            for e in &entries {
                *oracle.entry((e.ri, e.ci)).or_insert(0.0) += e.val;
            }
            let mut ledger = CostLedger::new();
            let out = accumulate(
                &store_of(entries, 0),
                &cfg(),
                dim as usize,
                dim as usize,
                &mut ledger,
            )
            .unwrap();
            assert_eq!(out.nnz(), oracle.len(), "trial {trial}");
            for e in out.entries() {
                let want = oracle[&(e.row, e.col)];
                assert!((e.val - want).abs() < 1e-9, "trial {trial}");
            }
            // Strictly sorted, duplicate free.
            for w in out.entries().windows(2) {
                assert!((w[0].row, w[0].col) < (w[1].row, w[1].col));
            }
        }
    }

    #[test]
    fn search_counts_follow_output_shape() {
        let entries = vec![
            IntEntry { ri: 0, ci: 0, val: 1.0 },
            IntEntry { ri: 0, ci: 1, val: 1.0 },
            IntEntry { ri: 2, ci: 3, val: 1.0 },
            IntEntry { ri: 2, ci: 3, val: 1.0 },
            IntEntry { ri: 7, ci: 0, val: 1.0 },
        ];
        let mut ledger = CostLedger::new();
        let out = accumulate(&store_of(entries, 0), &cfg(), 8, 8, &mut ledger).unwrap();
        let distinct_rows = 3u64;
        let emissions = out.nnz() as u64;
        assert_eq!(ledger.ri_searches, distinct_rows + 1);
        assert_eq!(ledger.ci_searches, emissions + distinct_rows);
        assert_eq!(
            ledger.cycles.search,
            (ledger.ri_searches + ledger.ci_searches) * 32
        );
    }

    #[test]
    fn estimate_formula() {
        assert_eq!(search_cost_estimate(1, 1, 32), 64);
        assert_eq!(search_cost_estimate(100, 4, 32), 100 * 32 + 400 * 32);
        assert_eq!(search_cost_estimate(0, 5, 32), 32);
    }

    /// Crossbar-backed replay of the accumulation loop. The RI and CI planes
    /// live in an actual bit grid driven by `min_search`/`invalidate`; the
    /// value plane is read only for holder rows. Both routes must agree on
    /// every emission and on the number of searches issued.
    fn crossbar_accumulate(entries: &[IntEntry], word_bits: u32) -> (Vec<CooEntry>, u64, u64) {
        let rows = entries.len();
        let b = word_bits as usize;
        let mut xb = Crossbar::new(rows.max(1), 2 * b, word_bits);
        for (r, e) in entries.iter().enumerate() {
            xb.write_word(r, 0, e.ri as u64);
            xb.write_word(r, b, e.ci as u64);
        }
        let values: Vec<f64> = entries.iter().map(|e| e.val).collect();
        let all = RowMask::all(rows.max(1));
        let msb = 1u64 << (word_bits - 1);
        let mut scratch = CostLedger::new();
        let mut out = Vec::new();
        let (mut ri_searches, mut ci_searches) = (0u64, 0u64);
        if rows == 0 {
            return (out, 0, 0);
        }
        loop {
            let (ri, row_holders) = min_search(&xb, 0, &all, &mut scratch);
            ri_searches += 1;
            if ri & msb != 0 {
                break;
            }
            loop {
                let (ci, ci_holders) = min_search(&xb, b, &row_holders, &mut scratch);
                ci_searches += 1;
                if ci & msb != 0 {
                    break;
                }
                let mut sum = 0.0;
                for r in ci_holders.iter_rows() {
                    sum += values[r];
                }
                out.push(CooEntry::new(ri as u32, ci as u32, sum));
                invalidate(&mut xb, b, &ci_holders);
            }
            invalidate(&mut xb, 0, &row_holders);
        }
        (out, ri_searches, ci_searches)
    }

    #[test]
    fn value_level_loop_matches_crossbar_replay() {
        let mut state = 77u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for trial in 0..50 {
            let len = 1 + (next() % 40) as usize;
            let mut entries = Vec::with_capacity(len);
            for _ in 0..len {
                entries.push(IntEntry {
                    ri: (next() % 10) as u32,
                    ci: (next() % 10) as u32,
                    val: (next() % 100) as f64 / 4.0,
                });
            }
            let (hw_out, hw_ri, hw_ci) = crossbar_accumulate(&entries, 8);
            let mut ledger = CostLedger::new();
            let sim = accumulate(
                &store_of(entries, 0),
                &SccpConfig { word_bits: 8, ..cfg() },
                16,
                16,
                &mut ledger,
            )
            .unwrap();
            assert_eq!(sim.entries(), &hw_out[..], "trial {trial}");
            assert_eq!(ledger.ri_searches, hw_ri, "trial {trial}");
            assert_eq!(ledger.ci_searches, hw_ci, "trial {trial}");
        }
    }

    #[test]
    fn batches_merge_with_cross_batch_sums() {
        let store = IntermediateStore {
            batches: vec![
                StoreBatch {
                    per_pe: vec![vec![
                        IntEntry { ri: 0, ci: 1, val: 1.0 },
                        IntEntry { ri: 2, ci: 2, val: 4.0 },
                    ]],
                    padded: 0,
                },
                StoreBatch {
                    per_pe: vec![vec![
                        IntEntry { ri: 0, ci: 1, val: 2.0 },
                        IntEntry { ri: 1, ci: 0, val: 8.0 },
                    ]],
                    padded: 0,
                },
            ],
            chunk_capacity_per_pe: 0,
        };
        let mut ledger = CostLedger::new();
        let out = accumulate(&store, &cfg(), 4, 4, &mut ledger).unwrap();
        assert_eq!(
            out.entries(),
            &[
                CooEntry::new(0, 1, 3.0),
                CooEntry::new(1, 0, 8.0),
                CooEntry::new(2, 2, 4.0),
            ]
        );
        // Two passes, each with its own terminal searches.
        assert_eq!(ledger.ri_searches, (2 + 1) + (2 + 1));
        assert_eq!(ledger.emissions, 4);
    }
}
