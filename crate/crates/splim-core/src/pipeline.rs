//! End-to-end condensed pipeline: hybrid split, structured multiplication,
//! search-based accumulation.

use crate::accumulate::accumulate;
use crate::baseline::oracle_spgemm;
use crate::coo::CooMatrix;
use crate::cost::CostLedger;
use crate::formats::{hybrid_split, Orientation};
use crate::sccp::{run_sccp, SccpConfig};
use crate::{Error, Result};

/// Outcome of one condensed-pipeline run.
#[derive(Debug, Clone)]
pub struct SplimRun {
    pub output: CooMatrix,
    pub ledger: CostLedger,
    /// Condensed vector counts after the split.
    pub k_a: usize,
    pub k_b: usize,
    /// Entries the hybrid split routed to the COO processing elements.
    pub overflow_nnz: usize,
    /// Invalid slots in the two operand ELLPACK grids.
    pub ellpack_padding: usize,
    pub batches: usize,
}

/// Runs A x B through the condensed paradigm. The left operand splits
/// row-wise (statistics along its columns, the condensing axis), the right
/// column-wise (statistics along its rows).
pub fn run_splim(a: &CooMatrix, b: &CooMatrix, cfg: &SccpConfig) -> Result<SplimRun> {
    if a.n_cols() != b.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.n_rows(),
            a.n_cols(),
            b.n_rows(),
            b.n_cols()
        )));
    }
    let ha = hybrid_split(a, &a.col_stats(), Orientation::RowWise)?;
    let hb = hybrid_split(b, &b.row_stats(), Orientation::ColumnWise)?;
    let (store, mut ledger) = run_sccp(&ha, &hb, cfg)?;
    let batches = store.batches.len();
    let output = accumulate(&store, cfg, a.n_rows(), b.n_cols(), &mut ledger)?;
    Ok(SplimRun {
        output,
        ledger,
        k_a: ha.ell.width,
        k_b: hb.ell.width,
        overflow_nnz: ha.overflow.nnz() + hb.overflow.nnz(),
        ellpack_padding: ha.ell.padding() + hb.ell.padding(),
        batches,
    })
}

/// Element-wise check against the reference product: exact coordinates,
/// values within `rel_tol` relative error (exact where the reference value
/// is exactly representable integer arithmetic).
pub fn verify_against_oracle(got: &CooMatrix, a: &CooMatrix, b: &CooMatrix, rel_tol: f64) -> Result<()> {
    let want = oracle_spgemm(a, b)?;
    if got.nnz() != want.nnz() {
        return Err(Error::FunctionalMismatch(format!(
            "nnz {} vs reference {}",
            got.nnz(),
            want.nnz()
        )));
    }
    for (g, w) in got.entries().iter().zip(want.entries()) {
        if (g.row, g.col) != (w.row, w.col) {
            return Err(Error::FunctionalMismatch(format!(
                "coordinate ({}, {}) vs reference ({}, {})",
                g.row, g.col, w.row, w.col
            )));
        }
        let scale = w.val.abs().max(1e-300);
        if g.val != w.val && (g.val - w.val).abs() / scale > rel_tol {
            return Err(Error::FunctionalMismatch(format!(
                "value at ({}, {}): {} vs reference {}",
                g.row, g.col, g.val, w.val
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gen_banded, gen_skewed, gen_uniform, thin};

    #[test]
    fn splim_equals_oracle_on_random_pairs() {
        for seed in 0..10 {
            let n = 16 + (seed as usize % 4) * 17;
            let a = gen_uniform(n, 2 + seed as usize % 5, seed).unwrap();
            let b = a.transpose();
            let run = run_splim(&a, &b, &SccpConfig::desk()).unwrap();
            verify_against_oracle(&run.output, &a, &b, 1e-9).unwrap();
        }
    }

    #[test]
    fn splim_handles_skew_and_thinning() {
        let a0 = gen_skewed(96, 2, 40, 6, 11).unwrap();
        let a = thin(&a0, 0.8, 4).unwrap();
        let b = a.transpose();
        let run = run_splim(&a, &b, &SccpConfig::desk()).unwrap();
        assert!(run.overflow_nnz > 0, "skewed input should spill");
        verify_against_oracle(&run.output, &a, &b, 1e-9).unwrap();
    }

    #[test]
    fn banded_run_reports_clean_geometry() {
        let a = gen_banded(64, 4, 3).unwrap();
        let b = a.transpose();
        let run = run_splim(&a, &b, &SccpConfig::desk()).unwrap();
        assert_eq!((run.k_a, run.k_b), (4, 4));
        assert_eq!(run.overflow_nnz, 0);
        assert_eq!(run.ellpack_padding, 0);
        assert_eq!(run.ledger.utilization(), Some(1.0));
        verify_against_oracle(&run.output, &a, &b, 1e-9).unwrap();
    }

    #[test]
    fn rectangular_product_works() {
        // 12x20 times 20x12 through transpose.
        let mut entries = Vec::new();
        for r in 0..12u32 {
            entries.push(crate::coo::CooEntry::new(r, (r * 3) % 20, 1.0 + r as f64));
            entries.push(crate::coo::CooEntry::new(r, (r * 7 + 1) % 20, 2.0));
        }
        let a = CooMatrix::new(12, 20, entries).unwrap();
        let b = a.transpose();
        let run = run_splim(&a, &b, &SccpConfig::desk()).unwrap();
        assert_eq!(run.output.n_rows(), 12);
        assert_eq!(run.output.n_cols(), 12);
        verify_against_oracle(&run.output, &a, &b, 1e-9).unwrap();
    }

    #[test]
    fn mismatch_is_detected() {
        let a = gen_uniform(8, 2, 1).unwrap();
        let b = a.transpose();
        let run = run_splim(&a, &b, &SccpConfig::desk()).unwrap();
        // Tamper with one value.
        let mut entries = run.output.entries().to_vec();
        entries[0].val += 1.0;
        let bad = CooMatrix::new(8, 8, entries).unwrap();
        assert!(verify_against_oracle(&bad, &a, &b, 1e-9).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = CooMatrix::empty(4, 5);
        let b = CooMatrix::empty(6, 4);
        assert!(run_splim(&a, &b, &SccpConfig::desk()).is_err());
    }
}
