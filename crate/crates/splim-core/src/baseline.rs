//! The decompression computation paradigm (sister platform) and the
//! reference SpGEMM oracle all functional checks compare against.

use crate::coo::{CooEntry, CooMatrix};
use crate::cost::CostLedger;
use crate::formats::to_csr;
use crate::sccp::SccpConfig;
use crate::{Error, Result};

/// Ground-truth sparse product: classic row-wise formulation with a dense
/// accumulator per output row, inner index ascending. Explicit zeros from
/// cancellation are retained (an output position counts as present when any
/// product touched it), and the result is sorted COO.
pub fn oracle_spgemm(a: &CooMatrix, b: &CooMatrix) -> Result<CooMatrix> {
    if a.n_cols() != b.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.n_rows(),
            a.n_cols(),
            b.n_rows(),
            b.n_cols()
        )));
    }
    let a_csr = to_csr(a);
    let b_csr = to_csr(b);
    let mut acc = vec![0.0f64; b.n_cols()];
    let mut touched = vec![false; b.n_cols()];
    let mut cols: Vec<u32> = Vec::new();
    let mut out: Vec<CooEntry> = Vec::new();

    for i in 0..a.n_rows() {
        cols.clear();
        for (k, av) in a_csr.row(i) {
            for (j, bv) in b_csr.row(k as usize) {
                let j = j as usize;
                if !touched[j] {
                    touched[j] = true;
                    cols.push(j as u32);
                }
                acc[j] += av * bv;
            }
        }
        cols.sort_unstable();
        for &j in &cols {
            out.push(CooEntry::new(i as u32, j, acc[j as usize]));
            acc[j as usize] = 0.0;
            touched[j as usize] = false;
        }
    }
    CooMatrix::new(a.n_rows(), b.n_cols(), out)
}

/// Outcome of a decompression-paradigm run.
#[derive(Debug, Clone)]
pub struct BaselineRun {
    pub output: CooMatrix,
    pub ledger: CostLedger,
    /// One per left-matrix row (N for an N x N operand).
    pub spmv_iterations: u64,
}

/// Models the decompression paradigm: both operands blow up to dense form in
/// the arrays, one SpMV iteration per left row drives every cell (the
/// reintroduced zeros count toward activations but never toward valid work),
/// coordinate alignment costs one b-cycle search per non-zero pair, and the
/// scheduler inspects every dense intermediate slot.
pub fn run_coo_splim(a: &CooMatrix, b: &CooMatrix, cfg: &SccpConfig) -> Result<BaselineRun> {
    if a.n_cols() != b.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.n_rows(),
            a.n_cols(),
            b.n_rows(),
            b.n_cols()
        )));
    }
    let mut ledger = CostLedger::new();
    if a.nnz() == 0 || b.nnz() == 0 {
        return Ok(BaselineRun {
            output: CooMatrix::empty(a.n_rows(), b.n_cols()),
            ledger,
            spmv_iterations: 0,
        });
    }
    let word_bytes = (cfg.word_bits as u64 / 8).max(1);

    // Decompression writes: every cell of both dense operands.
    let a_cells = (a.n_rows() * a.n_cols()) as u64;
    let b_cells = (b.n_rows() * b.n_cols()) as u64;
    ledger.note_bytes((a_cells + b_cells) * word_bytes);

    // Coordinate alignment: every stored non-zero pair, one search each.
    let align_ops = a.nnz() as u64 * b.nnz() as u64;
    ledger.cycles.search += align_ops * cfg.word_bits as u64;
    ledger.active_cell_cycles += align_ops as u128 * cfg.word_bits as u128 * cfg.word_bits as u128;

    // One SpMV iteration per left row, touching the full dense right operand;
    // zeros activate rows without doing valid work.
    let iterations = a.n_rows() as u64;
    for _ in 0..a.n_rows() {
        ledger.note_mult_pass(b_cells, b.nnz() as u64, cfg.mult_cycles, cfg.word_bits);
        ledger.add_mult_latency(cfg.mult_cycles);
    }
    ledger.spmv_iterations = iterations;

    // Dense intermediate slots plus the scheduler pass over them.
    let intermediates = (a.n_rows() * b.n_cols()) as u64;
    ledger.intermediate_entries += intermediates;
    ledger.note_ctrl(intermediates * cfg.baseline_sched_cycles);

    let output = oracle_spgemm(a, b)?;
    ledger.emissions = output.nnz() as u64;
    ledger.note_bytes(output.nnz() as u64 * 3 * word_bytes);

    Ok(BaselineRun {
        output,
        ledger,
        spmv_iterations: iterations,
    })
}
