//! Cycle, energy, transfer, and utilization accounting.
//!
//! The ledger keeps two kinds of numbers. Latency cycles per category follow
//! the row-parallel contract: a minima search costs `word_bits` cycles no
//! matter how many rows it drives, and a multiplication round costs one pass
//! per busiest processing element. Activity integrals (cell-cycles, bytes,
//! adds) capture total work and feed the energy model.
//!
//! Energy constants derive from the platform configuration: per-PE array
//! power spread over the reference machine's active cells, buffer power per
//! interconnect byte, accumulator power per add, controller power
//! apportioned by the fraction of cells a run actually drives. The
//! dynamic/leakage split of array power is a model parameter (default 90/10);
//! leakage is charged per activated cell that holds no useful operand.

use serde::{Deserialize, Serialize};

/// Latency cycles per category. `io` stays zero in the raw ledger; the
/// summary derives streaming transfer time from `bytes_moved` and adds the
/// explicit random-access cycles accumulated here.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CycleCounts {
    pub mult: u64,
    pub search: u64,
    pub rowclone: u64,
    pub io: u64,
    pub ctrl: u64,
}

impl CycleCounts {
    pub fn total(&self) -> u64 {
        self.mult + self.search + self.rowclone + self.io + self.ctrl
    }
}

/// Monotone cost accumulator. Merging ledgers is plain summation, so any
/// partition of charge events over workers totals identically.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostLedger {
    pub cycles: CycleCounts,

    /// Broadcast-separated multiplication rounds executed.
    pub mult_rounds: u64,
    /// Individual vector-pair passes (work, not latency).
    pub mult_passes: u64,
    /// Baseline matrix-vector iterations.
    pub spmv_iterations: u64,

    pub ri_searches: u64,
    pub ci_searches: u64,
    /// Output entries emitted by accumulation (per batch pass).
    pub emissions: u64,
    /// Values folded into the on-chip accumulator.
    pub acc_adds: u64,

    /// Intermediate slots produced, padding included.
    pub intermediate_entries: u64,
    /// Invalid-marked intermediate slots.
    pub padded_entries: u64,

    pub bytes_moved: u64,

    /// Utilization numerator/denominator over compute activations.
    pub valid_rows: u64,
    pub total_rows: u64,

    /// Activity integrals for the energy model.
    pub active_cell_cycles: u128,
    pub zero_cell_cycles: u128,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// One array-parallel NOR cycle over `rows` driven rows.
    pub fn note_nor(&mut self, rows: u64, zero_rows: u64, word_bits: u32) {
        self.cycles.mult += 1;
        self.active_cell_cycles += rows as u128 * word_bits as u128;
        self.zero_cell_cycles += zero_rows as u128 * word_bits as u128;
    }

    /// One bit-serial minima search: `word_bits` cycles regardless of the
    /// driven row count. `wasted_rows` counts activated rows that can no
    /// longer win (padding or already-invalidated words).
    pub fn note_search(&mut self, active_rows: u64, wasted_rows: u64, word_bits: u32) {
        let b = word_bits as u128;
        self.cycles.search += word_bits as u64;
        self.active_cell_cycles += active_rows as u128 * b * b;
        self.zero_cell_cycles += wasted_rows as u128 * b * b;
    }

    /// One vector-pair multiplication pass: work and utilization, no latency
    /// (rounds charge latency once per busiest PE).
    pub fn note_mult_pass(&mut self, positions: u64, valid: u64, cycles: u64, word_bits: u32) {
        self.mult_passes += 1;
        self.valid_rows += valid;
        self.total_rows += positions;
        let cells = positions as u128 * word_bits as u128 * cycles as u128;
        self.active_cell_cycles += cells;
        self.zero_cell_cycles += (positions - valid) as u128 * word_bits as u128 * cycles as u128;
    }

    pub fn add_mult_latency(&mut self, cycles: u64) {
        self.cycles.mult += cycles;
    }

    /// COO-path products: exact-access compute, fully valid activations,
    /// counted for utilization and energy but not as vector passes.
    pub fn note_coo_compute(&mut self, products: u64, cycles: u64, word_bits: u32) {
        self.valid_rows += products;
        self.total_rows += products;
        self.active_cell_cycles += products as u128 * word_bits as u128 * cycles as u128;
    }

    /// One row-clone phase set (read to buffer, transfer, write back).
    pub fn note_rowclone(&mut self, cycles: u64, bytes: u64) {
        self.cycles.rowclone += cycles;
        self.bytes_moved += bytes;
    }

    /// Exact-access reads on the COO path: per-word latency plus transfer.
    pub fn note_exact_access(&mut self, words: u64, cycles_per_word: u64, word_bits: u32) {
        self.cycles.io += words * cycles_per_word;
        self.bytes_moved += words * (word_bits as u64 / 8).max(1);
    }

    /// Streaming transfer with no per-word dispatch cost.
    pub fn note_bytes(&mut self, bytes: u64) {
        self.bytes_moved += bytes;
    }

    /// Explicit controller/scheduler work charged at full controller power.
    pub fn note_ctrl(&mut self, cycles: u64) {
        self.cycles.ctrl += cycles;
    }

    pub fn merge(&mut self, other: &CostLedger) {
        self.cycles.mult += other.cycles.mult;
        self.cycles.search += other.cycles.search;
        self.cycles.rowclone += other.cycles.rowclone;
        self.cycles.io += other.cycles.io;
        self.cycles.ctrl += other.cycles.ctrl;
        self.mult_rounds += other.mult_rounds;
        self.mult_passes += other.mult_passes;
        self.spmv_iterations += other.spmv_iterations;
        self.ri_searches += other.ri_searches;
        self.ci_searches += other.ci_searches;
        self.emissions += other.emissions;
        self.acc_adds += other.acc_adds;
        self.intermediate_entries += other.intermediate_entries;
        self.padded_entries += other.padded_entries;
        self.bytes_moved += other.bytes_moved;
        self.valid_rows += other.valid_rows;
        self.total_rows += other.total_rows;
        self.active_cell_cycles += other.active_cell_cycles;
        self.zero_cell_cycles += other.zero_cell_cycles;
    }

    /// Valid over total driven rows; undefined before any compute activity.
    pub fn utilization(&self) -> Option<f64> {
        if self.total_rows == 0 {
            None
        } else {
            Some(self.valid_rows as f64 / self.total_rows as f64)
        }
    }
}

/// Platform power/bandwidth constants and the derived per-event energies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyConfig {
    pub clock_hz: f64,
    /// ReRAM array power per processing element (all arrays of one PE busy).
    pub array_power_w_per_pe: f64,
    /// Reference machine used to apportion power to active cells.
    pub ref_pes: usize,
    pub ref_arrays_per_pe: usize,
    pub ref_array_rows: usize,
    pub ref_word_bits: u32,
    /// Share of array power spent switching cells; the rest is leakage
    /// through inactive high-resistance cells.
    pub dynamic_fraction: f64,
    pub buffer_power_w: f64,
    pub accumulator_power_w: f64,
    pub controller_power_w: f64,
    pub interconnect_bytes_per_s: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            clock_hz: 1e9,
            array_power_w_per_pe: 6.14,
            ref_pes: 32,
            ref_arrays_per_pe: 1000,
            ref_array_rows: 1024,
            ref_word_bits: 32,
            dynamic_fraction: 0.9,
            buffer_power_w: 0.0794,
            accumulator_power_w: 0.2e-3,
            controller_power_w: 0.2078,
            interconnect_bytes_per_s: 1000e9,
        }
    }
}

impl EnergyConfig {
    /// Active cells when the reference machine is fully busy.
    fn ref_cells(&self) -> f64 {
        self.ref_pes as f64
            * self.ref_arrays_per_pe as f64
            * self.ref_array_rows as f64
            * self.ref_word_bits as f64
    }

    /// Joules per active cell-cycle, before the dynamic/leakage split.
    pub fn cell_energy(&self) -> f64 {
        self.array_power_w_per_pe * self.ref_pes as f64 / (self.clock_hz * self.ref_cells())
    }

    pub fn dynamic_cell_energy(&self) -> f64 {
        self.dynamic_fraction * self.cell_energy()
    }

    /// Leakage charged per activated zero cell-cycle.
    pub fn leakage_cell_energy(&self) -> f64 {
        (1.0 - self.dynamic_fraction) * self.cell_energy()
    }

    pub fn io_energy_per_byte(&self) -> f64 {
        self.buffer_power_w / self.interconnect_bytes_per_s
    }

    pub fn acc_energy_per_add(&self) -> f64 {
        self.accumulator_power_w / self.clock_hz
    }

    /// Controller energy per active cell-cycle (power apportioned by the
    /// active fraction of the reference machine).
    pub fn ctrl_energy_per_cell(&self) -> f64 {
        self.controller_power_w / (self.clock_hz * self.ref_cells())
    }

    pub fn ctrl_energy_per_cycle(&self) -> f64 {
        self.controller_power_w / self.clock_hz
    }

    pub fn bytes_per_cycle(&self) -> f64 {
        self.interconnect_bytes_per_s / self.clock_hz
    }
}

/// Energy per reporting category, in joules.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub array: f64,
    pub leakage: f64,
    pub io: f64,
    pub ctrl: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.array + self.leakage + self.io + self.ctrl
    }

    /// Normalized category shares; `None` for a zero-energy ledger.
    pub fn shares(&self) -> Option<EnergyBreakdown> {
        let t = self.total();
        if t <= 0.0 {
            return None;
        }
        Some(EnergyBreakdown {
            array: self.array / t,
            leakage: self.leakage / t,
            io: self.io / t,
            ctrl: self.ctrl / t,
        })
    }
}

/// Applies the energy constants to a ledger's activity integrals.
pub fn energy_of(ledger: &CostLedger, cfg: &EnergyConfig) -> EnergyBreakdown {
    let active = ledger.active_cell_cycles as f64;
    let zero = ledger.zero_cell_cycles as f64;
    EnergyBreakdown {
        array: active * cfg.dynamic_cell_energy() + ledger.acc_adds as f64 * cfg.acc_energy_per_add(),
        leakage: zero * cfg.leakage_cell_energy(),
        io: ledger.bytes_moved as f64 * cfg.io_energy_per_byte(),
        ctrl: active * cfg.ctrl_energy_per_cell()
            + ledger.cycles.ctrl as f64 * cfg.ctrl_energy_per_cycle(),
    }
}

/// Finalized cycles: raw latency plus streaming transfer time.
pub fn finalized_cycles(ledger: &CostLedger, cfg: &EnergyConfig) -> CycleCounts {
    let mut cycles = ledger.cycles;
    let streaming = (ledger.bytes_moved as f64 / cfg.bytes_per_cycle()).ceil() as u64;
    cycles.io += streaming;
    cycles
}

/// Modeled execution time in seconds.
pub fn latency_seconds(ledger: &CostLedger, cfg: &EnergyConfig) -> f64 {
    finalized_cycles(ledger, cfg).total() as f64 / cfg.clock_hz
}

/// Analytic memory/time predictors for square N x N operands whose condensed
/// formats hold K vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComplexityReport {
    pub n: u64,
    pub k: u64,
    /// Intermediate elements the condensed paradigm produces: N * K^2.
    pub intermediate_elements: u64,
    /// Scalar multiplications, condensed paradigm: O(N * K^2).
    pub condensed_mult_ops: u64,
    /// Scalar multiplications, decompression paradigm: O(N^3).
    pub baseline_mult_ops: u64,
    /// Coordinate alignment operations, either paradigm: O(N^2 * K^2).
    pub alignment_ops: u64,
    /// Intermediate storage, condensed: N * K^2 words.
    pub condensed_intermediate_memory: u64,
    /// Intermediate storage, decompression: N^2 words.
    pub baseline_intermediate_memory: u64,
    /// Input storage for both paradigms: 2 * N * K words.
    pub input_memory: u64,
}

pub fn predict(n: u64, k: u64) -> ComplexityReport {
    ComplexityReport {
        n,
        k,
        intermediate_elements: n * k * k,
        condensed_mult_ops: n * k * k,
        baseline_mult_ops: n * n * n,
        alignment_ops: n * n * k * k,
        condensed_intermediate_memory: n * k * k,
        baseline_intermediate_memory: n * n,
        input_memory: 2 * n * k,
    }
}
