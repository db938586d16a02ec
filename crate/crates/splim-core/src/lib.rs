//! Functional and cost simulator for SPLIM, an in-memory SpGEMM accelerator.
//!
//! The simulator computes sparse matrix-matrix products through the
//! accelerator's own primitives (array-parallel NOR, in-situ minima search,
//! ring-wise broadcast of ELLPACK vectors) while accounting cycles, energy,
//! transfers, and array utilization. A decompression-based sister platform
//! (`coo-splim`) is modeled alongside for paradigm comparisons.
//!
//! Layout:
//! - [`coo`] / [`market`] / [`synth`]: matrix ingestion, generation, and the
//!   sensitivity transformations (thinning, redistribution).
//! - [`formats`]: COO/CSR/CSC/ELLPACK conversions and the hybrid
//!   ELLPACK+COO split.
//! - [`crossbar`]: bit-accurate 1T1M array model (NOR, RowClone, minima
//!   search, block-size scaling).
//! - [`sccp`]: the structured condensing computation paradigm (mapping,
//!   in-situ vector multiplication, ring broadcast, batching).
//! - [`accumulate`]: search-based accumulation of intermediate results.
//! - [`cost`]: the cycle/energy/utilization ledger and analytic predictors.
//! - [`baseline`]: the decompression paradigm and the reference oracle.
//! - [`pipeline`] / [`experiments`]: end-to-end runs, sweeps, and reports.

pub mod accumulate;
pub mod baseline;
pub mod coo;
pub mod cost;
pub mod crossbar;
pub mod experiments;
pub mod formats;
pub mod market;
pub mod pipeline;
pub mod sccp;
pub mod synth;

mod error;

pub use error::{Error, Result};
