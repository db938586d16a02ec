//! Batch experiment driver: A x A^T runs, paradigm comparison, sparsity and
//! deviation sweeps, PE-count scalability, and report emission.
//!
//! Every run is reproducible bit for bit from (spec, seed): reports carry the
//! spec inline, never a timestamp, and sweep points execute independently so
//! the worker count cannot reorder anything. A cost row is only written after
//! the pipeline output matched the reference product; a mismatch aborts the
//! experiment with an error.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::run_coo_splim;
use crate::coo::CooMatrix;
use crate::cost::{energy_of, finalized_cycles, latency_seconds, predict, CostLedger, EnergyConfig};
use crate::market::read_matrix_market;
use crate::pipeline::{run_splim, verify_against_oracle};
use crate::sccp::SccpConfig;
use crate::synth::{redistribute_until, thin, GenSpec};
use crate::{Error, Result};

/// Relative tolerance of the functional gate.
pub const GATE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSpec {
    File(PathBuf),
    Gen(GenSpec),
}

impl InputSpec {
    /// Accepts a path or a generator spec string.
    pub fn parse(s: &str) -> InputSpec {
        if s.contains(':') && GenSpec::parse(s).is_ok() {
            InputSpec::Gen(GenSpec::parse(s).expect("checked"))
        } else {
            InputSpec::File(PathBuf::from(s))
        }
    }

    pub fn id(&self) -> String {
        match self {
            InputSpec::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
            InputSpec::Gen(g) => g.to_string(),
        }
    }

    pub fn load(&self) -> Result<CooMatrix> {
        match self {
            InputSpec::File(p) => read_matrix_market(p),
            InputSpec::Gen(g) => g.build(),
        }
    }
}

impl std::fmt::Display for InputSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InputSpec::File(p) => write!(f, "{}", p.display()),
            InputSpec::Gen(g) => write!(f, "{g}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineChoice {
    Splim,
    CooSplim,
    Both,
}

impl PipelineChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "splim" => Ok(PipelineChoice::Splim),
            "coo-splim" => Ok(PipelineChoice::CooSplim),
            "both" => Ok(PipelineChoice::Both),
            other => Err(Error::InvalidArgument(format!(
                "unknown pipeline '{other}' (expected splim | coo-splim | both)"
            ))),
        }
    }

    fn runs_splim(&self) -> bool {
        matches!(self, PipelineChoice::Splim | PipelineChoice::Both)
    }

    fn runs_baseline(&self) -> bool {
        matches!(self, PipelineChoice::CooSplim | PipelineChoice::Both)
    }
}

impl std::fmt::Display for PipelineChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PipelineChoice::Splim => "splim",
            PipelineChoice::CooSplim => "coo-splim",
            PipelineChoice::Both => "both",
        })
    }
}

/// Sweep axis. Sparsity thins to 1/2 and 1/3 of the non-zeros; deviation
/// redistributes until sigma/2 and sigma/3; the PE sweep re-runs the same
/// operands under different element counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sweep {
    None,
    Tau,
    Sigma,
    Pes(Vec<usize>),
}

impl std::fmt::Display for Sweep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sweep::None => f.write_str("none"),
            Sweep::Tau => f.write_str("tau"),
            Sweep::Sigma => f.write_str("sigma"),
            Sweep::Pes(v) => {
                let list: Vec<String> = v.iter().map(|p| p.to_string()).collect();
                write!(f, "pes:{}", list.join(","))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub input: InputSpec,
    pub pipeline: PipelineChoice,
    pub sweep: Sweep,
    pub seed: u64,
    pub config: SccpConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportMeta {
    pub input: String,
    pub pipeline: String,
    pub sweep: String,
    pub seed: u64,
    pub config: SccpConfig,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CycleRow {
    pub mult: u64,
    pub search: u64,
    pub rowclone: u64,
    pub io: u64,
    pub ctrl: u64,
    pub total: u64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnergyRow {
    pub array: f64,
    pub leakage: f64,
    pub io: f64,
    pub ctrl: f64,
    pub total: f64,
}

/// One (matrix, sweep point, pipeline) measurement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub matrix_id: String,
    pub sweep_point: String,
    pub pipeline: String,
    pub num_pes: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    pub nnz: usize,
    pub nnz_a: f64,
    pub sigma: f64,
    pub tau: f64,
    pub k_a: usize,
    pub k_b: usize,
    pub overflow_nnz: usize,
    pub ellpack_padding: usize,
    pub batches: usize,
    pub mult_rounds: u64,
    pub spmv_iterations: u64,
    pub ri_searches: u64,
    pub ci_searches: u64,
    pub emissions: u64,
    pub intermediates: u64,
    pub intermediates_predicted: u64,
    pub output_nnz: usize,
    pub cycles: CycleRow,
    pub latency_s: f64,
    pub energy: EnergyRow,
    pub io_ctrl_share: f64,
    pub leakage_share: f64,
    pub utilization: Option<f64>,
    pub bytes_moved: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub meta: ReportMeta,
    pub rows: Vec<ReportRow>,
}

fn ledger_rows(
    base: &ReportRowBase,
    pipeline: &str,
    ledger: &CostLedger,
    energy_cfg: &EnergyConfig,
    extra: RowExtra,
) -> ReportRow {
    let cycles = finalized_cycles(ledger, energy_cfg);
    let energy = energy_of(ledger, energy_cfg);
    let shares = energy.shares();
    ReportRow {
        matrix_id: base.matrix_id.clone(),
        sweep_point: base.sweep_point.clone(),
        pipeline: pipeline.to_string(),
        num_pes: base.num_pes,
        n_rows: base.n_rows,
        n_cols: base.n_cols,
        nnz: base.nnz,
        nnz_a: base.nnz_a,
        sigma: base.sigma,
        tau: base.tau,
        k_a: extra.k_a,
        k_b: extra.k_b,
        overflow_nnz: extra.overflow_nnz,
        ellpack_padding: extra.ellpack_padding,
        batches: extra.batches,
        mult_rounds: ledger.mult_rounds,
        spmv_iterations: ledger.spmv_iterations,
        ri_searches: ledger.ri_searches,
        ci_searches: ledger.ci_searches,
        emissions: ledger.emissions,
        intermediates: ledger.intermediate_entries,
        intermediates_predicted: base.intermediates_predicted,
        output_nnz: extra.output_nnz,
        cycles: CycleRow {
            mult: cycles.mult,
            search: cycles.search,
            rowclone: cycles.rowclone,
            io: cycles.io,
            ctrl: cycles.ctrl,
            total: cycles.total(),
        },
        latency_s: latency_seconds(ledger, energy_cfg),
        energy: EnergyRow {
            array: energy.array,
            leakage: energy.leakage,
            io: energy.io,
            ctrl: energy.ctrl,
            total: energy.total(),
        },
        io_ctrl_share: shares.map(|s| s.io + s.ctrl).unwrap_or(0.0),
        leakage_share: shares.map(|s| s.leakage).unwrap_or(0.0),
        utilization: ledger.utilization(),
        bytes_moved: ledger.bytes_moved,
        seed: base.seed,
    }
}

struct ReportRowBase {
    matrix_id: String,
    sweep_point: String,
    num_pes: usize,
    n_rows: usize,
    n_cols: usize,
    nnz: usize,
    nnz_a: f64,
    sigma: f64,
    tau: f64,
    intermediates_predicted: u64,
    seed: u64,
}

#[derive(Default)]
struct RowExtra {
    k_a: usize,
    k_b: usize,
    overflow_nnz: usize,
    ellpack_padding: usize,
    batches: usize,
    output_nnz: usize,
}

/// One sweep point: operand A (already transformed), product A x A^T.
fn run_point(
    spec: &ExperimentSpec,
    matrix_id: &str,
    sweep_point: &str,
    a: &CooMatrix,
    cfg: &SccpConfig,
) -> Result<Vec<ReportRow>> {
    let b = a.transpose();
    let stats = a.row_stats();
    let k_round = if a.n_rows() > 0 {
        (stats.nnz as f64 / a.n_rows() as f64).round() as u64
    } else {
        0
    };
    let base = ReportRowBase {
        matrix_id: matrix_id.to_string(),
        sweep_point: sweep_point.to_string(),
        num_pes: cfg.num_pes,
        n_rows: a.n_rows(),
        n_cols: a.n_cols(),
        nnz: a.nnz(),
        nnz_a: stats.nnz_a,
        sigma: stats.sigma,
        tau: stats.tau,
        intermediates_predicted: predict(a.n_rows() as u64, k_round).intermediate_elements,
        seed: spec.seed,
    };

    let mut rows = Vec::new();
    if spec.pipeline.runs_splim() {
        let run = run_splim(a, &b, cfg)?;
        verify_against_oracle(&run.output, a, &b, GATE_REL_TOL)?;
        rows.push(ledger_rows(
            &base,
            "splim",
            &run.ledger,
            &cfg.energy,
            RowExtra {
                k_a: run.k_a,
                k_b: run.k_b,
                overflow_nnz: run.overflow_nnz,
                ellpack_padding: run.ellpack_padding,
                batches: run.batches,
                output_nnz: run.output.nnz(),
            },
        ));
    }
    if spec.pipeline.runs_baseline() {
        let run = run_coo_splim(a, &b, cfg)?;
        verify_against_oracle(&run.output, a, &b, GATE_REL_TOL)?;
        rows.push(ledger_rows(
            &base,
            "coo-splim",
            &run.ledger,
            &cfg.energy,
            RowExtra {
                output_nnz: run.output.nnz(),
                ..Default::default()
            },
        ));
    }
    Ok(rows)
}

/// Expands the sweep into (label, operand, config) points and runs them in
/// parallel. Point order is fixed by the sweep definition.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Report> {
    let a0 = spec.input.load()?;
    let matrix_id = spec.input.id();

    let mut points: Vec<(String, CooMatrix, SccpConfig)> = Vec::new();
    match &spec.sweep {
        Sweep::None => points.push(("base".into(), a0, spec.config.clone())),
        Sweep::Tau => {
            points.push(("tau".into(), a0.clone(), spec.config.clone()));
            points.push((
                "tau/2".into(),
                thin(&a0, 0.5, spec.seed ^ 0x7401)?,
                spec.config.clone(),
            ));
            points.push((
                "tau/3".into(),
                thin(&a0, 1.0 / 3.0, spec.seed ^ 0x7402)?,
                spec.config.clone(),
            ));
        }
        Sweep::Sigma => {
            let sigma0 = a0.row_stats().sigma;
            points.push(("sigma".into(), a0.clone(), spec.config.clone()));
            points.push((
                "sigma/2".into(),
                redistribute_until(&a0, Some(sigma0 / 2.0), spec.seed ^ 0x5102),
                spec.config.clone(),
            ));
            points.push((
                "sigma/3".into(),
                redistribute_until(&a0, Some(sigma0 / 3.0), spec.seed ^ 0x5103),
                spec.config.clone(),
            ));
        }
        Sweep::Pes(counts) => {
            for &t in counts {
                let cfg = SccpConfig {
                    num_pes: t,
                    ..spec.config.clone()
                };
                points.push((format!("pes={t}"), a0.clone(), cfg));
            }
        }
    }

    let row_groups: Result<Vec<Vec<ReportRow>>> = points
        .par_iter()
        .map(|(label, a, cfg)| run_point(spec, &matrix_id, label, a, cfg))
        .collect();

    Ok(Report {
        meta: ReportMeta {
            input: spec.input.to_string(),
            pipeline: spec.pipeline.to_string(),
            sweep: spec.sweep.to_string(),
            seed: spec.seed,
            config: spec.config.clone(),
        },
        rows: row_groups?.into_iter().flatten().collect(),
    })
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Fixed column order; documented in the README.
    pub const CSV_HEADER: &'static str = "matrix_id,sweep_point,pipeline,num_pes,n_rows,n_cols,nnz,\
nnz_a,sigma,tau,k_a,k_b,overflow_nnz,ellpack_padding,batches,mult_rounds,spmv_iterations,\
ri_searches,ci_searches,emissions,intermediates,intermediates_predicted,output_nnz,\
cycles_mult,cycles_search,cycles_rowclone,cycles_io,cycles_ctrl,cycles_total,latency_s,\
energy_array_j,energy_leakage_j,energy_io_j,energy_ctrl_j,energy_total_j,io_ctrl_share,\
leakage_share,utilization,bytes_moved,seed";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let util = r
                .utilization
                .map(|u| u.to_string())
                .unwrap_or_else(|| "n/a".into());
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.matrix_id,
                r.sweep_point,
                r.pipeline,
                r.num_pes,
                r.n_rows,
                r.n_cols,
                r.nnz,
                r.nnz_a,
                r.sigma,
                r.tau,
                r.k_a,
                r.k_b,
                r.overflow_nnz,
                r.ellpack_padding,
                r.batches,
                r.mult_rounds,
                r.spmv_iterations,
                r.ri_searches,
                r.ci_searches,
                r.emissions,
                r.intermediates,
                r.intermediates_predicted,
                r.output_nnz,
                r.cycles.mult,
                r.cycles.search,
                r.cycles.rowclone,
                r.cycles.io,
                r.cycles.ctrl,
                r.cycles.total,
                r.latency_s,
                r.energy.array,
                r.energy.leakage,
                r.energy.io,
                r.energy.ctrl,
                r.energy.total,
                r.io_ctrl_share,
                r.leakage_share,
                util,
                r.bytes_moved,
                r.seed,
            ));
        }
        out
    }
}

/// Per-key ratio between two reports: how much faster/leaner report A's run
/// is than report B's.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareRow {
    pub matrix_id: String,
    pub sweep_point: String,
    pub speedup: f64,
    pub energy_saving: f64,
    pub utilization_ratio: Option<f64>,
}

/// Matches rows by (matrix_id, sweep_point). Both reports must carry exactly
/// one row per key; missing keys are reported by name.
pub fn compare(a: &Report, b: &Report) -> Result<Vec<CompareRow>> {
    use std::collections::BTreeMap;
    let index = |r: &Report| -> Result<BTreeMap<(String, String), ReportRow>> {
        let mut m = BTreeMap::new();
        for row in &r.rows {
            let key = (row.matrix_id.clone(), row.sweep_point.clone());
            if m.insert(key.clone(), row.clone()).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "report has several rows for {key:?}; filter by pipeline first"
                )));
            }
        }
        Ok(m)
    };
    let ia = index(a)?;
    let ib = index(b)?;
    let missing: Vec<String> = ia
        .keys()
        .filter(|k| !ib.contains_key(*k))
        .chain(ib.keys().filter(|k| !ia.contains_key(*k)))
        .map(|k| format!("{}/{}", k.0, k.1))
        .collect();
    if !missing.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "reports do not share matrix ids; unmatched: {}",
            missing.join(", ")
        )));
    }
    Ok(ia
        .into_iter()
        .map(|(key, ra)| {
            let rb = &ib[&key];
            CompareRow {
                matrix_id: key.0,
                sweep_point: key.1,
                speedup: rb.latency_s / ra.latency_s,
                energy_saving: rb.energy.total / ra.energy.total,
                utilization_ratio: match (ra.utilization, rb.utilization) {
                    (Some(ua), Some(ub)) if ub > 0.0 => Some(ua / ub),
                    _ => None,
                },
            }
        })
        .collect())
}
