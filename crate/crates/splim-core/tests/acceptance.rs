//! Acceptance suite: one test per criterion, one PASS line per criterion.
//!
//! Run with `cargo test -p splim-core --test acceptance -- --nocapture` to
//! see the per-criterion lines.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use splim_core::baseline::{oracle_spgemm, run_coo_splim};
use splim_core::coo::{CooEntry, CooMatrix};
use splim_core::cost::{energy_of, latency_seconds, CostLedger};
use splim_core::crossbar::{min_search, Crossbar, RowMask};
use splim_core::experiments::{run_experiment, ExperimentSpec, InputSpec, PipelineChoice, Sweep};
use splim_core::market::read_matrix_market;
use splim_core::pipeline::{run_splim, SplimRun};
use splim_core::sccp::SccpConfig;
use splim_core::synth::{gen_banded, gen_clustered, gen_skewed, gen_uniform, redistribute_until, thin};

fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Top-left n x n submatrix.
fn truncate(m: &CooMatrix, n: usize) -> CooMatrix {
    let entries: Vec<CooEntry> = m
        .entries()
        .iter()
        .filter(|e| (e.row as usize) < n && (e.col as usize) < n)
        .copied()
        .collect();
    CooMatrix::new(n.min(m.n_rows()), n.min(m.n_cols()), entries).unwrap()
}

/// Deterministic integer remap of the values, exact in f64 arithmetic.
fn integerize(m: &CooMatrix) -> CooMatrix {
    let entries: Vec<CooEntry> = m
        .entries()
        .iter()
        .map(|e| {
            let v = ((e.row as u64 * 31 + e.col as u64 * 17) % 7 + 1) as f64;
            CooEntry::new(e.row, e.col, v)
        })
        .collect();
    CooMatrix::new(m.n_rows(), m.n_cols(), entries).unwrap()
}

enum ValueKind {
    Real,
    Integer,
}

/// Runs A x A^T through the condensed pipeline and checks it against the
/// reference product: exact for integer values, 1e-9 relative otherwise.
fn check_pipeline(a: &CooMatrix, cfg: &SccpConfig, kind: ValueKind, ctx: &str) -> SplimRun {
    let b = a.transpose();
    let run = run_splim(a, &b, cfg).unwrap_or_else(|e| panic!("{ctx}: {e}"));
    let want = oracle_spgemm(a, &b).unwrap();
    assert_eq!(run.output.nnz(), want.nnz(), "{ctx}: nnz mismatch");
    for (g, w) in run.output.entries().iter().zip(want.entries()) {
        assert_eq!((g.row, g.col), (w.row, w.col), "{ctx}: coordinate mismatch");
        match kind {
            ValueKind::Integer => {
                assert_eq!(g.val, w.val, "{ctx}: integer value mismatch at ({}, {})", g.row, g.col)
            }
            ValueKind::Real => {
                let scale = w.val.abs().max(1e-300);
                assert!(
                    (g.val - w.val).abs() / scale <= 1e-9,
                    "{ctx}: value at ({}, {}): {} vs {}",
                    g.row,
                    g.col,
                    g.val,
                    w.val
                );
            }
        }
    }
    run
}

fn random_matrix(rng: &mut ChaCha8Rng, i: usize) -> (CooMatrix, ValueKind, String) {
    let n = rng.gen_range(4..=512usize);
    // Log-uniform density in [0.1%, 20%].
    let d = (rng.gen::<f64>() * (0.2f64.ln() - 0.001f64.ln()) + 0.001f64.ln()).exp();
    let k = ((d * n as f64).round() as usize).clamp(1, n);
    let seed = rng.gen::<u64>();
    let (m, desc) = match i % 5 {
        // Zero-deviation inputs.
        0 => (gen_banded(n, k, seed).unwrap(), format!("banded n={n} k={k}")),
        // Heavy-tailed rows.
        1 => {
            let heavy = (n / 16).max(1);
            let k_heavy = (k * 6).min(n);
            (
                gen_skewed(n, k, k_heavy, heavy, seed).unwrap(),
                format!("skewed n={n} k={k} kheavy={k_heavy}"),
            )
        }
        2 => {
            let block = (n / 8).clamp(1, 64);
            (
                gen_clustered(n, k, block, seed).unwrap(),
                format!("clustered n={n} k={k} block={block}"),
            )
        }
        _ => (gen_uniform(n, k, seed).unwrap(), format!("uniform n={n} k={k}")),
    };
    if i % 3 == 0 {
        (integerize(&m), ValueKind::Integer, format!("{desc} int"))
    } else {
        (m, ValueKind::Real, desc)
    }
}

#[test]
fn acceptance_01_functional_equivalence() {
    let start = Instant::now();
    let cfg = SccpConfig::desk();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE01);

    for i in 0..200 {
        let (a, kind, desc) = random_matrix(&mut rng, i);
        check_pipeline(&a, &cfg, kind, &format!("case {i}: {desc}"));
    }

    for name in ["fem_plate.mtx", "web_graph.mtx", "circuit_sim.mtx"] {
        let m = truncate(&read_matrix_market(fixture(name)).unwrap(), 2048);
        check_pipeline(&m, &cfg, ValueKind::Real, name);
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 300.0,
        "functional sweep took {elapsed:?}, budget is 5 minutes"
    );
    println!(
        "ACCEPTANCE 1 (functional equivalence, 200 random + 3 file matrices): PASS in {:.1}s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn acceptance_02_min_search_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE02);
    for trial in 0..10_000 {
        let word_bits = [3u32, 8, 32][trial % 3];
        let rows = rng.gen_range(1..=48usize);
        let mut xb = Crossbar::new(rows, word_bits as usize, word_bits);
        let mut vals = Vec::with_capacity(rows);
        for r in 0..rows {
            let v = rng.gen::<u64>() & ((1u64 << word_bits) - 1);
            xb.write_word(r, 0, v);
            vals.push(v);
        }
        let mut active = RowMask::none(rows);
        for r in 0..rows {
            if rng.gen::<bool>() {
                active.set(r, true);
            }
        }
        if active.is_empty() {
            active.set(rng.gen_range(0..rows), true);
        }

        let mut ledger = CostLedger::new();
        let (min, holders) = min_search(&xb, 0, &active, &mut ledger);
        let expect = active.iter_rows().map(|r| vals[r]).min().unwrap();
        assert_eq!(min, expect, "trial {trial} (b = {word_bits})");
        for r in 0..rows {
            assert_eq!(
                holders.get(r),
                active.get(r) && vals[r] == expect,
                "trial {trial} row {r}"
            );
        }
        assert_eq!(
            ledger.cycles.search, word_bits as u64,
            "search must cost exactly word_bits cycles"
        );
    }
    println!("ACCEPTANCE 2 (minima-search oracle equivalence, 10000 instances): PASS");
}

#[test]
fn acceptance_03_sortedness() {
    let cfg = SccpConfig::desk();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE03);
    let mut checked = 0usize;
    for i in 0..40 {
        let (a, _, desc) = random_matrix(&mut rng, i);
        let b = a.transpose();
        let run = run_splim(&a, &b, &cfg).unwrap();
        for w in run.output.entries().windows(2) {
            assert!(
                (w[0].row, w[0].col) < (w[1].row, w[1].col),
                "{desc}: output not strictly sorted"
            );
        }
        checked += run.output.nnz();
    }
    println!("ACCEPTANCE 3 (sorted, duplicate-free output; {checked} entries checked): PASS");
}

#[test]
fn acceptance_04_complexity_reproduction() {
    let cfg = SccpConfig::desk();
    for (n, k) in [(256usize, 4usize), (256, 8), (512, 8), (1024, 16)] {
        let a = gen_banded(n, k, 97).unwrap();
        let b = a.transpose();

        let splim = run_splim(&a, &b, &cfg).unwrap();
        assert_eq!(
            splim.ledger.intermediate_entries,
            (n * k * k) as u64,
            "(N, K) = ({n}, {k}): intermediates must equal N*K^2"
        );
        assert_eq!(
            splim.ledger.mult_rounds, k as u64,
            "(N, K) = ({n}, {k}): mult rounds must equal K"
        );

        let base = run_coo_splim(&a, &b, &cfg).unwrap();
        assert_eq!(base.spmv_iterations, n as u64);
        assert_eq!(base.ledger.intermediate_entries, (n * n) as u64);

        // Memory ratio baseline/condensed = N^2 / (N*K^2) = N / K^2, exact.
        let lhs = base.ledger.intermediate_entries as u128 * (k * k) as u128;
        let rhs = splim.ledger.intermediate_entries as u128 * n as u128;
        assert_eq!(lhs, rhs, "(N, K) = ({n}, {k}): memory ratio must be N/K^2");
    }
    println!("ACCEPTANCE 4 (N*K^2 intermediates, K rounds, N iterations, N/K^2 memory ratio): PASS");
}

#[test]
fn acceptance_05_utilization_gap() {
    let cfg = SccpConfig::desk();
    for k in [5usize, 25, 50] {
        let n = 500usize;
        let d = k as f64 / n as f64;
        let a = gen_banded(n, k, 23).unwrap();
        let b = a.transpose();

        let splim = run_splim(&a, &b, &cfg).unwrap();
        let coo = run_coo_splim(&a, &b, &cfg).unwrap();
        let u_splim = splim.ledger.utilization().unwrap();
        let u_coo = coo.ledger.utilization().unwrap();

        assert!(u_splim >= 0.95, "d = {d}: condensed utilization {u_splim} < 0.95");
        assert!(
            (u_coo - d).abs() <= 0.2 * d,
            "d = {d}: baseline utilization {u_coo} outside 20% of density"
        );
        let ratio = u_splim / u_coo;
        assert!(
            (ratio - 1.0 / d).abs() <= 0.25 / d,
            "d = {d}: utilization ratio {ratio} outside 25% of {}",
            1.0 / d
        );
    }
    println!("ACCEPTANCE 5 (utilization >= 0.95 vs density-bound baseline, ratio ~ 1/d): PASS");
}

#[test]
fn acceptance_06_tau_sensitivity() {
    let cfg = SccpConfig::desk();
    let a = gen_uniform(512, 48, 42).unwrap();
    let latency = |m: &CooMatrix| {
        let b = m.transpose();
        let run = run_splim(m, &b, &cfg).unwrap();
        latency_seconds(&run.ledger, &cfg.energy)
    };
    let l_full = latency(&a);
    let l_half = latency(&thin(&a, 0.5, 1).unwrap());
    let l_third = latency(&thin(&a, 1.0 / 3.0, 2).unwrap());

    let drop = 1.0 - l_half / l_full;
    assert!(
        (0.30..=0.50).contains(&drop),
        "halving nnz changed execution time by {:.1}%, expected 30-50%",
        drop * 100.0
    );
    assert!(l_half < l_full && l_third < l_half, "latency must decrease monotonically");
    println!(
        "ACCEPTANCE 6 (sparsity sensitivity: halving nnz cuts time by {:.1}%, monotone): PASS",
        drop * 100.0
    );
}

#[test]
fn acceptance_07_sigma_sensitivity() {
    let cfg = SccpConfig::desk();
    let a = gen_clustered(512, 3, 48, 5).unwrap();
    let sigma0 = a.row_stats().sigma;
    let mut latencies = Vec::new();
    let mut paddings = Vec::new();
    for target in [None, Some(sigma0 / 2.0), Some(sigma0 / 3.0)] {
        let m = match target {
            None => a.clone(),
            Some(t) => redistribute_until(&a, Some(t), 6),
        };
        if let Some(t) = target {
            assert!(m.row_stats().sigma <= t, "redistribution missed its target");
        }
        assert_eq!(m.nnz(), a.nnz(), "redistribution must preserve nnz");
        let b = m.transpose();
        let run = run_splim(&m, &b, &cfg).unwrap();
        latencies.push(latency_seconds(&run.ledger, &cfg.energy));
        paddings.push(run.ellpack_padding);
    }
    assert!(
        latencies[1] <= latencies[0] && latencies[2] <= latencies[1],
        "latency must not increase as deviation shrinks: {latencies:?}"
    );
    assert!(
        paddings[1] < paddings[0] && paddings[2] < paddings[1],
        "padding must strictly decrease: {paddings:?}"
    );
    println!(
        "ACCEPTANCE 7 (deviation sensitivity: latency {:.2e} -> {:.2e} -> {:.2e}, padding {:?}): PASS",
        latencies[0], latencies[1], latencies[2], paddings
    );
}

#[test]
fn acceptance_08_pe_scalability() {
    let base = SccpConfig {
        arrays_per_pe: 64,
        ..SccpConfig::desk()
    };
    let a = gen_banded(128, 64, 3).unwrap();
    let b = a.transpose();
    let lat = |t: usize, m: &CooMatrix, mt: &CooMatrix| {
        let cfg = SccpConfig {
            num_pes: t,
            ..base.clone()
        };
        let run = run_splim(m, mt, &cfg).unwrap();
        latency_seconds(&run.ledger, &cfg.energy)
    };
    let l8 = lat(8, &a, &b);
    let l16 = lat(16, &a, &b);
    let l32 = lat(32, &a, &b);
    let s32v8 = l8 / l32;
    let s32v16 = l16 / l32;
    assert!(
        (3.0..=4.0).contains(&s32v8),
        "32 vs 8 PEs speedup {s32v8:.3} outside [3, 4]"
    );
    assert!(
        (1.5..=2.0).contains(&s32v16),
        "32 vs 16 PEs speedup {s32v16:.3} outside [1.5, 2]"
    );

    // Latency never increases with more PEs, on every test matrix.
    let others = [
        gen_banded(256, 8, 97).unwrap(),
        gen_uniform(256, 24, 11).unwrap(),
        gen_clustered(256, 3, 32, 8).unwrap(),
    ];
    for (i, m) in others.iter().enumerate() {
        let mt = m.transpose();
        let ls: Vec<f64> = [8, 16, 32].iter().map(|&t| lat(t, m, &mt)).collect();
        assert!(
            ls[0] >= ls[1] && ls[1] >= ls[2],
            "matrix {i}: latency increased with PE count: {ls:?}"
        );
    }
    println!(
        "ACCEPTANCE 8 (PE scaling: 32v8 = {s32v8:.2}x in [3,4], 32v16 = {s32v16:.2}x in [1.5,2], monotone): PASS"
    );
}

#[test]
fn acceptance_09_energy_breakdown() {
    let cfg = SccpConfig::desk();
    let inputs: Vec<(String, CooMatrix)> = vec![
        ("banded d=0.01".into(), gen_banded(500, 5, 23).unwrap()),
        ("banded d=0.05".into(), gen_banded(500, 25, 23).unwrap()),
        ("banded d=0.10".into(), gen_banded(500, 50, 23).unwrap()),
        ("uniform 512/48".into(), gen_uniform(512, 48, 42).unwrap()),
        ("clustered 512".into(), gen_clustered(512, 3, 48, 5).unwrap()),
    ];
    for (name, a) in &inputs {
        let b = a.transpose();
        let splim = run_splim(a, &b, &cfg).unwrap();
        let coo = run_coo_splim(a, &b, &cfg).unwrap();
        let s = energy_of(&splim.ledger, &cfg.energy).shares().unwrap();
        let c = energy_of(&coo.ledger, &cfg.energy).shares().unwrap();
        assert!(
            s.io + s.ctrl < 0.10,
            "{name}: condensed IO+CTRL share {} >= 10%",
            s.io + s.ctrl
        );
        assert!(
            c.leakage > s.leakage,
            "{name}: baseline leakage share {} not above condensed {}",
            c.leakage,
            s.leakage
        );
    }
    println!("ACCEPTANCE 9 (IO+CTRL < 10%, baseline leakage share strictly higher): PASS");
}

#[test]
fn acceptance_10_determinism() {
    let spec = ExperimentSpec {
        input: InputSpec::parse("clustered:n=128,k=3,block=24,seed=5"),
        pipeline: PipelineChoice::Both,
        sweep: Sweep::Sigma,
        seed: 7,
        config: SccpConfig::desk(),
    };
    let r1 = run_experiment(&spec).unwrap();
    let r2 = run_experiment(&spec).unwrap();
    assert_eq!(r1.to_json(), r2.to_json(), "repeat run must be byte-identical");
    assert_eq!(r1.to_csv(), r2.to_csv());

    // Worker count must not matter.
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_experiment(&spec).unwrap());
    let many = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| run_experiment(&spec).unwrap());
    assert_eq!(single.to_json(), many.to_json());
    assert_eq!(single.to_csv(), many.to_csv());
    println!("ACCEPTANCE 10 (byte-identical reports across repeats and worker counts): PASS");
}
