//! `splim` command line: run A x A^T experiments, compare reports, and print
//! the analytic complexity predictors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use splim_core::cost::predict;
use splim_core::experiments::{
    compare, run_experiment, ExperimentSpec, InputSpec, PipelineChoice, Report, Sweep,
};
use splim_core::sccp::SccpConfig;
use splim_core::{Error, Result};

#[derive(Parser)]
#[command(name = "splim", version, about = "In-memory SpGEMM accelerator simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one input (or a sweep) through the selected pipelines and write
    /// report files. Exits non-zero if any output mismatches the reference
    /// product.
    Run(RunArgs),
    /// Ratio table (speedup, energy saving, utilization) between two report
    /// JSON files, matched by matrix id and sweep point.
    Compare(CompareArgs),
    /// Analytic memory/time predictors for an N x N operand with K condensed
    /// vectors; covers sizes too large to execute functionally.
    Predict(PredictArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Matrix Market file to load.
    #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
    input: Option<PathBuf>,
    /// Generator spec, e.g. "uniform:n=1024,k=16,seed=7" (kinds: uniform,
    /// banded, skewed, clustered).
    #[arg(long)]
    gen: Option<String>,
    /// splim | coo-splim | both
    #[arg(long, default_value = "both")]
    pipeline: String,
    /// none | tau | sigma | pes
    #[arg(long, default_value = "none")]
    sweep: String,
    /// PE counts for the pes sweep.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    pes: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; SPLIM_OUT_DIR overrides the default.
    #[arg(long, env = "SPLIM_OUT_DIR", default_value = "splim-out")]
    out: PathBuf,
    /// json | csv | both
    #[arg(long, default_value = "both")]
    format: String,
    /// Processing elements.
    #[arg(long)]
    num_pes: Option<usize>,
    /// Arrays per processing element (desk default 16).
    #[arg(long)]
    arrays_per_pe: Option<usize>,
    /// Stored word width.
    #[arg(long)]
    word_bits: Option<u32>,
    /// Cycles per in-situ vector multiplication pass.
    #[arg(long)]
    mult_cycles: Option<u64>,
    /// Use the full platform geometry (1000 arrays per PE).
    #[arg(long)]
    full_config: bool,
}

#[derive(Args)]
struct CompareArgs {
    report_a: PathBuf,
    report_b: PathBuf,
    /// Write the delta table as JSON next to printing it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: u64,
}

fn parse_sweep(s: &str, pes: &[usize]) -> Result<Sweep> {
    match s {
        "none" => Ok(Sweep::None),
        "tau" => Ok(Sweep::Tau),
        "sigma" => Ok(Sweep::Sigma),
        "pes" => Ok(Sweep::Pes(pes.to_vec())),
        other => Err(Error::InvalidArgument(format!(
            "unknown sweep '{other}' (expected none | tau | sigma | pes)"
        ))),
    }
}

fn run(args: &RunArgs) -> Result<()> {
    let input = match (&args.input, &args.gen) {
        (Some(path), None) => InputSpec::File(path.clone()),
        (None, Some(spec)) => InputSpec::parse(spec),
        _ => {
            return Err(Error::InvalidArgument(
                "exactly one of --input and --gen is required".into(),
            ))
        }
    };

    let mut config = if args.full_config {
        SccpConfig::table2()
    } else {
        SccpConfig::desk()
    };
    if let Some(t) = args.num_pes {
        config.num_pes = t;
    }
    if let Some(a) = args.arrays_per_pe {
        config.arrays_per_pe = a;
    }
    if let Some(b) = args.word_bits {
        config.word_bits = b;
    }
    if let Some(c) = args.mult_cycles {
        config.mult_cycles = c;
    }

    let spec = ExperimentSpec {
        input,
        pipeline: PipelineChoice::parse(&args.pipeline)?,
        sweep: parse_sweep(&args.sweep, &args.pes)?,
        seed: args.seed,
        config,
    };
    let report = run_experiment(&spec)?;

    std::fs::create_dir_all(&args.out)?;
    let stem = sanitize(&spec.input.id());
    let mut written = Vec::new();
    if args.format == "json" || args.format == "both" {
        let path = args.out.join(format!("{stem}.json"));
        std::fs::write(&path, report.to_json())?;
        written.push(path);
    }
    if args.format == "csv" || args.format == "both" {
        let path = args.out.join(format!("{stem}.csv"));
        std::fs::write(&path, report.to_csv())?;
        written.push(path);
    }
    if written.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "unknown format '{}' (expected json | csv | both)",
            args.format
        )));
    }

    print_summary(&report);
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn print_summary(report: &Report) {
    println!(
        "{:<28} {:<10} {:>12} {:>12} {:>12} {:>8}",
        "point/pipeline", "nnz", "cycles", "latency_s", "energy_j", "util"
    );
    for r in &report.rows {
        println!(
            "{:<28} {:<10} {:>12} {:>12.3e} {:>12.3e} {:>8}",
            format!("{}/{}", r.sweep_point, r.pipeline),
            r.nnz,
            r.cycles.total,
            r.latency_s,
            r.energy.total,
            r.utilization
                .map(|u| format!("{u:.3}"))
                .unwrap_or_else(|| "n/a".into()),
        );
    }
}

fn run_compare(args: &CompareArgs) -> Result<()> {
    let load = |p: &PathBuf| -> Result<Report> {
        let text = std::fs::read_to_string(p)?;
        Ok(serde_json::from_str(&text)?)
    };
    let a = load(&args.report_a)?;
    let b = load(&args.report_b)?;
    let rows = compare(&a, &b)?;
    println!(
        "{:<40} {:>10} {:>14} {:>12}",
        "matrix/point", "speedup", "energy_saving", "util_ratio"
    );
    for r in &rows {
        println!(
            "{:<40} {:>10.3} {:>14.3} {:>12}",
            format!("{}/{}", r.matrix_id, r.sweep_point),
            r.speedup,
            r.energy_saving,
            r.utilization_ratio
                .map(|u| format!("{u:.3}"))
                .unwrap_or_else(|| "n/a".into()),
        );
    }
    if let Some(out) = &args.out {
        std::fs::write(out, serde_json::to_string_pretty(&rows)? + "\n")?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    // Die quietly when the output pipe closes (e.g. `splim ... | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run(args) => run(args),
        Cmd::Compare(args) => run_compare(args),
        Cmd::Predict(args) => {
            let report = predict(args.n, args.k);
            match serde_json::to_string_pretty(&report) {
                Ok(s) => {
                    println!("{s}");
                    Ok(())
                }
                Err(e) => Err(e.into()),
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
