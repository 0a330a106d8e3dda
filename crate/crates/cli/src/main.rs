//! `v2i-sim`: runs an attachment-policy campaign and writes one summary row
//! per (mmWave density, policy) cell.
//!
//! Exit codes: 0 success, 1 configuration error, 2 I/O error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::Parser;
use v2i_core::campaign::{run_cell_index, summarize_campaign, CellKey};
use v2i_core::output::{write_run_dump, write_summaries, EmitError, Format};
use v2i_core::{PolicyKind, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "v2i-sim", version, about)]
struct Args {
    /// JSON scenario file (`-` for stdin). Absent keys take reference defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Policy to simulate (MS, MR, RA); repeatable, replaces the config list.
    #[arg(long = "policy")]
    policies: Vec<PolicyKind>,
    /// Comma-separated mmWave densities in BS/km², replaces the config grid.
    #[arg(long = "lambda-m", value_delimiter = ',')]
    lambda_m: Option<Vec<f64>>,
    /// Monte Carlo runs per cell.
    #[arg(long)]
    runs: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output format: csv or jsonl.
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    parallel: usize,
    /// Dump the per-vehicle records of one run instead of summarizing,
    /// given as LAMBDA:POLICY,INDEX (e.g. `40:RA,3`).
    #[arg(long = "dump-run")]
    dump_run: Option<DumpTarget>,
}

#[derive(Clone, Copy, Debug)]
struct DumpTarget {
    cell: CellKey,
    index: u64,
}

impl FromStr for DumpTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || format!("expected LAMBDA:POLICY,INDEX, got `{s}`");
        let (cell, index) = s.split_once(',').ok_or_else(err)?;
        let (lambda, policy) = cell.split_once(':').ok_or_else(err)?;
        Ok(DumpTarget {
            cell: CellKey {
                lambda_m: lambda.trim().parse().map_err(|_| err())?,
                policy: policy.trim().parse()?,
            },
            index: index.trim().parse().map_err(|_| err())?,
        })
    }
}

enum Failure {
    Config(String),
    Io(String),
}

fn resolve_config(args: &Args) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => ScenarioConfig::load(path).map_err(|e| Failure::Config(e.to_string()))?,
        None => ScenarioConfig::default(),
    };
    if !args.policies.is_empty() {
        cfg.policies = args.policies.clone();
    }
    if let Some(grid) = &args.lambda_m {
        cfg.mmw_density_grid_per_km2 = grid.clone();
    }
    if let Some(n) = args.runs {
        cfg.n_sim = n;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(cfg)
}

fn with_output(
    dest: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), EmitError> {
    match dest {
        Some(path) => {
            let wrap = |source| EmitError {
                path: path.to_path_buf(),
                source,
            };
            let file = File::create(path).map_err(wrap)?;
            let mut w = BufWriter::new(file);
            write(&mut w).map_err(wrap)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w).map_err(|source| EmitError {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

fn run(args: Args) -> Result<(), Failure> {
    let cfg = resolve_config(&args)?;
    let dest = args.out.as_deref();

    if let Some(target) = args.dump_run {
        eprintln!(
            "dumping run {} of cell lambda_m={} policy={}",
            target.index, target.cell.lambda_m, target.cell.policy
        );
        let result = run_cell_index(&cfg, target.cell, target.index);
        return with_output(dest, |w| write_run_dump(w, &cfg, &result, args.format))
            .map_err(|e| Failure::Io(e.to_string()));
    }

    let summaries = summarize_campaign(&cfg, args.parallel, |done, total, s| {
        eprintln!(
            "[{done}/{total}] lambda_m={} policy={} runs={}",
            s.lambda_m, s.policy, s.run_count
        );
    })
    .map_err(|e| Failure::Config(format!("cannot start worker pool: {e}")))?;
    with_output(dest, |w| write_summaries(w, &cfg, &summaries, args.format))
        .map_err(|e| Failure::Io(e.to_string()))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
