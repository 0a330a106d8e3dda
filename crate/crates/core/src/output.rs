//! CSV and JSON-lines emission of cell summaries and per-vehicle dumps.
//!
//! Every document opens with a `#` comment block holding the tool version and
//! the fully resolved configuration. A plot of one metric against density is
//! a filter on `policy` and a pivot on `lambda_m` of the summary table.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::config::ScenarioConfig;
use crate::engine::RunResult;
use crate::metrics::{CellSummary, Stat};

pub const TOOL_NAME: &str = "v2i-sim";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    JsonLines,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" | "json-lines" => Ok(Format::JsonLines),
            _ => Err(format!("unknown format `{s}` (expected csv or jsonl)")),
        }
    }
}

#[derive(Debug, Error)]
#[error("cannot write {}: {source}", path.display())]
pub struct EmitError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

/// Placeholder written for undefined metrics in CSV.
pub const UNDEFINED: &str = "NA";

/// Formats like C's `%.6g`: six significant digits, trailing zeros trimmed,
/// scientific notation outside `[1e-4, 1e6)`.
pub fn format_sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), format_sig6)
}

/// The summary columns, in order.
pub fn csv_columns() -> Vec<String> {
    let mut cols: Vec<String> = ["lambda_m", "policy", "p_lte", "p_sat"]
        .map(String::from)
        .to_vec();
    for k in 1..=4 {
        cols.push(format!("mean_rate_{k}_bps"));
        cols.push(format!("p10_{k}_bps"));
        cols.push(format!("jain_{k}"));
    }
    cols.extend(["run_count", "seed", "nonconverged_runs"].map(String::from));
    cols
}

/// Comment block: tool version and resolved configuration.
pub fn header_block(config: &ScenarioConfig) -> String {
    let mut out = format!("# {TOOL_NAME} {TOOL_VERSION}\n# effective configuration:\n");
    for line in config.to_pretty_json().lines() {
        let _ = writeln!(out, "# {line}");
    }
    out
}

fn csv_row(s: &CellSummary, seed: u64) -> String {
    let mut fields = vec![
        format_sig6(s.lambda_m),
        s.policy.to_string(),
        opt(s.p_lte.mean),
        opt(s.p_sat.mean),
    ];
    for k in 0..4 {
        fields.push(opt(s.mean_rate_bps[k].mean));
        fields.push(opt(s.p10_bps[k].mean));
        fields.push(opt(s.jain[k].mean));
    }
    fields.push(s.run_count.to_string());
    fields.push(seed.to_string());
    fields.push(s.nonconverged_runs.to_string());
    fields.join(",")
}

fn json_num(v: Option<f64>) -> Value {
    // Round through the 6-digit text form so both formats carry the same values.
    v.and_then(|x| format_sig6(x).parse::<f64>().ok())
        .map_or(Value::Null, Value::from)
}

fn json_row(s: &CellSummary, seed: u64) -> Value {
    let stat = |st: &Stat| json_num(st.mean);
    let mut obj = Map::new();
    obj.insert("lambda_m".into(), json_num(Some(s.lambda_m)));
    obj.insert("policy".into(), json!(s.policy.as_str()));
    obj.insert("p_lte".into(), stat(&s.p_lte));
    obj.insert("p_sat".into(), stat(&s.p_sat));
    for k in 0..4 {
        let n = k + 1;
        obj.insert(format!("mean_rate_{n}_bps"), stat(&s.mean_rate_bps[k]));
        obj.insert(format!("p10_{n}_bps"), stat(&s.p10_bps[k]));
        obj.insert(format!("jain_{n}"), stat(&s.jain[k]));
    }
    obj.insert("run_count".into(), json!(s.run_count));
    obj.insert("seed".into(), json!(seed));
    obj.insert("nonconverged_runs".into(), json!(s.nonconverged_runs));
    Value::Object(obj)
}

/// Writes the header block and one row per summary. Rows are emitted in
/// canonical (density, policy) order whatever order they arrive in.
pub fn write_summaries<W: Write>(
    mut w: W,
    config: &ScenarioConfig,
    summaries: &[CellSummary],
    format: Format,
) -> io::Result<()> {
    let mut rows: Vec<&CellSummary> = summaries.iter().collect();
    rows.sort_by(|a, b| {
        a.lambda_m
            .total_cmp(&b.lambda_m)
            .then(a.policy.cmp(&b.policy))
    });
    w.write_all(header_block(config).as_bytes())?;
    match format {
        Format::Csv => {
            writeln!(w, "{}", csv_columns().join(","))?;
            for s in rows {
                writeln!(w, "{}", csv_row(s, config.master_seed))?;
            }
        }
        Format::JsonLines => {
            for s in rows {
                writeln!(w, "{}", json_row(s, config.master_seed))?;
            }
        }
    }
    w.flush()
}

pub const DUMP_COLUMNS: &str = "vn_id,class,in_region,bs_id,tier,rate_bps,required_rate_bps";

/// Per-vehicle records of one run.
pub fn write_run_dump<W: Write>(
    mut w: W,
    config: &ScenarioConfig,
    run: &RunResult,
    format: Format,
) -> io::Result<()> {
    w.write_all(header_block(config).as_bytes())?;
    writeln!(
        w,
        "# run: lambda_m={} policy={} seed={} iterations={} converged={}",
        format_sig6(run.lambda_m),
        run.policy,
        run.seed,
        run.convergence_iterations,
        run.converged
    )?;
    match format {
        Format::Csv => {
            writeln!(w, "{DUMP_COLUMNS}")?;
            for r in &run.records {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    r.vn_id,
                    r.class.number(),
                    r.in_region,
                    r.bs_id
                        .map_or_else(|| UNDEFINED.to_string(), |b| b.to_string()),
                    r.tier.map_or(UNDEFINED, |t| t.as_str()),
                    format_sig6(r.rate_bps),
                    format_sig6(r.required_rate_bps),
                )?;
            }
        }
        Format::JsonLines => {
            for r in &run.records {
                serde_json::to_writer(&mut w, r)?;
                writeln!(w)?;
            }
        }
    }
    w.flush()
}
