//! Monte Carlo campaign over the (mmWave density, policy) grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::engine::{run_once, RunResult};
use crate::metrics::{summarize, CellSummary, RunMetrics};
use crate::policy::PolicyKind;
use crate::seed::run_seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub lambda_m: f64,
    pub policy: PolicyKind,
}

/// Cells in canonical order: density ascending, then MS, MR, RA.
/// Duplicates are dropped.
pub fn cells(config: &ScenarioConfig) -> Vec<CellKey> {
    let mut lambdas = config.mmw_density_grid_per_km2.clone();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    let mut policies = config.policies.clone();
    policies.sort();
    policies.dedup();
    lambdas
        .iter()
        .flat_map(|&lambda_m| {
            policies
                .iter()
                .map(move |&policy| CellKey { lambda_m, policy })
        })
        .collect()
}

/// Run `index` of a cell, reproducible in isolation.
pub fn run_cell_index(config: &ScenarioConfig, cell: CellKey, index: u64) -> RunResult {
    let seed = run_seed(config.master_seed, cell.lambda_m, index);
    run_once(config, cell.lambda_m, cell.policy, seed)
}

/// All results of the campaign, lazily and sequentially, in canonical order.
pub fn run_campaign(config: &ScenarioConfig) -> impl Iterator<Item = RunResult> + '_ {
    cells(config).into_iter().flat_map(move |cell| {
        (0..config.n_sim as u64).map(move |i| run_cell_index(config, cell, i))
    })
}

/// Runs one cell on the current rayon pool and aggregates it. Per-run
/// metrics are collected in run order, so the result does not depend on the
/// number of workers.
pub fn summarize_cell(config: &ScenarioConfig, cell: CellKey) -> CellSummary {
    let runs: Vec<RunMetrics> = (0..config.n_sim as u64)
        .into_par_iter()
        .map(|i| RunMetrics::from(&run_cell_index(config, cell, i)))
        .collect();
    summarize(&runs)
}

/// Runs every cell with `workers` threads (0 = all cores). `progress` is
/// called after each finished cell with (done, total).
pub fn summarize_campaign(
    config: &ScenarioConfig,
    workers: usize,
    progress: impl Fn(usize, usize, &CellSummary) + Sync,
) -> Result<Vec<CellSummary>, rayon::ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?;
    let keys = cells(config);
    let total = keys.len();
    Ok(pool.install(|| {
        keys.iter()
            .enumerate()
            .map(|(i, &cell)| {
                let s = summarize_cell(config, cell);
                progress(i + 1, total, &s);
                s
            })
            .collect()
    }))
}
