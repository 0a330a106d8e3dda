//! Figures of merit per run and their Monte Carlo aggregation per cell.
//!
//! A metric that cannot be evaluated on a run (no vehicle of the class in the
//! measurement region, or an all-zero rate vector for Jain's index) is `None`
//! and is skipped when averaging across runs rather than counted as zero.

use serde::{Deserialize, Serialize};

use crate::engine::{RunResult, VnRecord};
use crate::geometry::{Tier, TrafficClass};
use crate::policy::PolicyKind;

fn class_rates(records: &[VnRecord], k: TrafficClass) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.class == k)
        .map(|r| r.rate_bps)
        .collect()
}

/// Mean rate of class `k`.
pub fn mean_rate_per_class(records: &[VnRecord], k: TrafficClass) -> Option<f64> {
    let rates = class_rates(records, k);
    (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64)
}

/// Number of samples in the worst decile of `n`.
pub fn worst_decile_count(n: usize) -> usize {
    n.div_ceil(10)
}

/// Mean of the lowest `ceil(n / 10)` values.
pub fn worst_decile_of(mut rates: Vec<f64>) -> Option<f64> {
    if rates.is_empty() {
        return None;
    }
    rates.sort_by(f64::total_cmp);
    let c = worst_decile_count(rates.len());
    Some(rates[..c].iter().sum::<f64>() / c as f64)
}

/// Mean rate of the worst 10% of class `k`.
pub fn worst_decile_mean(records: &[VnRecord], k: TrafficClass) -> Option<f64> {
    worst_decile_of(class_rates(records, k))
}

/// Fraction of vehicles whose rate reaches their class requirement.
pub fn satisfaction_ratio(records: &[VnRecord]) -> Option<f64> {
    if records.is_empty() {
        return None;
    }
    let sat = records
        .iter()
        .filter(|r| r.bs_id.is_some() && r.rate_bps >= r.required_rate_bps)
        .count();
    Some(sat as f64 / records.len() as f64)
}

/// Fraction of vehicles served by the LTE tier. Unattached vehicles count in
/// the denominator only.
pub fn lte_ratio(records: &[VnRecord]) -> Option<f64> {
    if records.is_empty() {
        return None;
    }
    let lte = records.iter().filter(|r| r.tier == Some(Tier::Lte)).count();
    Some(lte as f64 / records.len() as f64)
}

/// Jain's fairness index `(sum x)^2 / (n sum x^2)`.
pub fn jain_of(rates: &[f64]) -> Option<f64> {
    let sum: f64 = rates.iter().sum();
    let sum_sq: f64 = rates.iter().map(|x| x * x).sum();
    if rates.is_empty() || sum_sq == 0.0 {
        return None;
    }
    Some(sum * sum / (rates.len() as f64 * sum_sq))
}

pub fn jain_index(records: &[VnRecord], k: TrafficClass) -> Option<f64> {
    jain_of(&class_rates(records, k))
}

/// The metrics of one run, computed over in-region vehicles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub lambda_m: f64,
    pub policy: PolicyKind,
    pub mean_rate_bps: [Option<f64>; 4],
    pub p10_bps: [Option<f64>; 4],
    pub jain: [Option<f64>; 4],
    pub p_sat: Option<f64>,
    pub p_lte: Option<f64>,
    pub converged: bool,
}

impl RunMetrics {
    pub fn from_records(
        lambda_m: f64,
        policy: PolicyKind,
        records: &[VnRecord],
        converged: bool,
    ) -> Self {
        let inside: Vec<VnRecord> = records.iter().filter(|r| r.in_region).cloned().collect();
        let per_class = |f: fn(&[VnRecord], TrafficClass) -> Option<f64>| {
            TrafficClass::ALL.map(|k| f(&inside, k))
        };
        Self {
            lambda_m,
            policy,
            mean_rate_bps: per_class(mean_rate_per_class),
            p10_bps: per_class(worst_decile_mean),
            jain: per_class(jain_index),
            p_sat: satisfaction_ratio(&inside),
            p_lte: lte_ratio(&inside),
            converged,
        }
    }
}

impl From<&RunResult> for RunMetrics {
    fn from(r: &RunResult) -> Self {
        RunMetrics::from_records(r.lambda_m, r.policy, &r.records, r.converged)
    }
}

/// Cross-run mean with its standard error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: Option<f64>,
    /// Sample standard deviation over `sqrt(count)`; needs two samples.
    pub std_error: Option<f64>,
    /// Runs on which the metric was defined.
    pub count: usize,
}

impl Stat {
    pub fn from_samples(samples: impl IntoIterator<Item = Option<f64>>) -> Self {
        let xs: Vec<f64> = samples.into_iter().flatten().collect();
        let n = xs.len();
        if n == 0 {
            return Stat::default();
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std_error = (n >= 2).then(|| {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        });
        Stat {
            mean: Some(mean),
            std_error,
            count: n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub lambda_m: f64,
    pub policy: PolicyKind,
    pub mean_rate_bps: [Stat; 4],
    pub p10_bps: [Stat; 4],
    pub jain: [Stat; 4],
    pub p_sat: Stat,
    pub p_lte: Stat,
    pub run_count: usize,
    pub nonconverged_runs: usize,
}

impl CellSummary {
    pub fn mean_rate(&self, k: u8) -> Option<f64> {
        self.mean_rate_bps[usize::from(k - 1)].mean
    }

    pub fn p10(&self, k: u8) -> Option<f64> {
        self.p10_bps[usize::from(k - 1)].mean
    }

    pub fn jain_index(&self, k: u8) -> Option<f64> {
        self.jain[usize::from(k - 1)].mean
    }
}

/// Aggregates the runs of one (density, policy) cell.
///
/// Panics if `runs` is empty or mixes cells.
pub fn summarize(runs: &[RunMetrics]) -> CellSummary {
    let first = runs.first().expect("summarize needs at least one run");
    assert!(
        runs.iter()
            .all(|r| r.policy == first.policy && r.lambda_m == first.lambda_m),
        "runs from different cells"
    );
    let per_class = |f: fn(&RunMetrics) -> &[Option<f64>; 4]| {
        std::array::from_fn(|k| Stat::from_samples(runs.iter().map(|r| f(r)[k])))
    };
    CellSummary {
        lambda_m: first.lambda_m,
        policy: first.policy,
        mean_rate_bps: per_class(|r| &r.mean_rate_bps),
        p10_bps: per_class(|r| &r.p10_bps),
        jain: per_class(|r| &r.jain),
        p_sat: Stat::from_samples(runs.iter().map(|r| r.p_sat)),
        p_lte: Stat::from_samples(runs.iter().map(|r| r.p_lte)),
        run_count: runs.len(),
        nonconverged_runs: runs.iter().filter(|r| !r.converged).count(),
    }
}
