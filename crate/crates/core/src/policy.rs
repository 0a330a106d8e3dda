//! Attachment decision rules.
//!
//! Every rule is a pure function of one vehicle's row of the link table and
//! the current per-BS loads. The loads passed in must not count the deciding
//! vehicle; rates are evaluated as if it joined, i.e. at `loads[j] + 1`.
//! Ties are broken towards the lowest base-station id.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::LinkTable;
use crate::geometry::Tier;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolicyKind {
    /// Maximum SNR.
    #[serde(rename = "MS")]
    MaxSnr,
    /// Maximum achievable rate.
    #[serde(rename = "MR")]
    MaxRate,
    /// Requirement-aware: LTE when it meets the class requirement, else max rate.
    #[serde(rename = "RA")]
    RequirementAware,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [
        PolicyKind::MaxSnr,
        PolicyKind::MaxRate,
        PolicyKind::RequirementAware,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::MaxSnr => "MS",
            PolicyKind::MaxRate => "MR",
            PolicyKind::RequirementAware => "RA",
        }
    }

    /// Whether decisions depend on the load vector.
    pub fn is_load_aware(self) -> bool {
        !matches!(self, PolicyKind::MaxSnr)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "MS" => Ok(PolicyKind::MaxSnr),
            "MR" => Ok(PolicyKind::MaxRate),
            "RA" => Ok(PolicyKind::RequirementAware),
            _ => Err(format!("unknown policy `{s}` (expected MS, MR or RA)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttachmentDecision {
    pub vn_id: usize,
    /// `None` when every candidate link is in outage.
    pub chosen_bs: Option<usize>,
    /// Rate at the post-join load of the chosen BS; 0 when unattached.
    pub offered_rate_bps: f64,
}

impl AttachmentDecision {
    fn none(vn_id: usize) -> Self {
        Self {
            vn_id,
            chosen_bs: None,
            offered_rate_bps: 0.0,
        }
    }
}

fn post_join_rate(vn: usize, bs: usize, table: &LinkTable, loads: &[u32]) -> f64 {
    table.rate(vn, bs, loads[bs] + 1)
}

fn decision(vn: usize, bs: usize, table: &LinkTable, loads: &[u32]) -> AttachmentDecision {
    AttachmentDecision {
        vn_id: vn,
        chosen_bs: Some(bs),
        offered_rate_bps: post_join_rate(vn, bs, table, loads),
    }
}

/// Argmax of post-join rate over the base stations accepted by `filter`.
/// Returns `None` when no candidate offers a positive rate.
fn best_rate(
    vn: usize,
    table: &LinkTable,
    loads: &[u32],
    filter: impl Fn(usize) -> bool,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for bs in (0..table.n_bs()).filter(|&b| filter(b)) {
        let r = post_join_rate(vn, bs, table, loads);
        if r > 0.0 && best.is_none_or(|(_, br)| r > br) {
            best = Some((bs, r));
        }
    }
    best
}

/// Maximum-SNR attachment. Loads only enter the offered rate, never the choice.
pub fn select_ms(vn: usize, table: &LinkTable, loads: &[u32]) -> AttachmentDecision {
    debug_assert_eq!(loads.len(), table.n_bs());
    let mut best: Option<(usize, f64)> = None;
    for (bs, link) in table.row(vn).iter().enumerate() {
        if !link.in_outage && best.is_none_or(|(_, s)| link.snr_db > s) {
            best = Some((bs, link.snr_db));
        }
    }
    match best {
        Some((bs, _)) => decision(vn, bs, table, loads),
        None => AttachmentDecision::none(vn),
    }
}

/// Maximum-rate attachment over all base stations.
pub fn select_mr(vn: usize, table: &LinkTable, loads: &[u32]) -> AttachmentDecision {
    debug_assert_eq!(loads.len(), table.n_bs());
    match best_rate(vn, table, loads, |_| true) {
        Some((bs, rate)) => AttachmentDecision {
            vn_id: vn,
            chosen_bs: Some(bs),
            offered_rate_bps: rate,
        },
        None => AttachmentDecision::none(vn),
    }
}

/// Requirement-aware attachment: take the best LTE cell if its post-join rate
/// strictly exceeds `required_rate_bps`, otherwise fall back to max rate.
pub fn select_ra(
    vn: usize,
    required_rate_bps: f64,
    table: &LinkTable,
    loads: &[u32],
) -> AttachmentDecision {
    debug_assert_eq!(loads.len(), table.n_bs());
    match best_rate(vn, table, loads, |b| table.tier(b) == Tier::Lte) {
        Some((bs, rate)) if rate > required_rate_bps => AttachmentDecision {
            vn_id: vn,
            chosen_bs: Some(bs),
            offered_rate_bps: rate,
        },
        _ => select_mr(vn, table, loads),
    }
}

pub fn decide(
    policy: PolicyKind,
    vn: usize,
    required_rate_bps: f64,
    table: &LinkTable,
    loads: &[u32],
) -> AttachmentDecision {
    match policy {
        PolicyKind::MaxSnr => select_ms(vn, table, loads),
        PolicyKind::MaxRate => select_mr(vn, table, loads),
        PolicyKind::RequirementAware => select_ra(vn, required_rate_bps, table, loads),
    }
}
