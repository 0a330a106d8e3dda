//! Steady-state association of one snapshot.
//!
//! Vehicles first attach greedily in id order. Then random single-vehicle
//! reassignments run until the association stops changing: the vehicle is
//! detached, the policy re-evaluated against the remaining loads, and the
//! vehicle re-inserted wherever the policy points.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{build_link_table, LinkTable, LosMode};
use crate::config::ScenarioConfig;
use crate::geometry::{deploy_snapshot, in_measurement_region, Snapshot, Tier, TrafficClass};
use crate::policy::{decide, PolicyKind};
use crate::seed::derive_seed;

/// Termination knobs for the reassignment loop, in multiples of the
/// vehicle count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceParams {
    pub no_change_window_multiplier: u32,
    pub cap_multiplier: u32,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        Self {
            no_change_window_multiplier: 3,
            cap_multiplier: 50,
        }
    }
}

/// Vehicle-to-BS map together with per-BS load counters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssociationState {
    assignment: Vec<Option<usize>>,
    loads: Vec<u32>,
}

impl AssociationState {
    pub fn new(n_vn: usize, n_bs: usize) -> Self {
        Self {
            assignment: vec![None; n_vn],
            loads: vec![0; n_bs],
        }
    }

    /// Builds a state from an explicit assignment, deriving the loads.
    pub fn from_assignment(assignment: Vec<Option<usize>>, n_bs: usize) -> Self {
        let mut loads = vec![0; n_bs];
        for bs in assignment.iter().flatten() {
            loads[*bs] += 1;
        }
        Self { assignment, loads }
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }

    pub fn loads(&self) -> &[u32] {
        &self.loads
    }

    pub fn serving(&self, vn: usize) -> Option<usize> {
        self.assignment[vn]
    }

    pub fn unattached(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_none()).count()
    }

    /// Removes `vn` from its BS, returning the BS it was on.
    pub fn detach(&mut self, vn: usize) -> Option<usize> {
        let old = self.assignment[vn].take();
        if let Some(bs) = old {
            self.loads[bs] -= 1;
        }
        old
    }

    /// Puts a currently detached `vn` onto `bs` (or leaves it unattached).
    pub fn attach(&mut self, vn: usize, bs: Option<usize>) {
        debug_assert!(self.assignment[vn].is_none(), "vehicle {vn} attached twice");
        if let Some(b) = bs {
            self.loads[b] += 1;
        }
        self.assignment[vn] = bs;
    }

    /// Loads equal the per-BS head count of the assignment.
    pub fn is_consistent(&self) -> bool {
        let mut counts = vec![0u32; self.loads.len()];
        for bs in self.assignment.iter().flatten() {
            match counts.get_mut(*bs) {
                Some(c) => *c += 1,
                None => return false,
            }
        }
        counts == self.loads
    }
}

/// Greedy first step: vehicles in id order, each seeing the loads of those
/// before it.
pub fn initial_attach(
    required_rates: &[f64],
    table: &LinkTable,
    policy: PolicyKind,
) -> AssociationState {
    assert_eq!(
        required_rates.len(),
        table.n_vn(),
        "one requirement per vehicle"
    );
    let mut state = AssociationState::new(table.n_vn(), table.n_bs());
    for (vn, &required) in required_rates.iter().enumerate() {
        let d = decide(policy, vn, required, table, &state.loads);
        state.attach(vn, d.chosen_bs);
    }
    debug_assert!(state.is_consistent());
    state
}

/// True when no vehicle would move if re-evaluated alone.
pub fn is_fixed_point(
    state: &AssociationState,
    required_rates: &[f64],
    table: &LinkTable,
    policy: PolicyKind,
) -> bool {
    let mut loads = state.loads.clone();
    (0..table.n_vn()).all(|vn| {
        let current = state.assignment[vn];
        if let Some(b) = current {
            loads[b] -= 1;
        }
        let choice = decide(policy, vn, required_rates[vn], table, &loads).chosen_bs;
        if let Some(b) = current {
            loads[b] += 1;
        }
        choice == current
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteadyStateOutcome {
    /// Random picks performed.
    pub iterations: u64,
    /// Whether the final state is a certified fixed point.
    pub converged: bool,
}

/// Second step: random reassignment until `window * |M|` consecutive picks
/// leave the association unchanged and a full sweep confirms a fixed point,
/// or until `cap * |M|` picks.
pub fn steady_state<R: Rng + ?Sized>(
    state: &mut AssociationState,
    required_rates: &[f64],
    table: &LinkTable,
    policy: PolicyKind,
    params: ConvergenceParams,
    rng: &mut R,
) -> SteadyStateOutcome {
    let m = table.n_vn();
    if m == 0 {
        return SteadyStateOutcome {
            iterations: 0,
            converged: true,
        };
    }
    let window = u64::from(params.no_change_window_multiplier).max(1) * m as u64;
    let cap = u64::from(params.cap_multiplier) * m as u64;
    let mut quiet = 0u64;
    let mut picks = 0u64;
    while picks < cap {
        let vn = rng.random_range(0..m);
        picks += 1;
        let old = state.detach(vn);
        let new = decide(policy, vn, required_rates[vn], table, &state.loads).chosen_bs;
        state.attach(vn, new);
        debug_assert!(state.is_consistent());
        if new == old {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= window {
            if is_fixed_point(state, required_rates, table, policy) {
                return SteadyStateOutcome {
                    iterations: picks,
                    converged: true,
                };
            }
            quiet = 0;
        }
    }
    SteadyStateOutcome {
        iterations: picks,
        converged: is_fixed_point(state, required_rates, table, policy),
    }
}

/// Per-vehicle outcome of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VnRecord {
    pub vn_id: usize,
    pub class: TrafficClass,
    pub in_region: bool,
    pub bs_id: Option<usize>,
    pub tier: Option<Tier>,
    pub rate_bps: f64,
    pub required_rate_bps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub lambda_m: f64,
    pub policy: PolicyKind,
    pub seed: u64,
    pub records: Vec<VnRecord>,
    pub convergence_iterations: u64,
    pub converged: bool,
}

/// Final per-vehicle records with rates recomputed from the final loads.
pub fn read_out(snapshot: &Snapshot, table: &LinkTable, state: &AssociationState) -> Vec<VnRecord> {
    snapshot
        .vehicles
        .iter()
        .map(|vn| {
            let bs = state.serving(vn.id);
            VnRecord {
                vn_id: vn.id,
                class: vn.class,
                in_region: in_measurement_region(&vn.pos, snapshot),
                bs_id: bs,
                tier: bs.map(|b| table.tier(b)),
                rate_bps: bs.map_or(0.0, |b| table.rate(vn.id, b, state.loads[b])),
                required_rate_bps: vn.required_rate_bps,
            }
        })
        .collect()
}

pub fn required_rates(snapshot: &Snapshot) -> Vec<f64> {
    snapshot
        .vehicles
        .iter()
        .map(|v| v.required_rate_bps)
        .collect()
}

const STREAM_DEPLOY: u64 = 0x6465_706c_6f79;
const STREAM_DYNAMICS: u64 = 0x6479_6e61_6d69;

/// The snapshot and channel drawn for `seed`. They depend on the seed only,
/// never on the policy, so policies can be compared on identical networks.
pub fn realize_network(config: &ScenarioConfig, lambda_m: f64, seed: u64) -> (Snapshot, LinkTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[STREAM_DEPLOY]));
    let snapshot = deploy_snapshot(&config.deployment(), lambda_m, &mut rng);
    let table = build_link_table(
        &snapshot,
        &config.channel,
        config.snr_threshold_db,
        LosMode::Random,
        &mut rng,
    );
    (snapshot, table)
}

/// Deploy, realize the channel, attach, iterate to steady state, read out.
pub fn run_once(
    config: &ScenarioConfig,
    lambda_m: f64,
    policy: PolicyKind,
    seed: u64,
) -> RunResult {
    let (snapshot, table) = realize_network(config, lambda_m, seed);
    let required = required_rates(&snapshot);
    let mut state = initial_attach(&required, &table, policy);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[STREAM_DYNAMICS, policy as u64]));
    let outcome = steady_state(
        &mut state,
        &required,
        &table,
        policy,
        config.convergence,
        &mut rng,
    );
    RunResult {
        lambda_m,
        policy,
        seed,
        records: read_out(&snapshot, &table, &state),
        convergence_iterations: outcome.iterations,
        converged: outcome.converged,
    }
}
