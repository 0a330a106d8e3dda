//! Property checks shared by the `properties` tests and the acceptance run.
//! Each one drives its own runner for [`CASES`] cases.

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use v2i_core::campaign::run_cell_index;
use v2i_core::channel::{
    achievable_rate, db_to_linear, los_probability_lte, los_probability_mmw, snr_db,
};
use v2i_core::engine::realize_network;
use v2i_core::metrics::{jain_of, satisfaction_ratio, worst_decile_of};
use v2i_core::policy::{decide, select_mr, select_ms, select_ra};
use v2i_core::{
    initial_attach, run_once, steady_state, summarize, CellKey, ChannelParams, ConvergenceParams,
    LinkTable, LosState, PolicyKind, RunMetrics, ScenarioConfig, Tier, TrafficClass, VnMode,
    VnRecord,
};

use super::oracle::{Instance, THRESHOLD_DB};

pub const CASES: u32 = 10_000;

pub type Check = fn() -> Result<(), String>;

pub const ALL: &[(&str, Check)] = &[
    ("jain_within_bounds", jain_within_bounds),
    ("jain_is_one_iff_equal", jain_is_one_iff_equal),
    ("jain_scale_invariant", jain_scale_invariant),
    (
        "ms_choice_survives_monotone_transform",
        ms_choice_survives_monotone_transform,
    ),
    (
        "rate_halves_when_load_doubles",
        rate_halves_when_load_doubles,
    ),
    ("snr_db_linear_round_trip", snr_db_linear_round_trip),
    (
        "los_probability_in_unit_interval",
        los_probability_in_unit_interval,
    ),
    (
        "snr_non_increasing_in_distance",
        snr_non_increasing_in_distance,
    ),
    ("rate_tracks_snr", rate_tracks_snr),
    ("mr_load_monotonicity", mr_load_monotonicity),
    (
        "ra_equals_mr_without_lte_coverage",
        ra_equals_mr_without_lte_coverage,
    ),
    ("ra_prefers_sufficient_lte", ra_prefers_sufficient_lte),
    ("decisions_are_deterministic", decisions_are_deterministic),
    (
        "worst_decile_below_median_and_mean",
        worst_decile_below_median_and_mean,
    ),
    ("p_sat_monotone_in_rate", p_sat_monotone_in_rate),
    ("summary_mean_is_linear", summary_mean_is_linear),
    ("loads_stay_consistent", loads_stay_consistent),
    ("ms_steady_state_is_argmax", ms_steady_state_is_argmax),
    (
        "read_out_shares_bandwidth_equally",
        read_out_shares_bandwidth_equally,
    ),
    ("same_seed_same_run", same_seed_same_run),
    ("cell_results_ignore_grid", cell_results_ignore_grid),
];

fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    })
}

fn check<S: Strategy>(
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner().run(&strategy, test).map_err(|e| e.to_string())
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn tier(is_lte: bool) -> Tier {
    if is_lte {
        Tier::Lte
    } else {
        Tier::Mmwave
    }
}

const REQUIREMENTS: [f64; 4] = [1e6, 10e6, 100e6, 1200e6];

fn instance() -> impl Strategy<Value = Instance> {
    (1..=6usize, 1..=3usize).prop_flat_map(|(n_vn, n_bs)| {
        (
            vec(vec(-15.0..35.0f64, n_bs), n_vn),
            vec(any::<bool>(), n_bs),
            vec(0..4usize, n_vn),
        )
            .prop_map(|(snr_db, lte, req)| Instance {
                snr_db,
                tiers: lte.into_iter().map(tier).collect(),
                required: req.into_iter().map(|k| REQUIREMENTS[k]).collect(),
            })
    })
}

/// An instance plus an arbitrary load vector over its base stations.
fn loaded_instance() -> impl Strategy<Value = (Instance, Vec<u32>)> {
    instance().prop_flat_map(|inst| {
        let n = inst.n_bs();
        (Just(inst), vec(0..10u32, n))
    })
}

fn policy() -> impl Strategy<Value = PolicyKind> {
    prop::sample::select(PolicyKind::ALL.to_vec())
}

fn rates() -> impl Strategy<Value = Vec<f64>> {
    vec(0.0..2e9f64, 1..64)
}

pub fn jain_within_bounds() -> Result<(), String> {
    check(rates(), |x| {
        prop_assume!(x.iter().any(|&r| r > 0.0));
        let j = jain_of(&x).unwrap();
        let n = x.len() as f64;
        prop_assert!(j >= 1.0 / n * (1.0 - 1e-12) && j <= 1.0 + 1e-12, "J = {j}");
        Ok(())
    })
}

pub fn jain_is_one_iff_equal() -> Result<(), String> {
    let s = (1e3..2e9f64, 1..64usize, rates());
    check(s, |(level, n, x)| {
        let j = jain_of(&vec![level; n]).unwrap();
        prop_assert!((j - 1.0).abs() <= 1e-12, "equal rates gave {j}");
        let max = x.iter().cloned().fold(0.0, f64::max);
        let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
        if max > 0.0 && max - min > 1e-3 * max {
            let j = jain_of(&x).unwrap();
            prop_assert!(j < 1.0 - 1e-12, "unequal rates gave {j}");
        }
        Ok(())
    })
}

pub fn jain_scale_invariant() -> Result<(), String> {
    check((rates(), -6.0..6.0f64), |(x, e)| {
        prop_assume!(x.iter().any(|&r| r > 0.0));
        let c = 10f64.powf(e);
        let scaled: Vec<f64> = x.iter().map(|r| r * c).collect();
        let (a, b) = (jain_of(&x).unwrap(), jain_of(&scaled).unwrap());
        prop_assert!(rel_close(a, b, 1e-12), "{a} vs {b} at c = {c}");
        Ok(())
    })
}

pub fn ms_choice_survives_monotone_transform() -> Result<(), String> {
    let s = (
        loaded_instance(),
        0.05..20.0f64,
        -30.0..30.0f64,
        any::<bool>(),
    );
    check(s, |((inst, loads), a, b, cubic)| {
        let f = |s: f64| {
            let lin = a * s + b;
            if cubic {
                lin + lin.powi(3) / 100.0
            } else {
                lin
            }
        };
        let moved: Vec<Vec<f64>> = inst
            .snr_db
            .iter()
            .map(|row| row.iter().map(|&s| f(s)).collect())
            .collect();
        let bw = inst.bandwidths();
        let before = inst.table();
        let after = LinkTable::from_snr_matrix(&moved, &inst.tiers, &bw, f(THRESHOLD_DB));
        let zero = vec![0; inst.n_bs()];
        for v in 0..inst.n_vn() {
            let c = select_ms(v, &before, &zero).chosen_bs;
            prop_assert_eq!(c, select_ms(v, &after, &zero).chosen_bs);
            prop_assert_eq!(c, select_ms(v, &before, &loads).chosen_bs);
        }
        Ok(())
    })
}

pub fn rate_halves_when_load_doubles() -> Result<(), String> {
    let s = (-5.0..60.0f64, 1e6..1e10f64, 1..10_000u32);
    check(s, |(snr, bw, m)| {
        let one = achievable_rate(snr, bw, m, THRESHOLD_DB);
        let two = achievable_rate(snr, bw, 2 * m, THRESHOLD_DB);
        prop_assert!(rel_close(two, one / 2.0, 1e-15), "{one} -> {two}");
        Ok(())
    })
}

pub fn snr_db_linear_round_trip() -> Result<(), String> {
    let s = (
        0.0..50.0f64,
        1.0..4096.0f64,
        40.0..200.0f64,
        1e6..1e10f64,
        -180.0..-160.0f64,
    );
    check(s, |(p_dbm, g, pl_db, bw, n0_dbm)| {
        let via_db = db_to_linear(snr_db(p_dbm, g, pl_db, bw, n0_dbm));
        let direct = g * db_to_linear(p_dbm) / (db_to_linear(pl_db) * db_to_linear(n0_dbm) * bw);
        prop_assert!(rel_close(via_db, direct, 1e-9), "{via_db} vs {direct}");
        Ok(())
    })
}

pub fn los_probability_in_unit_interval() -> Result<(), String> {
    check(0.0..10_000.0f64, |d_m| {
        for p in [los_probability_lte(d_m / 1000.0), los_probability_mmw(d_m)] {
            prop_assert!((0.0..=1.0).contains(&p), "p = {p} at {d_m} m");
        }
        Ok(())
    })
}

pub fn snr_non_increasing_in_distance() -> Result<(), String> {
    let params = ChannelParams::default();
    let s = (
        any::<bool>(),
        any::<bool>(),
        0.0..10_000.0f64,
        0.0..10_000.0f64,
    );
    check(s, |(lte, los, d1, d2)| {
        let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let t = tier(lte);
        let los = if los { LosState::Los } else { LosState::Nlos };
        let (p, fc, g) = match t {
            Tier::Lte => (46.0, 2.4e9, 1.0),
            Tier::Mmwave => (27.0, 28e9, 1024.0),
        };
        let bw = match t {
            Tier::Lte => 20e6,
            Tier::Mmwave => 1e9,
        };
        let snr = |d: f64| snr_db(p, g, params.path_loss(t, los, d, fc, 2.0), bw, -174.0);
        prop_assert!(params.path_loss(t, los, far, fc, 2.0) > 0.0);
        prop_assert!(snr(near) >= snr(far), "{t:?} {los:?}: {near} m vs {far} m");
        Ok(())
    })
}

pub fn rate_tracks_snr() -> Result<(), String> {
    let s = (-40.0..80.0f64, -40.0..80.0f64, 1e6..1e10f64, 1..100u32);
    check(s, |(a, b, bw, m)| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let r = |s| achievable_rate(s, bw, m, THRESHOLD_DB);
        if lo < THRESHOLD_DB {
            prop_assert_eq!(r(lo), 0.0);
        } else {
            prop_assert!(r(lo) > 0.0 && r(lo) <= r(hi));
        }
        Ok(())
    })
}

pub fn mr_load_monotonicity() -> Result<(), String> {
    check(
        (loaded_instance(), 1..20u32),
        |((inst, mut loads), extra)| {
            let table = inst.table();
            for v in 0..inst.n_vn() {
                let before = select_mr(v, &table, &loads);
                if let Some(j) = before.chosen_bs {
                    loads[j] += extra;
                    let after = select_mr(v, &table, &loads);
                    loads[j] -= extra;
                    prop_assert!(after.offered_rate_bps <= before.offered_rate_bps);
                }
            }
            Ok(())
        },
    )
}

pub fn ra_equals_mr_without_lte_coverage() -> Result<(), String> {
    check(loaded_instance(), |(mut inst, loads)| {
        for row in &mut inst.snr_db {
            for (b, s) in row.iter_mut().enumerate() {
                if inst.tiers[b] == Tier::Lte {
                    *s = THRESHOLD_DB - 1.0 - s.abs();
                }
            }
        }
        let table = inst.table();
        for v in 0..inst.n_vn() {
            prop_assert_eq!(
                select_ra(v, inst.required[v], &table, &loads),
                select_mr(v, &table, &loads)
            );
        }
        Ok(())
    })
}

pub fn ra_prefers_sufficient_lte() -> Result<(), String> {
    check(
        (loaded_instance(), 1e5..3e8f64),
        |((inst, loads), required)| {
            let table = inst.table();
            for v in 0..inst.n_vn() {
                let best_lte = (0..inst.n_bs())
                    .filter(|&b| inst.tiers[b] == Tier::Lte)
                    .map(|b| table.rate(v, b, loads[b] + 1))
                    .fold(0.0, f64::max);
                let d = select_ra(v, required, &table, &loads);
                if best_lte > required {
                    let b = d.chosen_bs.expect("attached");
                    prop_assert_eq!(inst.tiers[b], Tier::Lte);
                }
            }
            Ok(())
        },
    )
}

pub fn decisions_are_deterministic() -> Result<(), String> {
    check((loaded_instance(), policy()), |((inst, loads), p)| {
        let (t1, t2) = (inst.table(), inst.table());
        for v in 0..inst.n_vn() {
            prop_assert_eq!(
                decide(p, v, inst.required[v], &t1, &loads),
                decide(p, v, inst.required[v], &t2, &loads)
            );
        }
        Ok(())
    })
}

pub fn worst_decile_below_median_and_mean() -> Result<(), String> {
    check(vec(0.0..2e9f64, 1..300), |x| {
        let p10 = worst_decile_of(x.clone()).unwrap();
        let mut sorted = x.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        let mean = x.iter().sum::<f64>() / n as f64;
        let slack = 1e-9 * mean.abs();
        prop_assert!(p10 <= median + slack, "p10 {p10} > median {median}");
        prop_assert!(p10 <= mean + slack, "p10 {p10} > mean {mean}");
        Ok(())
    })
}

fn record(class: usize, rate: f64, attached: bool) -> VnRecord {
    VnRecord {
        vn_id: 0,
        class: TrafficClass::new(class as u8 + 1).unwrap(),
        in_region: true,
        bs_id: attached.then_some(0),
        tier: attached.then_some(Tier::Mmwave),
        rate_bps: if attached { rate } else { 0.0 },
        required_rate_bps: REQUIREMENTS[class],
    }
}

pub fn p_sat_monotone_in_rate() -> Result<(), String> {
    let recs = vec((0..4usize, 0.0..2e9f64, any::<bool>()), 1..50);
    check(
        (recs, any::<prop::sample::Index>(), 0.0..2e9f64),
        |(recs, idx, bump)| {
            let mut records: Vec<VnRecord> =
                recs.iter().map(|&(k, r, a)| record(k, r, a)).collect();
            let before = satisfaction_ratio(&records).unwrap();
            let i = idx.index(records.len());
            if records[i].bs_id.is_some() {
                records[i].rate_bps += bump;
            }
            prop_assert!(satisfaction_ratio(&records).unwrap() >= before);
            Ok(())
        },
    )
}

fn run_metrics() -> impl Strategy<Value = RunMetrics> {
    let opt = || prop::option::weighted(0.9, 0.0..1e9f64);
    (
        [opt(), opt(), opt(), opt()],
        prop::option::weighted(0.9, 0.0..=1.0f64),
        any::<bool>(),
    )
        .prop_map(|(mean_rate_bps, p_sat, converged)| RunMetrics {
            lambda_m: 40.0,
            policy: PolicyKind::MaxRate,
            mean_rate_bps,
            p10_bps: mean_rate_bps.map(|m| m.map(|x| x / 2.0)),
            jain: [None; 4],
            p_sat,
            p_lte: p_sat.map(|p| 1.0 - p),
            converged,
        })
}

pub fn summary_mean_is_linear() -> Result<(), String> {
    let s = (vec(run_metrics(), 1..30), vec(run_metrics(), 1..30));
    check(s, |(a, b)| {
        let both: Vec<RunMetrics> = a.iter().chain(&b).cloned().collect();
        let (sa, sb, sab) = (summarize(&a), summarize(&b), summarize(&both));
        let pairs = [(&sa.p_sat, &sb.p_sat, &sab.p_sat)]
            .into_iter()
            .chain((0..4).map(|k| {
                (
                    &sa.mean_rate_bps[k],
                    &sb.mean_rate_bps[k],
                    &sab.mean_rate_bps[k],
                )
            }));
        for (x, y, xy) in pairs {
            prop_assert_eq!(xy.count, x.count + y.count);
            let weighted =
                x.mean.unwrap_or(0.0) * x.count as f64 + y.mean.unwrap_or(0.0) * y.count as f64;
            match xy.mean {
                None => prop_assert_eq!(xy.count, 0),
                Some(m) => prop_assert!(
                    (m - weighted / xy.count as f64).abs() <= 1e-12 * m.abs().max(1.0),
                    "{m} vs {}",
                    weighted / xy.count as f64
                ),
            }
        }
        prop_assert_eq!(sab.run_count, a.len() + b.len());
        prop_assert_eq!(
            sab.nonconverged_runs,
            sa.nonconverged_runs + sb.nonconverged_runs
        );
        Ok(())
    })
}

pub fn loads_stay_consistent() -> Result<(), String> {
    check((instance(), policy(), any::<u64>()), |(inst, p, seed)| {
        use rand::SeedableRng;
        let table = inst.table();
        let mut state = initial_attach(&inst.required, &table, p);
        prop_assert!(state.is_consistent());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        // Every move is checked by a debug assertion inside the loop.
        steady_state(
            &mut state,
            &inst.required,
            &table,
            p,
            ConvergenceParams::default(),
            &mut rng,
        );
        prop_assert!(state.is_consistent());
        let attached: u32 = state.loads().iter().sum();
        prop_assert_eq!(attached as usize + state.unattached(), inst.n_vn());
        for b in 0..inst.n_bs() {
            let n = state.assignment().iter().filter(|&&a| a == Some(b)).count();
            prop_assert_eq!(n as u32, state.loads()[b]);
        }
        Ok(())
    })
}

pub fn ms_steady_state_is_argmax() -> Result<(), String> {
    check((instance(), any::<u64>()), |(inst, seed)| {
        let got = super::oracle::run_engine(&inst, PolicyKind::MaxSnr, seed);
        prop_assert!(got.converged);
        prop_assert_eq!(got.assignment, super::oracle::argmax_assignment(&inst));
        Ok(())
    })
}

fn small_config(total: usize) -> ScenarioConfig {
    ScenarioConfig {
        vn_mode: VnMode::Fixed { total },
        n_sim: 1,
        ..ScenarioConfig::default()
    }
}

fn lambda() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![4.0, 8.0, 12.0])
}

pub fn read_out_shares_bandwidth_equally() -> Result<(), String> {
    check(
        (lambda(), policy(), 0..40usize, any::<u64>()),
        |(lam, p, total, seed)| {
            let cfg = small_config(total);
            let run = run_once(&cfg, lam, p, seed);
            let (snapshot, table) = realize_network(&cfg, lam, seed);
            prop_assert_eq!(run.records.len(), snapshot.vehicles.len());
            let mut loads = vec![0u32; table.n_bs()];
            for b in run.records.iter().filter_map(|r| r.bs_id) {
                loads[b] += 1;
            }
            for r in &run.records {
                match r.bs_id {
                    Some(b) => {
                        let share = table.bandwidth_hz(b) / f64::from(loads[b]);
                        let se = table.link(r.vn_id, b).spectral_efficiency;
                        prop_assert!(rel_close(r.rate_bps, share * se, 1e-12));
                    }
                    None => prop_assert_eq!(r.rate_bps, 0.0),
                }
            }
            Ok(())
        },
    )
}

pub fn same_seed_same_run() -> Result<(), String> {
    check(
        (lambda(), policy(), 0..40usize, any::<u64>()),
        |(lam, p, total, seed)| {
            let cfg = small_config(total);
            let (s1, _) = realize_network(&cfg, lam, seed);
            let (s2, _) = realize_network(&cfg, lam, seed);
            prop_assert_eq!(
                serde_json::to_vec(&s1).unwrap(),
                serde_json::to_vec(&s2).unwrap()
            );
            prop_assert_eq!(run_once(&cfg, lam, p, seed), run_once(&cfg, lam, p, seed));
            Ok(())
        },
    )
}

pub fn cell_results_ignore_grid() -> Result<(), String> {
    let s = (
        lambda(),
        policy(),
        0..40usize,
        any::<u64>(),
        0..1000u64,
        vec(4.0..80.0f64, 0..5),
    );
    check(s, |(lam, p, total, master, index, extra)| {
        let mut a = small_config(total);
        a.master_seed = master;
        a.mmw_density_grid_per_km2 = vec![lam];
        let mut b = a.clone();
        b.mmw_density_grid_per_km2.extend(extra);
        let cell = CellKey {
            lambda_m: lam,
            policy: p,
        };
        prop_assert_eq!(
            run_cell_index(&a, cell, index),
            run_cell_index(&b, cell, index)
        );
        Ok(())
    })
}
