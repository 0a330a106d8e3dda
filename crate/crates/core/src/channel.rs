//! Link-level channel: LOS probability, path loss, antenna gain, SNR and
//! Shannon rate for every vehicle/base-station pair of a snapshot.
//!
//! LTE links follow the 3GPP TR 36.842 outdoor model, mmWave links the
//! TR 38.901 UMi Street Canyon model. The SNR is noise-limited: no
//! interference term enters.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Snapshot, Tier};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LosState {
    #[serde(rename = "LOS")]
    Los,
    #[serde(rename = "NLOS")]
    Nlos,
}

/// Path-loss coefficients, noise floor and distance clamp.
///
/// LTE: `PL = intercept + slope * log10(d_km)`.
/// mmWave: `PL = intercept + dist * log10(d_m) + freq * log10(f_GHz)`, with the
/// NLOS branch also subtracting `height * (h_VN - 1.5)`. NLOS loss is floored
/// at the LOS loss for the same distance on both tiers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub lte_los_intercept_db: f64,
    pub lte_los_slope_db: f64,
    pub lte_nlos_intercept_db: f64,
    pub lte_nlos_slope_db: f64,
    pub mmw_los_intercept_db: f64,
    pub mmw_los_distance_coeff: f64,
    pub mmw_los_frequency_coeff: f64,
    pub mmw_nlos_intercept_db: f64,
    pub mmw_nlos_distance_coeff: f64,
    pub mmw_nlos_frequency_coeff: f64,
    pub mmw_nlos_height_coeff: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub min_distance_m: f64,
    /// Reserved. Shadow fading is not modeled and enabling it is rejected.
    pub shadow_fading: bool,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            lte_los_intercept_db: 103.4,
            lte_los_slope_db: 24.2,
            lte_nlos_intercept_db: 131.1,
            lte_nlos_slope_db: 42.8,
            mmw_los_intercept_db: 32.4,
            mmw_los_distance_coeff: 21.0,
            mmw_los_frequency_coeff: 20.0,
            mmw_nlos_intercept_db: 22.4,
            mmw_nlos_distance_coeff: 35.3,
            mmw_nlos_frequency_coeff: 21.3,
            mmw_nlos_height_coeff: 0.3,
            noise_psd_dbm_per_hz: -174.0,
            min_distance_m: 1.0,
            shadow_fading: false,
        }
    }
}

impl ChannelParams {
    /// Path loss in dB over a 3D distance `d_3d_m`, clamped below at
    /// `min_distance_m`.
    pub fn path_loss(
        &self,
        tier: Tier,
        los: LosState,
        d_3d_m: f64,
        carrier_hz: f64,
        vn_height_m: f64,
    ) -> f64 {
        let d = d_3d_m.max(self.min_distance_m);
        match tier {
            Tier::Lte => {
                let lg = (d / 1000.0).log10();
                let los_pl = self.lte_los_intercept_db + self.lte_los_slope_db * lg;
                match los {
                    LosState::Los => los_pl,
                    LosState::Nlos => {
                        (self.lte_nlos_intercept_db + self.lte_nlos_slope_db * lg).max(los_pl)
                    }
                }
            }
            Tier::Mmwave => {
                let lg = d.log10();
                let lf = (carrier_hz / 1e9).log10();
                let los_pl = self.mmw_los_intercept_db
                    + self.mmw_los_distance_coeff * lg
                    + self.mmw_los_frequency_coeff * lf;
                match los {
                    LosState::Los => los_pl,
                    LosState::Nlos => {
                        let nlos = self.mmw_nlos_intercept_db
                            + self.mmw_nlos_distance_coeff * lg
                            + self.mmw_nlos_frequency_coeff * lf
                            - self.mmw_nlos_height_coeff * (vn_height_m - 1.5);
                        nlos.max(los_pl)
                    }
                }
            }
        }
    }
}

/// LTE outdoor LOS probability at ground distance `d_km`.
pub fn los_probability_lte(d_km: f64) -> f64 {
    debug_assert!(d_km >= 0.0, "negative distance {d_km}");
    if d_km <= 0.0 {
        return 1.0;
    }
    let decay = (-d_km / 0.063).exp();
    let p = (0.018 / d_km).min(1.0) * (1.0 - decay) + decay;
    p.clamp(0.0, 1.0)
}

/// mmWave UMi Street Canyon LOS probability at ground distance `d_2d_m`.
pub fn los_probability_mmw(d_2d_m: f64) -> f64 {
    debug_assert!(d_2d_m >= 0.0, "negative distance {d_2d_m}");
    if d_2d_m <= 18.0 {
        return 1.0;
    }
    let near = 18.0 / d_2d_m;
    let p = near + (-d_2d_m / 36.0).exp() * (1.0 - near);
    p.clamp(0.0, 1.0)
}

pub fn los_probability(tier: Tier, d_2d_m: f64) -> f64 {
    match tier {
        Tier::Lte => los_probability_lte(d_2d_m / 1000.0),
        Tier::Mmwave => los_probability_mmw(d_2d_m),
    }
}

/// Cumulative antenna gain (linear). Omnidirectional on LTE; perfectly
/// aligned beams on mmWave give the product of element counts.
pub fn cumulative_gain(tier: Tier, bs_elements: u32, vn_elements: u32) -> f64 {
    match tier {
        Tier::Lte => 1.0,
        Tier::Mmwave => f64::from(bs_elements) * f64::from(vn_elements),
    }
}

/// Noise-limited SNR in dB.
pub fn snr_db(
    tx_power_dbm: f64,
    gain_linear: f64,
    path_loss_db: f64,
    bandwidth_hz: f64,
    noise_psd_dbm_per_hz: f64,
) -> f64 {
    debug_assert!(bandwidth_hz > 0.0);
    let noise_dbm = noise_psd_dbm_per_hz + 10.0 * bandwidth_hz.log10();
    tx_power_dbm + 10.0 * gain_linear.log10() - path_loss_db - noise_dbm
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `log2(1 + SNR)` in bits/s/Hz, or 0 when the link is below `threshold_db`.
pub fn spectral_efficiency(snr_db: f64, threshold_db: f64) -> f64 {
    if snr_db < threshold_db {
        0.0
    } else {
        db_to_linear(snr_db).ln_1p() / std::f64::consts::LN_2
    }
}

/// Shannon rate in bits/s when the cell bandwidth is split over `load` users.
///
/// Panics if `load` is zero.
pub fn achievable_rate(snr_db: f64, bandwidth_hz: f64, load: u32, threshold_db: f64) -> f64 {
    assert!(load >= 1, "achievable_rate needs a load of at least 1");
    bandwidth_hz / f64::from(load) * spectral_efficiency(snr_db, threshold_db)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkState {
    pub vn_id: usize,
    pub bs_id: usize,
    pub los: LosState,
    pub path_loss_db: f64,
    pub gain: f64,
    pub snr_db: f64,
    pub in_outage: bool,
    /// Cached `log2(1 + SNR)`, zero when in outage.
    pub spectral_efficiency: f64,
}

/// How LOS states are assigned when building a table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LosMode {
    #[default]
    Random,
    ForceLos,
    ForceNlos,
}

/// Realized channel of one snapshot. Row-major over (vehicle, base station);
/// immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkTable {
    n_vn: usize,
    n_bs: usize,
    links: Vec<LinkState>,
    tiers: Vec<Tier>,
    bandwidths_hz: Vec<f64>,
    snr_threshold_db: f64,
}

impl LinkTable {
    pub fn n_vn(&self) -> usize {
        self.n_vn
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    pub fn snr_threshold_db(&self) -> f64 {
        self.snr_threshold_db
    }

    pub fn link(&self, vn: usize, bs: usize) -> &LinkState {
        &self.links[vn * self.n_bs + bs]
    }

    /// All links of one vehicle, indexed by base-station id.
    pub fn row(&self, vn: usize) -> &[LinkState] {
        &self.links[vn * self.n_bs..(vn + 1) * self.n_bs]
    }

    pub fn tier(&self, bs: usize) -> Tier {
        self.tiers[bs]
    }

    pub fn bandwidth_hz(&self, bs: usize) -> f64 {
        self.bandwidths_hz[bs]
    }

    /// Rate of `vn` on `bs` when `load` users (itself included) share it.
    pub fn rate(&self, vn: usize, bs: usize, load: u32) -> f64 {
        debug_assert!(load >= 1);
        self.bandwidths_hz[bs] / f64::from(load) * self.link(vn, bs).spectral_efficiency
    }

    /// Builds a table straight from SNR values, for synthetic instances.
    /// `snr_db[v][b]` is the SNR of vehicle `v` towards base station `b`.
    pub fn from_snr_matrix(
        snr_db: &[Vec<f64>],
        tiers: &[Tier],
        bandwidths_hz: &[f64],
        snr_threshold_db: f64,
    ) -> Self {
        let n_bs = tiers.len();
        assert_eq!(bandwidths_hz.len(), n_bs);
        let mut links = Vec::with_capacity(snr_db.len() * n_bs);
        for (v, row) in snr_db.iter().enumerate() {
            assert_eq!(row.len(), n_bs, "row {v} has wrong width");
            for (b, &s) in row.iter().enumerate() {
                links.push(LinkState {
                    vn_id: v,
                    bs_id: b,
                    los: LosState::Los,
                    path_loss_db: f64::NAN,
                    gain: f64::NAN,
                    snr_db: s,
                    in_outage: s < snr_threshold_db,
                    spectral_efficiency: spectral_efficiency(s, snr_threshold_db),
                });
            }
        }
        Self {
            n_vn: snr_db.len(),
            n_bs,
            links,
            tiers: tiers.to_vec(),
            bandwidths_hz: bandwidths_hz.to_vec(),
            snr_threshold_db,
        }
    }
}

/// Realizes the channel of a snapshot. LOS states are drawn once per pair,
/// vehicle-major, one uniform per pair (also under forced modes, so the
/// stream position does not depend on the mode).
pub fn build_link_table<R: Rng + ?Sized>(
    snapshot: &Snapshot,
    params: &ChannelParams,
    snr_threshold_db: f64,
    los_mode: LosMode,
    rng: &mut R,
) -> LinkTable {
    let n_bs = snapshot.base_stations.len();
    let mut links = Vec::with_capacity(snapshot.vehicles.len() * n_bs);
    for vn in &snapshot.vehicles {
        for bs in &snapshot.base_stations {
            let d2 = vn.pos.distance_2d(&bs.pos);
            let d3 = vn.pos.distance_3d(&bs.pos);
            let u: f64 = rng.random();
            let los = match los_mode {
                LosMode::Random if u < los_probability(bs.tier, d2) => LosState::Los,
                LosMode::Random => LosState::Nlos,
                LosMode::ForceLos => LosState::Los,
                LosMode::ForceNlos => LosState::Nlos,
            };
            let path_loss_db = params.path_loss(bs.tier, los, d3, bs.carrier_hz, vn.pos.z);
            let gain = cumulative_gain(bs.tier, bs.array_elements, vn.array_elements);
            let snr = snr_db(
                bs.tx_power_dbm,
                gain,
                path_loss_db,
                bs.bandwidth_hz,
                params.noise_psd_dbm_per_hz,
            );
            links.push(LinkState {
                vn_id: vn.id,
                bs_id: bs.id,
                los,
                path_loss_db,
                gain,
                snr_db: snr,
                in_outage: snr < snr_threshold_db,
                spectral_efficiency: spectral_efficiency(snr, snr_threshold_db),
            });
        }
    }
    LinkTable {
        n_vn: snapshot.vehicles.len(),
        n_bs,
        links,
        tiers: snapshot.base_stations.iter().map(|b| b.tier).collect(),
        bandwidths_hz: snapshot
            .base_stations
            .iter()
            .map(|b| b.bandwidth_hz)
            .collect(),
        snr_threshold_db,
    }
}
