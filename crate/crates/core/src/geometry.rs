//! Network snapshot generation.
//!
//! Base stations of both tiers are dropped as independent homogeneous Poisson
//! point processes over a square area; vehicles are placed uniformly over the
//! same area and tagged with a traffic class. Only vehicles inside the
//! measurement region contribute to metrics, which keeps statistics clear of
//! the edges where coverage is artificially thin.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

/// Radio access technology of a base station.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tier {
    #[serde(rename = "LTE")]
    Lte,
    #[serde(rename = "MMWAVE")]
    Mmwave,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Lte => "LTE",
            Tier::Mmwave => "MMWAVE",
        }
    }
}

/// A point in the simulation area, in meters. `z` is the antenna height.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Ground distance, ignoring heights.
    pub fn distance_2d(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_3d(&self, other: &Position) -> f64 {
        self.distance_2d(other).hypot(self.z - other.z)
    }
}

/// Per-tier radio parameters and node heights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioParams {
    pub lte_tx_power_dbm: f64,
    pub mmw_tx_power_dbm: f64,
    pub lte_bandwidth_hz: f64,
    pub mmw_bandwidth_hz: f64,
    pub lte_carrier_hz: f64,
    pub mmw_carrier_hz: f64,
    /// Elements of the mmWave base-station UPA (8x8).
    pub bs_array_elements: u32,
    /// Elements of the vehicle UPA (4x4), used on mmWave links only.
    pub vn_array_elements: u32,
    pub bs_height_m: f64,
    pub vn_height_m: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            lte_tx_power_dbm: 46.0,
            mmw_tx_power_dbm: 27.0,
            lte_bandwidth_hz: 20e6,
            mmw_bandwidth_hz: 1e9,
            lte_carrier_hz: 2.4e9,
            mmw_carrier_hz: 28e9,
            bs_array_elements: 64,
            vn_array_elements: 16,
            bs_height_m: 30.0,
            vn_height_m: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub id: usize,
    pub tier: Tier,
    pub pos: Position,
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub array_elements: u32,
}

impl BaseStation {
    pub fn new(id: usize, tier: Tier, x: f64, y: f64, radio: &RadioParams) -> Self {
        let pos = Position::new(x, y, radio.bs_height_m);
        match tier {
            Tier::Lte => Self {
                id,
                tier,
                pos,
                tx_power_dbm: radio.lte_tx_power_dbm,
                bandwidth_hz: radio.lte_bandwidth_hz,
                carrier_hz: radio.lte_carrier_hz,
                array_elements: 1,
            },
            Tier::Mmwave => Self {
                id,
                tier,
                pos,
                tx_power_dbm: radio.mmw_tx_power_dbm,
                bandwidth_hz: radio.mmw_bandwidth_hz,
                carrier_hz: radio.mmw_carrier_hz,
                array_elements: radio.bs_array_elements,
            },
        }
    }
}

/// One of the four vehicular traffic classes, numbered 1 to 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct TrafficClass(u8);

impl TrafficClass {
    pub const ALL: [TrafficClass; 4] = [
        TrafficClass(1),
        TrafficClass(2),
        TrafficClass(3),
        TrafficClass(4),
    ];

    pub fn new(k: u8) -> Option<Self> {
        (1..=4).contains(&k).then_some(Self(k))
    }

    /// Class number, 1..=4.
    pub fn number(self) -> u8 {
        self.0
    }

    /// Zero-based index for per-class arrays.
    pub fn index(self) -> usize {
        usize::from(self.0 - 1)
    }
}

impl TryFrom<u8> for TrafficClass {
    type Error = String;

    fn try_from(k: u8) -> Result<Self, Self::Error> {
        Self::new(k).ok_or_else(|| format!("traffic class must be 1..=4, got {k}"))
    }
}

impl From<TrafficClass> for u8 {
    fn from(c: TrafficClass) -> u8 {
        c.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VehicularNode {
    pub id: usize,
    pub pos: Position,
    pub class: TrafficClass,
    /// Minimum data rate the class asks for, bits/s.
    pub required_rate_bps: f64,
    pub array_elements: u32,
}

/// Requirements and draw probabilities of the four traffic classes.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassProfile {
    pub requirements_bps: [f64; 4],
    pub probabilities: [f64; 4],
}

impl Default for ClassProfile {
    fn default() -> Self {
        Self {
            requirements_bps: [1e6, 10e6, 100e6, 1200e6],
            probabilities: [0.25; 4],
        }
    }
}

/// How the number of points of a process is drawn from its mean.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountModel {
    /// Poisson-distributed count (homogeneous PPP).
    Poisson,
    /// The mean rounded to the nearest integer (binomial point process).
    #[default]
    Exact,
}

impl CountModel {
    pub fn draw<R: Rng + ?Sized>(self, mean: f64, rng: &mut R) -> usize {
        match self {
            CountModel::Poisson => poisson_count(mean, rng),
            CountModel::Exact => mean.max(0.0).round() as usize,
        }
    }
}

/// How many vehicles a snapshot carries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VnMode {
    /// Heavy load: Poisson count with mean `vehicles_per_bs` per expected mmWave BS.
    PerMmwBs { vehicles_per_bs: f64 },
    /// Heavy load: exactly `vehicles_per_bs` per realized mmWave BS.
    PerRealizedMmwBs { vehicles_per_bs: u32 },
    /// Exactly `total` vehicles regardless of density.
    Fixed { total: usize },
}

impl Default for VnMode {
    fn default() -> Self {
        VnMode::PerMmwBs {
            vehicles_per_bs: 10.0,
        }
    }
}

/// Closed axis-aligned rectangle in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }
}

impl Default for Region {
    fn default() -> Self {
        Self {
            x_min: 250.0,
            x_max: 750.0,
            y_min: 250.0,
            y_max: 750.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub base_stations: Vec<BaseStation>,
    pub vehicles: Vec<VehicularNode>,
    pub measurement_region: Region,
    /// Side of the square simulation area, meters.
    pub side_m: f64,
}

impl Snapshot {
    pub fn mmwave_count(&self) -> usize {
        self.base_stations
            .iter()
            .filter(|b| b.tier == Tier::Mmwave)
            .count()
    }
}

/// Side length in meters of a square of `area_km2`.
pub fn side_m(area_km2: f64) -> f64 {
    area_km2.sqrt() * 1000.0
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("finite positive Poisson mean");
    dist.sample(rng) as usize
}

fn uniform_xy<R: Rng + ?Sized>(side: f64, rng: &mut R) -> (f64, f64) {
    (rng.random::<f64>() * side, rng.random::<f64>() * side)
}

/// Drops LTE then mmWave base stations; ids are assigned in that order from 0.
pub fn deploy_bs<R: Rng + ?Sized>(
    density_lte: f64,
    density_mmw: f64,
    area_km2: f64,
    radio: &RadioParams,
    rng: &mut R,
) -> Vec<BaseStation> {
    deploy_bs_with(
        CountModel::Poisson,
        density_lte,
        density_mmw,
        area_km2,
        radio,
        rng,
    )
}

/// [`deploy_bs`] with an explicit count model for both tiers.
pub fn deploy_bs_with<R: Rng + ?Sized>(
    counts: CountModel,
    density_lte: f64,
    density_mmw: f64,
    area_km2: f64,
    radio: &RadioParams,
    rng: &mut R,
) -> Vec<BaseStation> {
    debug_assert!(density_lte >= 0.0 && density_mmw >= 0.0 && area_km2 > 0.0);
    let side = side_m(area_km2);
    let n_lte = counts.draw(density_lte * area_km2, rng);
    let n_mmw = counts.draw(density_mmw * area_km2, rng);
    let mut out = Vec::with_capacity(n_lte + n_mmw);
    for (tier, n) in [(Tier::Lte, n_lte), (Tier::Mmwave, n_mmw)] {
        for _ in 0..n {
            let (x, y) = uniform_xy(side, rng);
            out.push(BaseStation::new(out.len(), tier, x, y, radio));
        }
    }
    out
}

/// Places vehicles uniformly and draws each one's class.
///
/// In [`VnMode::PerMmwBs`] the count is Poisson with mean
/// `vehicles_per_bs * density_mmw * area_km2`, drawn independently of the
/// realized base-station count; [`VnMode::PerRealizedMmwBs`] uses
/// `mmw_bs_count` instead.
pub fn deploy_vns<R: Rng + ?Sized>(
    mode: VnMode,
    density_mmw: f64,
    mmw_bs_count: usize,
    area_km2: f64,
    classes: &ClassProfile,
    radio: &RadioParams,
    rng: &mut R,
) -> Vec<VehicularNode> {
    let side = side_m(area_km2);
    let count = match mode {
        VnMode::PerMmwBs { vehicles_per_bs } => {
            poisson_count(vehicles_per_bs * density_mmw * area_km2, rng)
        }
        VnMode::PerRealizedMmwBs { vehicles_per_bs } => vehicles_per_bs as usize * mmw_bs_count,
        VnMode::Fixed { total } => total,
    };
    let class_dist = WeightedIndex::new(classes.probabilities)
        .expect("class probabilities are validated to be non-negative with positive sum");
    (0..count)
        .map(|id| {
            let (x, y) = uniform_xy(side, rng);
            let class = TrafficClass::ALL[class_dist.sample(rng)];
            VehicularNode {
                id,
                pos: Position::new(x, y, radio.vn_height_m),
                class,
                required_rate_bps: classes.requirements_bps[class.index()],
                array_elements: radio.vn_array_elements,
            }
        })
        .collect()
}

pub fn in_measurement_region(pos: &Position, snapshot: &Snapshot) -> bool {
    snapshot.measurement_region.contains(pos.x, pos.y)
}

/// Everything needed to draw one snapshot at a given mmWave density.
#[derive(Clone, Debug)]
pub struct DeploymentParams {
    pub area_km2: f64,
    pub lte_density: f64,
    pub bs_count: CountModel,
    pub vn_mode: VnMode,
    pub classes: ClassProfile,
    pub radio: RadioParams,
    pub measurement_region: Region,
}

impl Default for DeploymentParams {
    fn default() -> Self {
        Self {
            area_km2: 1.0,
            lte_density: 4.0,
            bs_count: CountModel::Exact,
            vn_mode: VnMode::default(),
            classes: ClassProfile::default(),
            radio: RadioParams::default(),
            measurement_region: Region::default(),
        }
    }
}

pub fn deploy_snapshot<R: Rng + ?Sized>(
    params: &DeploymentParams,
    density_mmw: f64,
    rng: &mut R,
) -> Snapshot {
    let base_stations = deploy_bs_with(
        params.bs_count,
        params.lte_density,
        density_mmw,
        params.area_km2,
        &params.radio,
        rng,
    );
    let n_mmw = base_stations
        .iter()
        .filter(|b| b.tier == Tier::Mmwave)
        .count();
    let vehicles = deploy_vns(
        params.vn_mode,
        density_mmw,
        n_mmw,
        params.area_km2,
        &params.classes,
        &params.radio,
        rng,
    );
    Snapshot {
        base_stations,
        vehicles,
        measurement_region: params.measurement_region,
        side_m: side_m(params.area_km2),
    }
}
