//! Deterministic seed derivation.
//!
//! Every run's random streams are a pure function of the master seed and the
//! run's coordinates, so any run can be replayed in isolation and execution
//! order never matters.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `parts` into `base` one word at a time.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Seed of run `run_index` at mmWave density `lambda_m`. Policy is not an
/// input: all policies of a run see the same network.
pub fn run_seed(master: u64, lambda_m: f64, run_index: u64) -> u64 {
    derive_seed(master, &[lambda_m.to_bits(), run_index])
}
