//! Monte Carlo evaluation of vehicle-to-infrastructure attachment policies in
//! a heterogeneous LTE + mmWave network.
//!
//! A run draws a network snapshot ([`geometry`]), realizes its channel
//! ([`channel`]), attaches every vehicle under one of the policies in
//! [`policy`], iterates the association to a steady state ([`engine`]) and
//! reduces the outcome to per-class figures of merit ([`metrics`]).
//! [`campaign`] sweeps the mmWave density grid and [`output`] writes the
//! results.

pub mod campaign;
pub mod channel;
pub mod config;
pub mod engine;
pub mod geometry;
pub mod metrics;
pub mod output;
pub mod policy;
pub mod seed;

pub use campaign::{cells, run_campaign, run_cell_index, summarize_campaign, CellKey};
pub use channel::{ChannelParams, LinkState, LinkTable, LosMode, LosState};
pub use config::{ConfigError, ScenarioConfig};
pub use engine::{
    initial_attach, run_once, steady_state, AssociationState, ConvergenceParams, RunResult,
    SteadyStateOutcome, VnRecord,
};
pub use geometry::{
    BaseStation, CountModel, Position, RadioParams, Region, Snapshot, Tier, TrafficClass,
    VehicularNode, VnMode,
};
pub use metrics::{summarize, CellSummary, RunMetrics, Stat};
pub use output::Format;
pub use policy::{AttachmentDecision, PolicyKind};
