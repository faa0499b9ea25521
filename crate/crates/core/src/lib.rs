//! Outage, throughput and transmission-capacity analysis of power-controlled
//! DS-CDMA cellular uplinks with sectorized base stations, Nakagami fading
//! and log-normal shadowing.
//!
//! The pipeline runs bottom-up: [`topology`] places base stations and
//! mobiles, [`channel`] draws shadowing, [`gains`] turns a realization into
//! per-uplink interference environments, [`outage`] evaluates the outage
//! probability in closed form, [`policy`] picks rates, and [`harness`]
//! drives Monte Carlo experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod gains;
pub mod harness;
pub mod outage;
pub mod policy;
pub mod topology;
pub mod validation;

pub use channel::{FadingModel, ShadowField};
pub use error::{Error, Result};
pub use gains::{Interferer, LinkEnvironment, PowerControlledNetwork, SpreadingParams};
pub use harness::{run_experiment, run_trial, AggregateResult, ExperimentConfig, Realization, SweepAxis};
pub use outage::{outage_probability, outage_probability_oracle, rate_to_threshold, threshold_to_rate, OracleEstimate};
pub use policy::{
    apply_policies, apply_policy, DeniedOutage, NetworkStats, PolicyKind, PolicySpec, Population, RateGrid,
    UplinkOutcome,
};
pub use topology::{generate_topology, Point, SectorId, Topology, TopologyParams};
