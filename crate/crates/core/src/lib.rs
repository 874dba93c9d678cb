//! Direction-based jamming detection and suppression for the uplink of a
//! single-cell mmWave massive-MIMO system.
//!
//! The crate is organised along the signal chain:
//!
//! * [`grid`]: uniform linear array steering vectors and the orthonormal
//!   angular basis that defines the resolvable paths (RPs).
//! * [`channel`]: terminal geometries and sparse angular-domain channels.
//! * [`transmission`]: pilot and data phases as seen by the base station.
//! * [`detector`]: per-pilot energy detection of active RPs.
//! * [`jamming`]: the common-RP jamming test and its collision bound.
//! * [`suppression`]: jammer-excluding LMMSE estimation, MRC and SINR.
//! * [`experiments`]: the Monte-Carlo harness and validation campaigns.
//!
//! Grid indices are 0-based throughout the API.

// `!(x > 0.0)` is the NaN-rejecting form used for input checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod config;
pub mod detector;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod jamming;
pub mod rng;
pub mod special;
pub mod stats;
pub mod suppression;
pub mod support;
pub mod transmission;
pub mod trial;
pub mod validation;

pub use channel::{draw_channel, sample_terminal, ChannelRealization, TerminalGeometry};
pub use config::{MuSource, SystemConfig, SystemConfigFile};
pub use detector::{
    energy_statistic, estimate_rp_sets, threshold_for_fap, to_angular_domain, EnergyStatistics,
    RpEstimate,
};
pub use error::{Error, Result};
pub use grid::{steering_vector, AngularGrid, ArrayGeometry};
pub use jamming::{collision_probability_bound, detect_jammer, rp_occurrence_counts, DetectionOutcome};
pub use support::SupportSet;

pub use num_complex::Complex64;
