//! Pattern-division precoding simulator for FDD massive MIMO downlinks.
//!
//! User clusters scatter their energy over angular intervals; on a uniform
//! linear array each interval maps to a set of DFT columns (the cluster's
//! support set). Clusters whose supports overlap interfere when multiplexed
//! on the same flat subchannel ("pattern"), so the library builds an
//! edge-weighted overlap graph, schedules clusters onto a fixed budget of
//! patterns with a two-phase vertex-coloring heuristic, and evaluates the
//! resulting two-layer precoder through seeded Monte-Carlo experiments.
//!
//! - [`channel`]: cluster geometry, DFT supports, eigen-spectra, channel draws
//! - [`asrgraph`]: overlap weights and the edge-weighted cluster graph
//! - [`coloring`]: pattern-assignment solvers and the exhaustive oracle
//! - [`precoding`]: pre-beamformers, zero-forcing second layer, rates
//! - [`simharness`]: experiment driver, CSV reports, per-trial RNG streams

pub mod asrgraph;
pub mod channel;
pub mod coloring;
pub mod error;
pub mod precoding;
pub mod simharness;
pub mod textfmt;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
