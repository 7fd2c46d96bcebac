//! Pool-based active-learning workbench.
//!
//! The crate bundles everything needed to synthesize a learned query
//! strategy from expert demonstrations on generated datasets and to
//! benchmark it against the classic baselines:
//!
//! * [`data`] — synthetic dataset generation, CSV ingestion, normalization,
//!   pool initialization
//! * [`forest`] — from-scratch random-forest learner with probability output
//! * [`encoding`] — state/action feature encodings and pre-sampling heuristics
//! * [`policy`] — the feed-forward ranking network, training and serialization
//! * [`demogen`] — expert demonstration harvesting (roll-out expert)
//! * [`strategies`] — uniform query-strategy interface plus all baselines
//! * [`cycle`] — the train/query/label loop with learning-curve capture
//! * [`bench`] — AUC-F1, repeated-experiment orchestration, aggregation
//! * [`report`] — CSV/rank-table/SVG emission

pub mod bench;
pub mod cycle;
pub mod data;
pub mod demogen;
pub mod encoding;
pub mod error;
pub mod forest;
pub mod manifest;
pub mod policy;
pub mod report;
pub mod rng;
pub mod strategies;

pub use error::{Error, Result};
