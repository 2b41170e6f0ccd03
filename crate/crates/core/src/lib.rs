//! Multi-sided fairness re-scoring for point-of-interest recommendation.
//!
//! The crate trains contextual baseline recommenders on a check-in corpus,
//! adds a provider bonus (favouring unpopular POIs) and a consumer bonus
//! (nearby popular POIs for inactive users) to their scores, and evaluates
//! accuracy, exposure, generalized cross-entropy fairness and geographic
//! distance over sweeps of the two fairness weights.
//!
//! The pipeline, module by module:
//!
//! - [`corpus`]: ingest, filter, split chronologically, assign activity and
//!   popularity groups, generate synthetic corpora.
//! - [`recommenders`]: USG, GeoSoCa, LORE and popularity baselines producing
//!   per-user scores normalized to `[0, 1]`.
//! - [`fairness`]: exposure models for the provider factor, the consumer
//!   context, and the re-scoring rule.
//! - [`metrics`]: precision, exposure, GCE, distance and Pareto fronts.
//! - [`stats`]: Kruskal-Wallis, Mann-Whitney U and Wilcoxon signed-rank.
//! - [`runner`]: configuration, sweeps and result tables.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod error;
pub mod fairness;
pub mod geo;
pub mod ids;
pub mod metrics;
pub mod model_doc;
pub mod recommenders;
pub mod regression;
pub mod rng;
pub mod runner;
pub mod stats;

pub use error::{Error, Result};
pub use ids::{PoiId, UserId};
