//! Provider and consumer fairness factors and the re-scoring rule.
//!
//! The final score of a candidate is
//! `(base + alpha * provider + beta * consumer) / (1 + alpha + beta)`,
//! where `provider` decreases with the POI's train popularity (from a
//! fitted [`ExposureModel`]) and `consumer` rewards nearby popular POIs for
//! inactive users (see [`ConsumerContext`]).

mod consumer;
mod exposure;
mod histogram;
mod rescore;

pub use consumer::{build_consumer_context, ConsumerContext, NEARBY_FRACTION};
pub use exposure::{
    fit_exposure, fit_linear, fit_logistic, fit_power_law, power_law_params, ExposureFamily,
    ExposureModel, ExposureParams, DEFAULT_RIDGE_LAMBDA,
};
pub use histogram::{build_popularity_histogram, PopularityHistogram};
pub use rescore::{combine, rescore, FairnessWeights};
