//! Accuracy, exposure, group fairness (GCE) and distance metrics, plus
//! Pareto-front extraction.

mod accuracy;
mod distance;
mod exposure;
mod gce;
mod pareto;
mod report;

pub use accuracy::{mean_precision, precision_at_k, PrecisionMode};
pub use distance::{mean_median_distance, median, user_centroid};
pub use exposure::{exposure_table, group_mean_exposure, ExposureTable};
pub use gce::{
    gce, item_gain_distribution, item_gain_from_exposure, user_gain_distribution, FairDistribution,
    GceValue, MetricDistribution, DEFAULT_GCE_ORDER,
};
pub use pareto::{pareto_front, pareto_mask, ParetoPoint};
pub use report::{evaluate_lists, EvalContext, MetricsReport, ReportLabel, REPORT_COLUMNS};
