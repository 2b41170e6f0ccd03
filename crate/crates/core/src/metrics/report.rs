use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::accuracy::{mean_precision, PrecisionMode};
use super::distance::{mean_median_distance, user_centroid};
use super::exposure::{exposure_table, group_mean_exposure};
use super::gce::{
    gce, item_gain_distribution, user_gain_distribution, FairDistribution, GceValue,
    DEFAULT_GCE_ORDER,
};
use crate::corpus::{Dataset, GroupAssignment, ItemGroup, UserGroup};
use crate::error::{Error, Result};
use crate::geo::LatLon;
use crate::ids::{PoiId, UserId};
use crate::recommenders::RecommendationList;

pub const REPORT_COLUMNS: [&str; 13] = [
    "model",
    "alpha",
    "beta",
    "exposure_family",
    "k",
    "precision",
    "precision_active",
    "precision_inactive",
    "exp_longtail",
    "exp_shorthead",
    "gce_users",
    "gce_items",
    "mean_median_dist_km",
];

/// Metrics of one (model, family, alpha, beta, k) configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: String,
    pub alpha: f64,
    pub beta: f64,
    pub exposure_family: String,
    pub k: usize,
    pub precision: f64,
    /// `None` when the group has no user with test visits.
    pub precision_active: Option<f64>,
    pub precision_inactive: Option<f64>,
    pub exp_longtail: f64,
    pub exp_shorthead: f64,
    pub gce_users: GceValue,
    pub gce_items: GceValue,
    /// `None` when every list is empty.
    pub mean_median_dist_km: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl MetricsReport {
    /// Cells in [`REPORT_COLUMNS`] order.
    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.model.clone(),
            self.alpha.to_string(),
            self.beta.to_string(),
            self.exposure_family.clone(),
            self.k.to_string(),
            self.precision.to_string(),
            opt(self.precision_active),
            opt(self.precision_inactive),
            self.exp_longtail.to_string(),
            self.exp_shorthead.to_string(),
            self.gce_users.to_string(),
            self.gce_items.to_string(),
            opt(self.mean_median_dist_km),
        ]
    }
}

/// Everything evaluation needs besides the lists.
#[derive(Debug, Clone)]
pub struct EvalContext {
    pub test_visits: BTreeMap<UserId, BTreeSet<PoiId>>,
    pub groups: GroupAssignment,
    pub centroids: BTreeMap<UserId, LatLon>,
    pub coords: BTreeMap<PoiId, LatLon>,
    pub user_fair: FairDistribution,
    pub item_fair: FairDistribution,
    pub gce_order: f64,
    pub precision_mode: PrecisionMode,
}

impl EvalContext {
    /// Test visits come from `test`; centroids from `train`.
    pub fn new(train: &Dataset, test: &Dataset, groups: GroupAssignment) -> Result<Self> {
        let coords: BTreeMap<PoiId, LatLon> = train
            .pois
            .iter()
            .map(|(id, p)| (id.clone(), p.location()))
            .collect();
        let mut centroids = BTreeMap::new();
        for (user, visited) in train.visited_by_user() {
            let locs: Vec<LatLon> = visited.iter().map(|p| coords[p]).collect();
            centroids.insert(user.clone(), user_centroid(&user, &locs)?);
        }
        Ok(Self {
            test_visits: test.visited_by_user(),
            groups,
            centroids,
            coords,
            user_fair: FairDistribution::uniform(UserGroup::ALL.len()),
            item_fair: FairDistribution::uniform(ItemGroup::ALL.len()),
            gce_order: DEFAULT_GCE_ORDER,
            precision_mode: PrecisionMode::Standard,
        })
    }
}

/// Labels identifying the configuration a report belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportLabel {
    pub model: String,
    pub alpha: f64,
    pub beta: f64,
    pub exposure_family: String,
}

/// Evaluates top-`k` lists (one per user). Lists longer than `k` are cut.
pub fn evaluate_lists(
    lists: &[RecommendationList],
    ctx: &EvalContext,
    k: usize,
    label: ReportLabel,
) -> Result<MetricsReport> {
    let cut: Vec<RecommendationList>;
    let lists = if lists.iter().any(|l| l.items.len() > k) {
        cut = lists.iter().map(|l| l.truncated(k)).collect();
        &cut[..]
    } else {
        lists
    };
    let precision = mean_precision(lists, &ctx.test_visits, k, ctx.precision_mode)?
        .ok_or_else(|| Error::DegenerateInput("no evaluated user has test visits".into()))?;
    let per_group = |g: UserGroup| {
        mean_precision(
            lists.iter().filter(|l| ctx.groups.user(&l.user) == Some(g)),
            &ctx.test_visits,
            k,
            ctx.precision_mode,
        )
    };
    let table = exposure_table(lists);
    let gce_users = match user_gain_distribution(lists, &ctx.test_visits, &ctx.groups) {
        Ok(d) => gce(&d, &ctx.user_fair, ctx.gce_order)?,
        Err(Error::UndefinedDistribution(_)) => GceValue::Undefined,
        Err(e) => return Err(e),
    };
    let gce_items = match item_gain_distribution(lists, &ctx.groups) {
        Ok(d) => gce(&d, &ctx.item_fair, ctx.gce_order)?,
        Err(Error::UndefinedDistribution(_)) => GceValue::Undefined,
        Err(e) => return Err(e),
    };
    Ok(MetricsReport {
        model: label.model,
        alpha: label.alpha,
        beta: label.beta,
        exposure_family: label.exposure_family,
        k,
        precision,
        precision_active: per_group(UserGroup::Active)?,
        precision_inactive: per_group(UserGroup::Inactive)?,
        exp_longtail: group_mean_exposure(&table, &ctx.groups, ItemGroup::LongTail)?,
        exp_shorthead: group_mean_exposure(&table, &ctx.groups, ItemGroup::ShortHead)?,
        gce_users,
        gce_items,
        mean_median_dist_km: mean_median_distance(lists, &ctx.centroids, &ctx.coords)?,
    })
}
