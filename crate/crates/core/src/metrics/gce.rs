use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::exposure::ExposureTable;
use crate::corpus::{GroupAssignment, ItemGroup, UserGroup};
use crate::error::{Error, Result};
use crate::ids::{PoiId, UserId};
use crate::recommenders::RecommendationList;

/// Divergence index of GCE; order 2 is Pearson's chi-square.
pub const DEFAULT_GCE_ORDER: f64 = 2.0;

/// Observed per-group mass of a metric, normalized by `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDistribution {
    pub labels: Vec<String>,
    pub mass: Vec<f64>,
    pub z: f64,
}

impl MetricDistribution {
    /// Normalizes raw per-group totals. `z == 0` is an error.
    pub fn from_totals(labels: Vec<String>, totals: Vec<f64>) -> Result<Self> {
        let z: f64 = totals.iter().sum();
        if !(z > 0.0) {
            return Err(Error::UndefinedDistribution(
                "all group totals are zero".into(),
            ));
        }
        Ok(Self {
            labels,
            mass: totals.iter().map(|t| t / z).collect(),
            z,
        })
    }
}

/// Target per-group mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairDistribution {
    pub mass: Vec<f64>,
}

impl FairDistribution {
    pub fn uniform(groups: usize) -> Self {
        Self {
            mass: vec![1.0 / groups as f64; groups],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.mass.iter().sum();
        if self.mass.is_empty() || self.mass.iter().any(|m| !(*m > 0.0)) || (sum - 1.0).abs() > 1e-9
        {
            return Err(Error::Config(format!(
                "fair distribution must be strictly positive and sum to 1, got {:?}",
                self.mass
            )));
        }
        Ok(())
    }
}

/// GCE outcome. `Degenerate` stands for negative infinity (a group with
/// target mass but no observed mass); `Undefined` for an observed
/// distribution that could not be formed (no mass anywhere).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GceValue {
    Finite(f64),
    Degenerate,
    Undefined,
}

impl GceValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            GceValue::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for GceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GceValue::Finite(v) => write!(f, "{v}"),
            GceValue::Degenerate => f.write_str("degenerate"),
            GceValue::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for GceValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            GceValue::Finite(v) => s.serialize_f64(*v),
            GceValue::Degenerate => s.serialize_str("degenerate"),
            GceValue::Undefined => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for GceValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(GceValue::Finite(v)),
            Raw::Tag(t) if t == "degenerate" => Ok(GceValue::Degenerate),
            Raw::Tag(t) if t == "undefined" => Ok(GceValue::Undefined),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!("bad GCE value `{t}`"))),
        }
    }
}

/// `1 / (o (1 - o)) * (sum_i p_f(i)^o p_m(i)^(1 - o) - 1)`.
pub fn gce(p_m: &MetricDistribution, p_f: &FairDistribution, order: f64) -> Result<GceValue> {
    if order == 0.0 || order == 1.0 || !order.is_finite() {
        return Err(Error::Config(format!(
            "GCE order must differ from 0 and 1, got {order}"
        )));
    }
    p_f.validate()?;
    if p_m.mass.len() != p_f.mass.len() {
        return Err(Error::Config(format!(
            "GCE over {} observed groups but {} target groups",
            p_m.mass.len(),
            p_f.mass.len()
        )));
    }
    let mut sum = 0.0;
    for (&m, &f) in p_m.mass.iter().zip(&p_f.mass) {
        if m == 0.0 && order > 1.0 {
            return Ok(GceValue::Degenerate);
        }
        sum += f.powf(order) * m.powf(1.0 - order);
    }
    // adding 0.0 turns a -0.0 into 0.0
    Ok(GceValue::Finite(
        (sum - 1.0) / (order * (1.0 - order)) + 0.0,
    ))
}

/// Hits (recommended POIs the user visited in test) summed per user group.
pub fn user_gain_distribution<'a>(
    lists: impl IntoIterator<Item = &'a RecommendationList>,
    test_visits: &BTreeMap<UserId, BTreeSet<PoiId>>,
    g: &GroupAssignment,
) -> Result<MetricDistribution> {
    let mut totals = [0.0; 2];
    for list in lists {
        let Some(group) = g.user(&list.user) else {
            return Err(Error::unknown("user", &list.user));
        };
        let Some(visits) = test_visits.get(&list.user) else {
            continue;
        };
        let hits = list.poi_ids().filter(|p| visits.contains(*p)).count();
        let slot = UserGroup::ALL.iter().position(|x| *x == group).unwrap();
        totals[slot] += hits as f64;
    }
    MetricDistribution::from_totals(
        UserGroup::ALL.iter().map(|x| format!("{x:?}")).collect(),
        totals.to_vec(),
    )
}

/// Recommended slots summed per POI group.
pub fn item_gain_distribution<'a>(
    lists: impl IntoIterator<Item = &'a RecommendationList>,
    g: &GroupAssignment,
) -> Result<MetricDistribution> {
    let mut totals = [0.0; 2];
    for list in lists {
        for p in list.poi_ids() {
            let Some(group) = g.item(p) else {
                return Err(Error::unknown("POI", p));
            };
            let slot = ItemGroup::ALL.iter().position(|x| *x == group).unwrap();
            totals[slot] += 1.0;
        }
    }
    MetricDistribution::from_totals(
        ItemGroup::ALL.iter().map(|x| format!("{x:?}")).collect(),
        totals.to_vec(),
    )
    .map_err(|_| Error::UndefinedDistribution("no recommendations".into()))
}

/// Item mass computed from an exposure table instead of the lists.
pub fn item_gain_from_exposure(
    t: &ExposureTable,
    g: &GroupAssignment,
) -> Result<MetricDistribution> {
    MetricDistribution::from_totals(
        ItemGroup::ALL.iter().map(|x| format!("{x:?}")).collect(),
        ItemGroup::ALL
            .iter()
            .map(|grp| t.group_total(g, *grp) as f64)
            .collect(),
    )
}
