use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{PoiId, UserId};
use crate::recommenders::RecommendationList;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionMode {
    /// Hits divided by `k`.
    #[default]
    Standard,
    /// 1 when any of the first `k` entries is a test visit, else 0.
    HitRate,
}

/// Precision of the first `k` entries of `recs` against `test_visits`.
pub fn precision_at_k(
    recs: &RecommendationList,
    test_visits: &BTreeSet<PoiId>,
    k: usize,
    mode: PrecisionMode,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::Config("precision needs k >= 1".into()));
    }
    let hits = recs
        .poi_ids()
        .take(k)
        .filter(|p| test_visits.contains(*p))
        .count();
    Ok(match mode {
        PrecisionMode::Standard => hits as f64 / k as f64,
        PrecisionMode::HitRate => f64::from(u8::from(hits > 0)),
    })
}

/// Mean precision over the lists whose user has at least one test visit.
/// Returns `None` when no such user exists.
pub fn mean_precision<'a>(
    lists: impl IntoIterator<Item = &'a RecommendationList>,
    test_visits: &BTreeMap<UserId, BTreeSet<PoiId>>,
    k: usize,
    mode: PrecisionMode,
) -> Result<Option<f64>> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for list in lists {
        let Some(visits) = test_visits.get(&list.user).filter(|v| !v.is_empty()) else {
            continue;
        };
        sum += precision_at_k(list, visits, k, mode)?;
        n += 1;
    }
    Ok((n > 0).then(|| sum / n as f64))
}
