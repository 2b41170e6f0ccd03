use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{GroupAssignment, ItemGroup};
use crate::error::{Error, Result};
use crate::ids::PoiId;
use crate::recommenders::RecommendationList;

/// Number of recommendation lists containing each POI (binary attention).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExposureTable {
    pub counts: BTreeMap<PoiId, u64>,
    pub lists: usize,
    /// Total recommended slots across all lists.
    pub slots: u64,
}

impl ExposureTable {
    pub fn exposure(&self, p: &PoiId) -> u64 {
        self.counts.get(p).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Summed exposure of the POIs in `group`.
    pub fn group_total(&self, g: &GroupAssignment, group: ItemGroup) -> u64 {
        g.items_in(group).map(|p| self.exposure(p)).sum()
    }
}

pub fn exposure_table<'a>(
    lists: impl IntoIterator<Item = &'a RecommendationList>,
) -> ExposureTable {
    let mut t = ExposureTable::default();
    for list in lists {
        t.lists += 1;
        let mut seen: Vec<&PoiId> = list.poi_ids().collect();
        seen.sort();
        seen.dedup();
        t.slots += list.items.len() as u64;
        for p in seen {
            *t.counts.entry(p.clone()).or_default() += 1;
        }
    }
    t
}

/// Mean exposure per POI of `group`, counting unrecommended POIs as 0.
pub fn group_mean_exposure(
    t: &ExposureTable,
    g: &GroupAssignment,
    group: ItemGroup,
) -> Result<f64> {
    let size = g.item_group_size(group);
    if size == 0 {
        return Err(Error::EmptyGroup(format!("{group:?} has no POIs")));
    }
    Ok(t.group_total(g, group) as f64 / size as f64)
}
