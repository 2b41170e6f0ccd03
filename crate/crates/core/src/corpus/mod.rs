//! Check-in corpora: ingestion, sparsity filtering, chronological splits,
//! activity/popularity groups and a synthetic generator.

mod filter;
mod groups;
mod io;
mod split;
mod summary;
mod synth;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::geo::LatLon;
use crate::ids::{PoiId, UserId};

pub use filter::{filter_sparse, filter_sparse_default};
pub(crate) use groups::top_fifth;
pub use groups::{assign_groups, GroupAssignment, ItemGroup, UserGroup};
pub use io::{load_dataset, write_dataset, Delimiter, LoadOptions};
pub use split::{chronological_split, Split, SplitDataset, SplitFractions};
pub use summary::{dataset_stats, StatsSummary};
pub use synth::{generate_synthetic, SyntheticConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckIn {
    pub user: UserId,
    pub poi: PoiId,
    /// Seconds since the Unix epoch.
    pub timestamp: i64,
    /// Which split this check-in was routed to, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

impl CheckIn {
    pub fn new(user: impl Into<UserId>, poi: impl Into<PoiId>, timestamp: i64) -> Self {
        Self {
            user: user.into(),
            poi: poi.into(),
            timestamp,
            split: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poi {
    pub id: PoiId,
    pub latitude: f64,
    pub longitude: f64,
    #[serde(default)]
    pub category: Option<String>,
}

impl Poi {
    pub fn new(id: impl Into<PoiId>, latitude: f64, longitude: f64) -> Self {
        Self {
            id: id.into(),
            latitude,
            longitude,
            category: None,
        }
    }

    pub fn with_category(mut self, category: impl Into<String>) -> Self {
        self.category = Some(category.into());
        self
    }

    pub fn location(&self) -> LatLon {
        LatLon::new(self.latitude, self.longitude)
    }

    pub fn has_valid_coordinates(&self) -> bool {
        (-90.0..=90.0).contains(&self.latitude)
            && self.longitude > -180.0
            && self.longitude <= 180.0
    }
}

/// Undirected friendship edges, stored as `(smaller, larger)` id pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SocialGraph {
    edges: BTreeSet<(UserId, UserId)>,
}

impl SocialGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts an edge; self-loops are ignored and mirrored pairs collapse.
    /// Returns whether the edge was new.
    pub fn insert(&mut self, a: UserId, b: UserId) -> bool {
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => false,
            std::cmp::Ordering::Less => self.edges.insert((a, b)),
            std::cmp::Ordering::Greater => self.edges.insert((b, a)),
        }
    }

    pub fn contains(&self, a: &UserId, b: &UserId) -> bool {
        let key = if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        self.edges.contains(&key)
    }

    pub fn edges(&self) -> impl Iterator<Item = &(UserId, UserId)> {
        self.edges.iter()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Keeps only edges whose endpoints both satisfy `keep`.
    pub fn retain_users(&mut self, keep: impl Fn(&UserId) -> bool) {
        self.edges.retain(|(a, b)| keep(a) && keep(b));
    }

    /// Friend lists keyed by user, each sorted ascending.
    pub fn adjacency(&self) -> BTreeMap<UserId, Vec<UserId>> {
        let mut adj: BTreeMap<UserId, Vec<UserId>> = BTreeMap::new();
        for (a, b) in &self.edges {
            adj.entry(a.clone()).or_default().push(b.clone());
            adj.entry(b.clone()).or_default().push(a.clone());
        }
        for friends in adj.values_mut() {
            friends.sort();
        }
        adj
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub users: BTreeSet<UserId>,
    pub pois: BTreeMap<PoiId, Poi>,
    pub checkins: Vec<CheckIn>,
    pub social: SocialGraph,
}

impl Dataset {
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_pois(&self) -> usize {
        self.pois.len()
    }

    pub fn num_checkins(&self) -> usize {
        self.checkins.len()
    }

    pub fn has_categories(&self) -> bool {
        self.pois.values().any(|p| p.category.is_some())
    }

    /// Raw check-in count per POI (POIs without check-ins are absent).
    pub fn poi_checkin_counts(&self) -> HashMap<&PoiId, u64> {
        let mut counts = HashMap::new();
        for c in &self.checkins {
            *counts.entry(&c.poi).or_insert(0) += 1;
        }
        counts
    }

    pub fn user_checkin_counts(&self) -> HashMap<&UserId, u64> {
        let mut counts = HashMap::new();
        for c in &self.checkins {
            *counts.entry(&c.user).or_insert(0) += 1;
        }
        counts
    }

    /// Distinct POIs visited per user.
    pub fn visited_by_user(&self) -> BTreeMap<UserId, BTreeSet<PoiId>> {
        let mut out: BTreeMap<UserId, BTreeSet<PoiId>> = BTreeMap::new();
        for c in &self.checkins {
            out.entry(c.user.clone()).or_default().insert(c.poi.clone());
        }
        out
    }

    /// Checks the referential invariants; returns the first violation.
    pub fn validate(&self) -> crate::Result<()> {
        for c in &self.checkins {
            if !self.users.contains(&c.user) {
                return Err(crate::Error::unknown("user", &c.user));
            }
            if !self.pois.contains_key(&c.poi) {
                return Err(crate::Error::unknown("POI", &c.poi));
            }
            if c.timestamp < 0 {
                return Err(crate::Error::DegenerateInput(format!(
                    "negative timestamp {} for user {}",
                    c.timestamp, c.user
                )));
            }
        }
        for (a, b) in self.social.edges() {
            for u in [a, b] {
                if !self.users.contains(u) {
                    return Err(crate::Error::unknown("user", u));
                }
            }
        }
        for p in self.pois.values() {
            if !p.has_valid_coordinates() {
                return Err(crate::Error::DegenerateInput(format!(
                    "POI {} has out-of-range coordinates ({}, {})",
                    p.id, p.latitude, p.longitude
                )));
            }
        }
        Ok(())
    }

    /// Same entity tables with a different check-in list.
    pub(crate) fn with_checkins(&self, checkins: Vec<CheckIn>) -> Dataset {
        Dataset {
            users: self.users.clone(),
            pois: self.pois.clone(),
            checkins,
            social: self.social.clone(),
        }
    }
}
