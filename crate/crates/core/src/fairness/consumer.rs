use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{top_fifth, Dataset, GroupAssignment, Poi, UserGroup};
use crate::geo::LatLon;
use crate::ids::{PoiId, UserId};
use crate::recommenders::min_max_normalize;

/// Share of a user's candidates, by distance to the nearest visited POI,
/// that counts as nearby.
pub const NEARBY_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct UserEntry {
    group: UserGroup,
    visited: Vec<LatLon>,
    /// Nearby cut-off in km; `None` for active users or users without
    /// candidates.
    threshold_km: Option<f64>,
}

/// Inputs of the consumer factor: for inactive users, nearby popular POIs
/// score their normalized train popularity; everything else scores 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsumerContext {
    users: BTreeMap<UserId, UserEntry>,
    popularity: BTreeMap<PoiId, f64>,
    counts: BTreeMap<PoiId, u64>,
    coords: BTreeMap<PoiId, LatLon>,
}

fn nearest_km(from: &LatLon, visited: &[LatLon]) -> f64 {
    visited
        .iter()
        .map(|v| from.haversine_km(v))
        .fold(f64::INFINITY, f64::min)
}

/// Nearest-rank percentile: the `ceil(q * n)`-th smallest value.
pub(crate) fn nearest_rank(sorted: &[f64], n_rank: usize) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    Some(sorted[n_rank.clamp(1, sorted.len()) - 1])
}

pub fn build_consumer_context(
    train: &Dataset,
    groups: &GroupAssignment,
    pois: &BTreeMap<PoiId, Poi>,
) -> ConsumerContext {
    let counts_map = train.poi_checkin_counts();
    let counts: BTreeMap<PoiId, u64> = pois
        .keys()
        .map(|p| (p.clone(), counts_map.get(p).copied().unwrap_or(0)))
        .collect();
    let mut normalized: Vec<f64> = counts.values().map(|&c| c as f64).collect();
    min_max_normalize(&mut normalized);
    let popularity = counts.keys().cloned().zip(normalized).collect();
    let coords: BTreeMap<PoiId, LatLon> = pois
        .iter()
        .map(|(id, p)| (id.clone(), p.location()))
        .collect();

    let visited_sets: BTreeMap<UserId, BTreeSet<PoiId>> = train.visited_by_user();
    let mut users = BTreeMap::new();
    let empty = BTreeSet::new();
    for (user, group) in &groups.user_group {
        let seen = visited_sets.get(user).unwrap_or(&empty);
        let visited: Vec<LatLon> = seen.iter().map(|p| coords[p]).collect();
        let threshold_km = match group {
            UserGroup::Active => None,
            UserGroup::Inactive => {
                assert!(
                    !visited.is_empty(),
                    "inactive user {user} has no train visits"
                );
                let mut dists: Vec<f64> = coords
                    .iter()
                    .filter(|(p, _)| !seen.contains(*p))
                    .map(|(_, c)| nearest_km(c, &visited))
                    .collect();
                dists.sort_by(f64::total_cmp);
                let rank = top_fifth(dists.len());
                nearest_rank(&dists, rank)
            }
        };
        users.insert(
            user.clone(),
            UserEntry {
                group: *group,
                visited,
                threshold_km,
            },
        );
    }
    ConsumerContext {
        users,
        popularity,
        counts,
        coords,
    }
}

impl ConsumerContext {
    pub fn threshold_km(&self, user: &UserId) -> Option<f64> {
        self.users.get(user).and_then(|e| e.threshold_km)
    }

    pub fn normalized_popularity(&self, poi: &PoiId) -> f64 {
        self.popularity.get(poi).copied().unwrap_or(0.0)
    }

    pub fn checkin_count(&self, poi: &PoiId) -> u64 {
        self.counts.get(poi).copied().unwrap_or(0)
    }

    pub fn is_nearby(&self, user: &UserId, poi: &PoiId) -> bool {
        let (Some(entry), Some(loc)) = (self.users.get(user), self.coords.get(poi)) else {
            return false;
        };
        match entry.threshold_km {
            Some(t) => nearest_km(loc, &entry.visited) <= t,
            None => false,
        }
    }

    /// `F_c(u, p)`: 0 for active users; for inactive users the normalized
    /// popularity of `poi` when it is nearby, else 0.
    pub fn consumer_score(&self, user: &UserId, poi: &PoiId) -> f64 {
        match self.users.get(user) {
            Some(e) if e.group == UserGroup::Inactive && self.is_nearby(user, poi) => {
                self.normalized_popularity(poi)
            }
            _ => 0.0,
        }
    }

    /// Consumer scores of every POI for one user, keyed by POI.
    pub fn scores_for(&self, user: &UserId) -> HashMap<PoiId, f64> {
        let Some(entry) = self.users.get(user) else {
            return HashMap::new();
        };
        let Some(t) = entry
            .threshold_km
            .filter(|_| entry.group == UserGroup::Inactive)
        else {
            return HashMap::new();
        };
        self.coords
            .iter()
            .filter(|(_, c)| nearest_km(c, &entry.visited) <= t)
            .map(|(p, _)| (p.clone(), self.popularity[p]))
            .filter(|(_, s)| *s > 0.0)
            .collect()
    }
}
