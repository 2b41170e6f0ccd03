//! Indexed view of a training split shared by every base model.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, SocialGraph, Split};
use crate::error::{Error, Result};
use crate::geo::LatLon;
use crate::ids::{PoiId, UserId};

/// Users x POIs visit counts from the train split, in sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckinMatrix {
    /// Per user, `(poi index, count)` sorted by POI index; counts are > 0.
    rows: Vec<Vec<(u32, u32)>>,
    /// Per POI, the users who visited it, ascending.
    visitors: Vec<Vec<u32>>,
    poi_counts: Vec<u64>,
}

impl CheckinMatrix {
    pub fn count(&self, user: usize, poi: usize) -> u32 {
        let row = &self.rows[user];
        row.binary_search_by_key(&(poi as u32), |e| e.0)
            .map(|i| row[i].1)
            .unwrap_or(0)
    }

    /// Binary view: visited or not.
    pub fn visited(&self, user: usize, poi: usize) -> bool {
        self.count(user, poi) > 0
    }

    pub fn row(&self, user: usize) -> &[(u32, u32)] {
        &self.rows[user]
    }

    pub fn visitors(&self, poi: usize) -> &[u32] {
        &self.visitors[poi]
    }

    /// Number of distinct POIs the user visited.
    pub fn degree(&self, user: usize) -> usize {
        self.rows[user].len()
    }

    pub fn poi_count(&self, poi: usize) -> u64 {
        self.poi_counts[poi]
    }

    pub fn poi_counts(&self) -> &[u64] {
        &self.poi_counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CategoryIx(pub u32);

/// Everything the base models read from the train split.
#[derive(Debug, Clone)]
pub struct TrainContext {
    pub users: Vec<UserId>,
    pub pois: Vec<PoiId>,
    user_index: HashMap<UserId, usize>,
    poi_index: HashMap<PoiId, usize>,
    pub matrix: CheckinMatrix,
    pub coords: Vec<LatLon>,
    /// Category per POI; uncategorized POIs share one extra bucket.
    pub categories: Vec<CategoryIx>,
    pub n_categories: usize,
    pub has_categories: bool,
    /// Friend indices per user, ascending.
    pub friends: Vec<Vec<u32>>,
    /// Train check-ins per user in time order, as POI indices.
    pub sequences: Vec<Vec<u32>>,
}

impl TrainContext {
    /// Builds the context, refusing check-ins tagged validation or test.
    pub fn build(train: &Dataset, social: &SocialGraph) -> Result<Self> {
        if let Some(c) = train
            .checkins
            .iter()
            .find(|c| matches!(c.split, Some(Split::Validation | Split::Test)))
        {
            return Err(Error::Leakage(format!(
                "training data contains a {:?} check-in ({} at {})",
                c.split.unwrap(),
                c.user,
                c.poi
            )));
        }
        let users: Vec<UserId> = train.users.iter().cloned().collect();
        let pois: Vec<PoiId> = train.pois.keys().cloned().collect();
        let user_index: HashMap<UserId, usize> = users
            .iter()
            .enumerate()
            .map(|(i, u)| (u.clone(), i))
            .collect();
        let poi_index: HashMap<PoiId, usize> = pois
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();

        let mut counts: Vec<BTreeMap<u32, u32>> = vec![BTreeMap::new(); users.len()];
        let mut poi_counts = vec![0u64; pois.len()];
        let mut timed: Vec<Vec<(i64, u32)>> = vec![Vec::new(); users.len()];
        for c in &train.checkins {
            let u = *user_index
                .get(&c.user)
                .ok_or_else(|| Error::unknown("user", &c.user))?;
            let p = *poi_index
                .get(&c.poi)
                .ok_or_else(|| Error::unknown("POI", &c.poi))? as u32;
            *counts[u].entry(p).or_insert(0) += 1;
            poi_counts[p as usize] += 1;
            timed[u].push((c.timestamp, p));
        }
        let rows: Vec<Vec<(u32, u32)>> = counts
            .into_iter()
            .map(|m| m.into_iter().collect())
            .collect();
        let mut visitors = vec![Vec::new(); pois.len()];
        for (u, row) in rows.iter().enumerate() {
            for &(p, _) in row {
                visitors[p as usize].push(u as u32);
            }
        }
        let sequences = timed
            .into_iter()
            .map(|mut v| {
                // ties by POI id, which index order follows
                v.sort();
                v.into_iter().map(|(_, p)| p).collect()
            })
            .collect();

        let coords = train.pois.values().map(|p| p.location()).collect();
        let mut cat_index: BTreeMap<&str, u32> = BTreeMap::new();
        for p in train.pois.values() {
            if let Some(c) = &p.category {
                let next = cat_index.len() as u32;
                cat_index.entry(c.as_str()).or_insert(next);
            }
        }
        // stable, id-sorted numbering
        let names: Vec<&str> = cat_index.keys().copied().collect();
        let cat_index: HashMap<&str, u32> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (*n, i as u32))
            .collect();
        let uncategorized = cat_index.len() as u32;
        let categories: Vec<CategoryIx> = train
            .pois
            .values()
            .map(|p| {
                CategoryIx(
                    p.category
                        .as_deref()
                        .map(|c| cat_index[c])
                        .unwrap_or(uncategorized),
                )
            })
            .collect();
        let has_uncategorized = categories.iter().any(|c| c.0 == uncategorized);
        let n_categories = cat_index.len() + usize::from(has_uncategorized);

        let mut friends = vec![Vec::new(); users.len()];
        for (a, b) in social.edges() {
            if let (Some(&ia), Some(&ib)) = (user_index.get(a), user_index.get(b)) {
                friends[ia].push(ib as u32);
                friends[ib].push(ia as u32);
            }
        }
        for f in &mut friends {
            f.sort_unstable();
            f.dedup();
        }

        Ok(Self {
            users,
            pois,
            user_index,
            poi_index,
            matrix: CheckinMatrix {
                rows,
                visitors,
                poi_counts,
            },
            coords,
            categories,
            n_categories,
            has_categories: !cat_index.is_empty(),
            friends,
            sequences,
        })
    }

    pub fn user_ix(&self, u: &UserId) -> Option<usize> {
        self.user_index.get(u).copied()
    }

    pub fn poi_ix(&self, p: &PoiId) -> Option<usize> {
        self.poi_index.get(p).copied()
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_pois(&self) -> usize {
        self.pois.len()
    }

    /// Locations of the user's train check-ins, one per check-in.
    pub fn visit_locations(&self, user: usize) -> Vec<LatLon> {
        self.matrix
            .row(user)
            .iter()
            .flat_map(|&(p, n)| std::iter::repeat_n(self.coords[p as usize], n as usize))
            .collect()
    }

    /// Cosine similarity of two users' binary rows.
    pub fn cosine(&self, a: usize, b: usize) -> f64 {
        let (ra, rb) = (self.matrix.row(a), self.matrix.row(b));
        if ra.is_empty() || rb.is_empty() {
            return 0.0;
        }
        let (mut i, mut j, mut common) = (0, 0, 0usize);
        while i < ra.len() && j < rb.len() {
            match ra[i].0.cmp(&rb[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        common as f64 / ((ra.len() * rb.len()) as f64).sqrt()
    }
}
