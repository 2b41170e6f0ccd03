use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::ids::{PoiId, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum UserGroup {
    Active,
    Inactive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ItemGroup {
    ShortHead,
    LongTail,
}

impl UserGroup {
    pub const ALL: [UserGroup; 2] = [UserGroup::Active, UserGroup::Inactive];
}

impl ItemGroup {
    pub const ALL: [ItemGroup; 2] = [ItemGroup::ShortHead, ItemGroup::LongTail];
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupAssignment {
    pub user_group: BTreeMap<UserId, UserGroup>,
    pub item_group: BTreeMap<PoiId, ItemGroup>,
}

impl GroupAssignment {
    pub fn user(&self, u: &UserId) -> Option<UserGroup> {
        self.user_group.get(u).copied()
    }

    pub fn item(&self, p: &PoiId) -> Option<ItemGroup> {
        self.item_group.get(p).copied()
    }

    pub fn is_active(&self, u: &UserId) -> bool {
        self.user(u) == Some(UserGroup::Active)
    }

    pub fn users_in(&self, g: UserGroup) -> impl Iterator<Item = &UserId> {
        self.user_group
            .iter()
            .filter(move |(_, v)| **v == g)
            .map(|(k, _)| k)
    }

    pub fn items_in(&self, g: ItemGroup) -> impl Iterator<Item = &PoiId> {
        self.item_group
            .iter()
            .filter(move |(_, v)| **v == g)
            .map(|(k, _)| k)
    }

    pub fn user_group_size(&self, g: UserGroup) -> usize {
        self.users_in(g).count()
    }

    pub fn item_group_size(&self, g: ItemGroup) -> usize {
        self.items_in(g).count()
    }
}

/// `ceil(n / 5)` without floating point.
pub(crate) fn top_fifth(n: usize) -> usize {
    n.div_ceil(5)
}

/// Orders ids by count descending then id ascending and returns them.
fn rank_by_count<'a, K: Ord + 'a>(
    ids: impl Iterator<Item = &'a K>,
    count: impl Fn(&K) -> u64,
) -> Vec<&'a K> {
    let mut v: Vec<(&K, u64)> = ids.map(|k| (k, count(k))).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    v.into_iter().map(|(k, _)| k).collect()
}

/// Top 20% of users by train check-ins are active; top 20% of POIs by
/// train check-ins are short-head. Ties go to the smaller id.
pub fn assign_groups(train: &Dataset) -> Result<GroupAssignment> {
    if train.checkins.is_empty() || train.users.is_empty() || train.pois.is_empty() {
        return Err(Error::EmptyDataset("training split is empty".into()));
    }
    let user_counts = train.user_checkin_counts();
    let poi_counts = train.poi_checkin_counts();

    let ranked_users = rank_by_count(train.users.iter(), |u| {
        user_counts.get(u).copied().unwrap_or(0)
    });
    let n_active = top_fifth(ranked_users.len());
    let user_group = ranked_users
        .into_iter()
        .enumerate()
        .map(|(i, u)| {
            let g = if i < n_active {
                UserGroup::Active
            } else {
                UserGroup::Inactive
            };
            (u.clone(), g)
        })
        .collect();

    let ranked_pois = rank_by_count(train.pois.keys(), |p| {
        poi_counts.get(p).copied().unwrap_or(0)
    });
    let n_head = top_fifth(ranked_pois.len());
    let item_group = ranked_pois
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let g = if i < n_head {
                ItemGroup::ShortHead
            } else {
                ItemGroup::LongTail
            };
            (p.clone(), g)
        })
        .collect();

    Ok(GroupAssignment {
        user_group,
        item_group,
    })
}
