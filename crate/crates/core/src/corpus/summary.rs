use serde::{Deserialize, Serialize};

use super::{Dataset, GroupAssignment, ItemGroup, UserGroup};

/// Corpus statistics. The JSON form and the `key=value` form share keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub users: usize,
    pub pois: usize,
    pub checkins: usize,
    /// `checkins / (users * pois)`.
    pub sparsity: f64,
    pub social_edges: usize,
    pub active_users: usize,
    pub inactive_users: usize,
    pub short_head_pois: usize,
    pub long_tail_pois: usize,
    pub checkins_active: usize,
    pub checkins_inactive: usize,
    pub checkins_short_head: usize,
    pub checkins_long_tail: usize,
}

impl StatsSummary {
    pub fn to_key_value(&self) -> String {
        let value = serde_json::to_value(self).expect("summary serializes");
        let obj = value.as_object().expect("summary is an object");
        // struct field order, not map order
        let keys = [
            "users",
            "pois",
            "checkins",
            "sparsity",
            "social_edges",
            "active_users",
            "inactive_users",
            "short_head_pois",
            "long_tail_pois",
            "checkins_active",
            "checkins_inactive",
            "checkins_short_head",
            "checkins_long_tail",
        ];
        let mut out = String::new();
        for k in keys {
            out.push_str(k);
            out.push('=');
            out.push_str(&obj[k].to_string());
            out.push('\n');
        }
        out
    }
}

pub fn dataset_stats(d: &Dataset, g: &GroupAssignment) -> StatsSummary {
    let cells = d.num_users() as f64 * d.num_pois() as f64;
    let mut s = StatsSummary {
        users: d.num_users(),
        pois: d.num_pois(),
        checkins: d.num_checkins(),
        sparsity: if cells > 0.0 {
            d.num_checkins() as f64 / cells
        } else {
            0.0
        },
        social_edges: d.social.len(),
        active_users: g.user_group_size(UserGroup::Active),
        inactive_users: g.user_group_size(UserGroup::Inactive),
        short_head_pois: g.item_group_size(ItemGroup::ShortHead),
        long_tail_pois: g.item_group_size(ItemGroup::LongTail),
        checkins_active: 0,
        checkins_inactive: 0,
        checkins_short_head: 0,
        checkins_long_tail: 0,
    };
    for c in &d.checkins {
        match g.user(&c.user) {
            Some(UserGroup::Active) => s.checkins_active += 1,
            Some(UserGroup::Inactive) => s.checkins_inactive += 1,
            None => {}
        }
        match g.item(&c.poi) {
            Some(ItemGroup::ShortHead) => s.checkins_short_head += 1,
            Some(ItemGroup::LongTail) => s.checkins_long_tail += 1,
            None => {}
        }
    }
    s
}
