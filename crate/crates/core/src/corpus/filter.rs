use std::collections::{BTreeSet, HashMap, HashSet};

use super::Dataset;
use crate::error::{Error, Result};
use crate::ids::{PoiId, UserId};

/// Removes POIs with fewer than `min_users_per_poi` distinct visitors and
/// users with fewer than `min_pois_per_user` distinct POIs, alternating the
/// two passes until neither removes anything.
pub fn filter_sparse(
    d: &Dataset,
    min_users_per_poi: usize,
    min_pois_per_user: usize,
) -> Result<Dataset> {
    let mut checkins = d.checkins.clone();
    loop {
        let mut visitors: HashMap<&PoiId, HashSet<&UserId>> = HashMap::new();
        for c in &checkins {
            visitors.entry(&c.poi).or_default().insert(&c.user);
        }
        let keep_pois: HashSet<PoiId> = visitors
            .into_iter()
            .filter(|(_, v)| v.len() >= min_users_per_poi)
            .map(|(p, _)| p.clone())
            .collect();
        let before = checkins.len();
        checkins.retain(|c| keep_pois.contains(&c.poi));

        let mut visited: HashMap<&UserId, HashSet<&PoiId>> = HashMap::new();
        for c in &checkins {
            visited.entry(&c.user).or_default().insert(&c.poi);
        }
        let keep_users: HashSet<UserId> = visited
            .into_iter()
            .filter(|(_, v)| v.len() >= min_pois_per_user)
            .map(|(u, _)| u.clone())
            .collect();
        checkins.retain(|c| keep_users.contains(&c.user));

        if checkins.len() == before {
            break;
        }
    }

    if checkins.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no check-ins survive min_users_per_poi={min_users_per_poi}, \
             min_pois_per_user={min_pois_per_user}"
        )));
    }

    let users: BTreeSet<UserId> = checkins.iter().map(|c| c.user.clone()).collect();
    let poi_ids: HashSet<&PoiId> = checkins.iter().map(|c| &c.poi).collect();
    let pois = d
        .pois
        .iter()
        .filter(|(id, _)| poi_ids.contains(id))
        .map(|(id, p)| (id.clone(), p.clone()))
        .collect();
    let mut social = d.social.clone();
    social.retain_users(|u| users.contains(u));
    Ok(Dataset {
        users,
        pois,
        checkins,
        social,
    })
}

/// [`filter_sparse`] with both thresholds at 10.
pub fn filter_sparse_default(d: &Dataset) -> Result<Dataset> {
    filter_sparse(d, 10, 10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CheckIn, Poi};

    fn grid(n_users: usize, n_pois: usize) -> Dataset {
        let mut d = Dataset::default();
        for p in 0..n_pois {
            let id = format!("p{p:03}");
            d.pois
                .insert(id.as_str().into(), Poi::new(id.as_str(), 0.0, 0.0));
        }
        for u in 0..n_users {
            let uid = format!("u{u:03}");
            d.users.insert(uid.as_str().into());
            for p in 0..n_pois {
                d.checkins.push(CheckIn::new(
                    uid.as_str(),
                    format!("p{p:03}"),
                    (u * 100 + p) as i64,
                ));
            }
        }
        d
    }

    /// Brute force: remove one violating entity at a time, recounting from
    /// scratch after each removal.
    fn oracle(d: &Dataset, min_u: usize, min_p: usize) -> BTreeSet<(String, String, i64)> {
        let mut rows: Vec<(String, String, i64)> = d
            .checkins
            .iter()
            .map(|c| (c.user.0.clone(), c.poi.0.clone(), c.timestamp))
            .collect();
        loop {
            let pois: BTreeSet<String> = rows.iter().map(|r| r.1.clone()).collect();
            let bad_poi = pois.into_iter().find(|p| {
                rows.iter()
                    .filter(|r| &r.1 == p)
                    .map(|r| r.0.clone())
                    .collect::<BTreeSet<_>>()
                    .len()
                    < min_u
            });
            if let Some(p) = bad_poi {
                rows.retain(|r| r.1 != p);
                continue;
            }
            let users: BTreeSet<String> = rows.iter().map(|r| r.0.clone()).collect();
            let bad_user = users.into_iter().find(|u| {
                rows.iter()
                    .filter(|r| &r.0 == u)
                    .map(|r| r.1.clone())
                    .collect::<BTreeSet<_>>()
                    .len()
                    < min_p
            });
            match bad_user {
                Some(u) => rows.retain(|r| r.0 != u),
                None => break,
            }
        }
        rows.into_iter().collect()
    }

    #[test]
    fn dense_dataset_is_a_fixpoint() {
        let d = grid(12, 15);
        let f = filter_sparse_default(&d).unwrap();
        assert_eq!(f, d);
    }

    #[test]
    fn single_user_single_poi_is_fully_filtered() {
        let mut d = Dataset::default();
        d.users.insert("u".into());
        d.pois.insert("p".into(), Poi::new("p", 0.0, 0.0));
        for t in 0..20 {
            d.checkins.push(CheckIn::new("u", "p", t));
        }
        assert!(matches!(
            filter_sparse_default(&d),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn sparse_pois_removed_then_users_rechecked() {
        // 50 users x 25 dense POIs, plus 5 POIs with 3 visitors each.
        let mut d = grid(50, 25);
        for p in 0..5 {
            let id = format!("sparse{p}");
            d.pois
                .insert(id.as_str().into(), Poi::new(id.as_str(), 1.0, 1.0));
            for u in 0..3 {
                d.checkins
                    .push(CheckIn::new(format!("u{:03}", u + p), id.as_str(), 9_000));
            }
        }
        // A user who only visits 9 dense POIs plus one sparse POI: after the
        // sparse POIs go, they fall below 10 and must go too.
        d.users.insert("lonely".into());
        for p in 0..9 {
            d.checkins
                .push(CheckIn::new("lonely", format!("p{p:03}"), 1));
        }
        d.checkins.push(CheckIn::new("lonely", "sparse0", 2));

        let f = filter_sparse_default(&d).unwrap();
        let got: BTreeSet<_> = f
            .checkins
            .iter()
            .map(|c| (c.user.0.clone(), c.poi.0.clone(), c.timestamp))
            .collect();
        assert_eq!(got, oracle(&d, 10, 10));
        assert_eq!(f.num_pois(), 25);
        assert!(!f.users.contains(&UserId::from("lonely")));
        assert_eq!(f.num_users(), 50);
    }

    #[test]
    fn idempotent() {
        let mut d = grid(15, 12);
        d.checkins
            .retain(|c| !(c.user.0 == "u000" && c.poi.as_str() < "p005"));
        let once = filter_sparse_default(&d).unwrap();
        let twice = filter_sparse_default(&once).unwrap();
        assert_eq!(once, twice);
    }
}
