//! Computes precision, group exposure, GCE and distance on hand-built
//! recommendation lists.

use std::collections::{BTreeMap, BTreeSet};

use fairpoi::corpus::{GroupAssignment, ItemGroup, UserGroup};
use fairpoi::geo::LatLon;
use fairpoi::metrics::{
    exposure_table, gce, group_mean_exposure, item_gain_distribution, mean_median_distance,
    mean_precision, user_gain_distribution, FairDistribution, MetricDistribution, PrecisionMode,
    DEFAULT_GCE_ORDER,
};
use fairpoi::recommenders::RecommendationList;
use fairpoi::{PoiId, UserId};

fn list(user: &str, pois: &[&str]) -> RecommendationList {
    RecommendationList {
        user: UserId::new(user),
        k: pois.len(),
        items: pois.iter().map(|p| (PoiId::new(*p), 1.0)).collect(),
    }
}

fn main() -> fairpoi::Result<()> {
    let lists = vec![
        list("u1", &["a", "b"]),
        list("u2", &["a", "c"]),
        list("u3", &["b", "d"]),
    ];
    let mut groups = GroupAssignment::default();
    groups
        .user_group
        .insert(UserId::new("u1"), UserGroup::Active);
    groups
        .user_group
        .insert(UserId::new("u2"), UserGroup::Inactive);
    groups
        .user_group
        .insert(UserId::new("u3"), UserGroup::Inactive);
    for (p, g) in [
        ("a", ItemGroup::ShortHead),
        ("b", ItemGroup::LongTail),
        ("c", ItemGroup::LongTail),
        ("d", ItemGroup::LongTail),
    ] {
        groups.item_group.insert(PoiId::new(p), g);
    }
    let test: BTreeMap<UserId, BTreeSet<PoiId>> = [("u1", "a"), ("u2", "c"), ("u3", "x")]
        .iter()
        .map(|(u, p)| (UserId::new(*u), BTreeSet::from([PoiId::new(*p)])))
        .collect();

    let p = mean_precision(&lists, &test, 2, PrecisionMode::Standard)?;
    println!("precision@2 = {:?}", p);

    let table = exposure_table(&lists);
    println!(
        "exposure total {} (users x k = {}), short-head mean {:.3}, long-tail mean {:.3}",
        table.total(),
        lists.len() * 2,
        group_mean_exposure(&table, &groups, ItemGroup::ShortHead)?,
        group_mean_exposure(&table, &groups, ItemGroup::LongTail)?
    );

    let fair = FairDistribution::uniform(2);
    let users = user_gain_distribution(&lists, &test, &groups)?;
    let items = item_gain_distribution(&lists, &groups)?;
    println!(
        "user gain {:?} -> GCE {}",
        users.mass,
        gce(&users, &fair, DEFAULT_GCE_ORDER)?
    );
    println!(
        "item gain {:?} -> GCE {}",
        items.mass,
        gce(&items, &fair, DEFAULT_GCE_ORDER)?
    );
    let skewed = MetricDistribution::from_totals(vec!["a".into(), "b".into()], vec![0.8, 0.2])?;
    println!(
        "GCE of (0.8, 0.2) against uniform: {}",
        gce(&skewed, &fair, 2.0)?
    );

    let coords: BTreeMap<PoiId, LatLon> = [("a", 0.0), ("b", 0.01), ("c", 0.02), ("d", 0.05)]
        .iter()
        .map(|(p, d)| (PoiId::new(*p), LatLon::new(40.0 + d, -74.0)))
        .collect();
    let centroids: BTreeMap<UserId, LatLon> = ["u1", "u2", "u3"]
        .iter()
        .map(|u| (UserId::new(*u), LatLon::new(40.0, -74.0)))
        .collect();
    println!(
        "mean median distance {:.3} km",
        mean_median_distance(&lists, &centroids, &coords)?.unwrap_or(f64::NAN)
    );
    Ok(())
}
