use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use super::*;
use crate::corpus::{
    chronological_split, generate_synthetic, CheckIn, Poi, SplitFractions, SyntheticConfig,
};
use crate::geo::LatLon;

fn small_synthetic(n_users: usize, n_pois: usize, seed: u64) -> Dataset {
    let cfg = SyntheticConfig {
        n_users,
        n_pois,
        rng_seed: seed,
        min_poi_checkins: 3,
        mean_checkins_per_user: 15.0,
        social_edge_probability: 0.2,
        ..Default::default()
    };
    let d = generate_synthetic(&cfg).unwrap();
    chronological_split(&d, SplitFractions::default())
        .unwrap()
        .train
}

fn popularity_fixture() -> Dataset {
    let mut d = Dataset::default();
    for p in ["a", "b", "c", "seen"] {
        d.pois.insert(p.into(), Poi::new(p, 0.0, 0.0));
    }
    d.users.insert("me".into());
    d.users.insert("other".into());
    d.checkins.push(CheckIn::new("me", "seen", 0));
    for t in 0..10 {
        d.checkins.push(CheckIn::new("other", "a", t));
    }
    for t in 0..5 {
        d.checkins.push(CheckIn::new("other", "b", t));
    }
    d
}

#[test]
fn popularity_min_max_endpoints() {
    let d = popularity_fixture();
    let m = train(
        ModelKind::Popularity,
        &d,
        &d.social,
        &ModelParams::default(),
    )
    .unwrap();
    let s = m.score_candidates(&"me".into()).unwrap();
    let got: Vec<(&str, f64)> = s.entries.iter().map(|(p, v)| (p.as_str(), *v)).collect();
    assert_eq!(got, vec![("a", 1.0), ("b", 0.5), ("c", 0.0)]);
}

#[test]
fn constant_scores_map_to_half() {
    let mut v = vec![3.0; 4];
    min_max_normalize(&mut v);
    assert_eq!(v, vec![0.5; 4]);
    let mut d = popularity_fixture();
    d.checkins.retain(|c| c.user.as_str() == "me");
    let m = train(
        ModelKind::Popularity,
        &d,
        &d.social,
        &ModelParams::default(),
    )
    .unwrap();
    let s = m.score_candidates(&"me".into()).unwrap();
    assert!(s.entries.iter().all(|(_, v)| *v == 0.5));
}

#[test]
fn user_who_visited_everything_has_no_candidates() {
    let mut d = popularity_fixture();
    for p in ["a", "b", "c"] {
        d.checkins.push(CheckIn::new("me", p, 99));
    }
    let m = train(
        ModelKind::Popularity,
        &d,
        &d.social,
        &ModelParams::default(),
    )
    .unwrap();
    let s = m.score_candidates(&"me".into()).unwrap();
    assert!(s.entries.is_empty());
    let list = top_k(&s, 10).unwrap();
    assert!(list.items.is_empty() && list.is_short());
}

#[test]
fn unknown_user_is_an_error() {
    let d = popularity_fixture();
    let m = train(
        ModelKind::Popularity,
        &d,
        &d.social,
        &ModelParams::default(),
    )
    .unwrap();
    assert!(matches!(
        m.score_candidates(&"nobody".into()),
        Err(Error::UnknownEntity { .. })
    ));
}

#[test]
fn geosoca_requires_categories() {
    let d = popularity_fixture();
    let err = train(ModelKind::GeoSoCa, &d, &d.social, &ModelParams::default()).unwrap_err();
    assert!(matches!(err, Error::Capability(_)));
    let relaxed = ModelParams {
        require_categories: false,
        ..Default::default()
    };
    train(ModelKind::GeoSoCa, &d, &d.social, &relaxed).unwrap();
}

#[test]
fn validation_checkins_are_refused() {
    let cfg = SyntheticConfig {
        n_users: 15,
        n_pois: 20,
        min_poi_checkins: 3,
        ..Default::default()
    };
    let split = chronological_split(
        &generate_synthetic(&cfg).unwrap(),
        SplitFractions::default(),
    )
    .unwrap();
    let err = train(
        ModelKind::Popularity,
        &split.validation,
        &split.train.social,
        &ModelParams::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::Leakage(_)));
}

/// Binary-matrix user CF computed straight from the dataset.
fn brute_force_cf(d: &Dataset, user: &UserId) -> BTreeMap<PoiId, f64> {
    let visited = d.visited_by_user();
    let mine = &visited[user];
    let mut num: BTreeMap<PoiId, f64> = d.pois.keys().map(|p| (p.clone(), 0.0)).collect();
    let mut den = 0.0;
    for (v, theirs) in &visited {
        if v == user {
            continue;
        }
        let common = mine.intersection(theirs).count() as f64;
        let sim = common / ((mine.len() * theirs.len()) as f64).sqrt();
        if sim > 0.0 {
            den += sim;
            for p in theirs {
                *num.get_mut(p).unwrap() += sim;
            }
        }
    }
    num.into_iter()
        .map(|(p, v)| (p, if den > 0.0 { v / den } else { 0.0 }))
        .collect()
}

#[test]
fn usg_without_social_and_geo_is_plain_cf() {
    let d = small_synthetic(25, 40, 3);
    let params = ModelParams {
        social_weight: 0.0,
        geo_weight: 0.0,
        ..Default::default()
    };
    let m = train(ModelKind::Usg, &d, &d.social, &params).unwrap();
    let visited = d.visited_by_user();
    for user in d.users.iter().take(8) {
        let cf = brute_force_cf(&d, user);
        let mut expected: Vec<(PoiId, f64)> = cf
            .into_iter()
            .filter(|(p, _)| !visited[user].contains(p))
            .collect();
        let mut vals: Vec<f64> = expected.iter().map(|e| e.1).collect();
        min_max_normalize(&mut vals);
        for (e, v) in expected.iter_mut().zip(vals) {
            e.1 = v;
        }
        let got = m.score_candidates(user).unwrap();
        assert_eq!(got.entries.len(), expected.len());
        for ((gp, gv), (ep, ev)) in got.entries.iter().zip(&expected) {
            assert_eq!(gp, ep);
            assert!((gv - ev).abs() < 1e-12, "{user} {gp}: {gv} vs {ev}");
        }
        let full = top_k(&got, got.entries.len()).unwrap();
        let oracle = top_k(
            &ScoredCandidates {
                user: user.clone(),
                entries: expected,
            },
            got.entries.len(),
        )
        .unwrap();
        assert_eq!(
            full.poi_ids().collect::<Vec<_>>(),
            oracle.poi_ids().collect::<Vec<_>>()
        );
    }
}

/// GeoSoCa components recomputed from the raw dataset.
fn geosoca_oracle(d: &Dataset, user: &UserId, bandwidth: f64) -> BTreeMap<PoiId, (f64, f64, f64)> {
    let mine: Vec<&CheckIn> = d.checkins.iter().filter(|c| &c.user == user).collect();
    let locs: Vec<LatLon> = mine.iter().map(|c| d.pois[&c.poi].location()).collect();

    let friends: BTreeSet<&UserId> = d
        .social
        .edges()
        .filter_map(|(a, b)| {
            if a == user {
                Some(b)
            } else if b == user {
                Some(a)
            } else {
                None
            }
        })
        .collect();
    let mut friend_counts: BTreeMap<&PoiId, f64> = BTreeMap::new();
    for c in &d.checkins {
        if friends.contains(&c.user) {
            *friend_counts.entry(&c.poi).or_default() += 1.0;
        }
    }
    let max_friend = d
        .pois
        .keys()
        .map(|p| friend_counts.get(p).copied().unwrap_or(0.0) + 1.0)
        .fold(0.0, f64::max);

    let cats: BTreeSet<&str> = d
        .pois
        .values()
        .filter_map(|p| p.category.as_deref())
        .collect();
    let k = cats.len() as f64;
    let cat_of = |p: &PoiId| d.pois[p].category.as_deref().unwrap();
    let user_total = mine.len() as f64;
    let global_total = d.checkins.len() as f64;
    let cat_score = |cat: &str| {
        let uc = mine.iter().filter(|c| cat_of(&c.poi) == cat).count() as f64;
        let gc = d.checkins.iter().filter(|c| cat_of(&c.poi) == cat).count() as f64;
        ((uc + 1.0) / (user_total + k)) * ((gc + 1.0) / (global_total + k))
    };
    let max_cat = cats.iter().map(|c| cat_score(c)).fold(0.0, f64::max);

    d.pois
        .iter()
        .map(|(id, poi)| {
            let here = poi.location();
            let g = locs
                .iter()
                .map(|l| (-(here.haversine_km(l) / bandwidth).powi(2) / 2.0).exp())
                .sum::<f64>()
                / locs.len() as f64;
            let s = (friend_counts.get(id).copied().unwrap_or(0.0) + 1.0) / max_friend;
            let c = cat_score(cat_of(id)) / max_cat;
            (id.clone(), (g, s, c))
        })
        .collect()
}

#[test]
fn geosoca_is_the_product_of_three_unit_components() {
    let d = small_synthetic(20, 30, 11);
    let m = train(ModelKind::GeoSoCa, &d, &d.social, &ModelParams::default()).unwrap();
    let Fitted::GeoSoCa { bandwidths_km } = m.fitted() else {
        panic!("wrong fitted kind");
    };
    let ctx = m.context();
    for user in d.users.iter().take(6) {
        let u = ctx.user_ix(user).unwrap();
        let oracle = geosoca_oracle(&d, user, bandwidths_km[u]);
        let raw = m.raw_scores(u);
        for (p, (g, s, c)) in &oracle {
            for x in [g, s, c] {
                assert!((0.0..=1.0).contains(x));
            }
            let expected = g.max(PROBABILITY_FLOOR) * s * c;
            let got = raw[ctx.poi_ix(p).unwrap()];
            assert!(
                (got - expected).abs() <= 1e-12 * expected.max(1.0),
                "{user} {p}: {got} vs {expected}"
            );
        }
    }
}

#[test]
fn every_model_scores_within_unit_interval() {
    let d = small_synthetic(20, 30, 5);
    for kind in ModelKind::ALL {
        let m = train(kind, &d, &d.social, &ModelParams::default()).unwrap();
        let visited = d.visited_by_user();
        for user in &d.users {
            let s = m.score_candidates(user).unwrap();
            for (p, v) in &s.entries {
                assert!((0.0..=1.0).contains(v), "{kind} {user} {p} {v}");
                assert!(!visited.get(user).is_some_and(|set| set.contains(p)));
            }
            // deterministic
            assert_eq!(s, m.score_candidates(user).unwrap());
        }
    }
}

#[test]
fn top_k_examples() {
    let s = |v: &[(&str, f64)]| ScoredCandidates {
        user: "u".into(),
        entries: v.iter().map(|(p, x)| (PoiId::from(*p), *x)).collect(),
    };
    let l = top_k(&s(&[("A", 0.9), ("B", 0.8)]), 1).unwrap();
    assert_eq!(l.poi_ids().map(PoiId::as_str).collect::<Vec<_>>(), ["A"]);
    let l = top_k(&s(&[("C", 0.4), ("B", 0.5), ("A", 0.5)]), 2).unwrap();
    assert_eq!(
        l.poi_ids().map(PoiId::as_str).collect::<Vec<_>>(),
        ["A", "B"]
    );
    assert!(!l.is_short());
    let l = top_k(&s(&[("A", 0.1)]), 3).unwrap();
    assert!(l.is_short());
    assert!(top_k(&s(&[("A", 0.1)]), 0).is_err());
}

fn sorted_oracle(entries: &[(PoiId, f64)]) -> Vec<PoiId> {
    let mut v = entries.to_vec();
    v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    v.into_iter().map(|e| e.0).collect()
}

#[test]
fn top_ten_of_five_hundred_matches_full_sort() {
    let mut rng = crate::rng::SeededRng::new(9);
    let entries: Vec<(PoiId, f64)> = (0..500)
        .map(|i| {
            (
                PoiId::new(format!("p{i:03}")),
                (rng.below(50) as f64) / 49.0,
            )
        })
        .collect();
    let s = ScoredCandidates {
        user: "u".into(),
        entries: entries.clone(),
    };
    let got: Vec<PoiId> = top_k(&s, 10).unwrap().poi_ids().cloned().collect();
    assert_eq!(got, sorted_oracle(&entries)[..10]);
}

proptest! {
    #[test]
    fn top_k_is_a_prefix_of_the_full_order(
        scores in proptest::collection::vec(0u8..20, 1..60),
        k in 1usize..70,
    ) {
        let entries: Vec<(PoiId, f64)> = scores
            .iter()
            .enumerate()
            .map(|(i, s)| (PoiId::new(format!("p{i:02}")), *s as f64 / 19.0))
            .collect();
        let s = ScoredCandidates { user: "u".into(), entries: entries.clone() };
        let got: Vec<PoiId> = top_k(&s, k).unwrap().poi_ids().cloned().collect();
        let full = sorted_oracle(&entries);
        prop_assert_eq!(&got[..], &full[..k.min(full.len())]);
    }

    #[test]
    fn min_max_preserves_argmax(values in proptest::collection::vec(-1e3f64..1e3, 2..40)) {
        let mut norm = values.clone();
        min_max_normalize(&mut norm);
        prop_assert!(norm.iter().all(|v| (0.0..=1.0).contains(v)));
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            for (v, n) in values.iter().zip(&norm) {
                if *v == hi {
                    prop_assert_eq!(*n, 1.0);
                }
            }
            for i in 0..values.len() {
                for j in 0..values.len() {
                    if values[i] < values[j] {
                        prop_assert!(norm[i] <= norm[j]);
                    }
                }
            }
        }
    }
}
