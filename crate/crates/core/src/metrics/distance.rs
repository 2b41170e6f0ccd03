use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geo::{centroid, LatLon};
use crate::ids::{PoiId, UserId};
use crate::recommenders::RecommendationList;

/// Mean latitude and mean longitude of the visited locations.
pub fn user_centroid(user: &UserId, visits: &[LatLon]) -> Result<LatLon> {
    let Some((c, wide)) = centroid(visits) else {
        return Err(Error::DegenerateInput(format!(
            "user {user} has no train visits"
        )));
    };
    if wide {
        log::warn!(
            "visits of user {user} span more than 180 degrees of longitude; centroid is unreliable"
        );
    }
    Ok(c)
}

/// Median of a non-empty slice; the mean of the middle pair for even length.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

/// Mean over users of the median distance from the user's centroid to each
/// recommended POI. Empty lists are skipped; `None` when every list is empty.
pub fn mean_median_distance<'a>(
    lists: impl IntoIterator<Item = &'a RecommendationList>,
    centroids: &BTreeMap<UserId, LatLon>,
    coords: &BTreeMap<PoiId, LatLon>,
) -> Result<Option<f64>> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for list in lists {
        if list.items.is_empty() {
            continue;
        }
        let c = centroids
            .get(&list.user)
            .ok_or_else(|| Error::unknown("user", &list.user))?;
        let mut d = list
            .poi_ids()
            .map(|p| {
                coords
                    .get(p)
                    .map(|loc| c.haversine_km(loc))
                    .ok_or_else(|| Error::unknown("POI", p))
            })
            .collect::<Result<Vec<f64>>>()?;
        sum += median(&mut d).unwrap();
        n += 1;
    }
    Ok((n > 0).then(|| sum / n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    const KM_PER_DEG: f64 = crate::geo::EARTH_RADIUS_KM * std::f64::consts::PI / 180.0;

    fn fixture(
        offsets_km: &[f64],
    ) -> (
        Vec<RecommendationList>,
        BTreeMap<UserId, LatLon>,
        BTreeMap<PoiId, LatLon>,
    ) {
        let mut coords = BTreeMap::new();
        let mut items = Vec::new();
        for (i, d) in offsets_km.iter().enumerate() {
            let id = PoiId::new(format!("p{i}"));
            coords.insert(id.clone(), LatLon::new(0.0, d / KM_PER_DEG));
            items.push((id, 0.0));
        }
        let lists = vec![RecommendationList {
            user: "u".into(),
            k: items.len(),
            items,
        }];
        let centroids = [(UserId::from("u"), LatLon::new(0.0, 0.0))].into();
        (lists, centroids, coords)
    }

    #[test]
    fn recommendations_at_the_centroid() {
        let (l, c, p) = fixture(&[0.0, 0.0, 0.0]);
        assert_eq!(mean_median_distance(&l, &c, &p).unwrap(), Some(0.0));
    }

    #[test]
    fn one_degree_east_of_origin() {
        let (l, c, mut p) = fixture(&[0.0]);
        p.insert("p0".into(), LatLon::new(0.0, 1.0));
        let d = mean_median_distance(&l, &c, &p).unwrap().unwrap();
        assert!((d - 111.195).abs() < 0.01);
    }

    #[test]
    fn median_ignores_the_outlier() {
        let (l, c, p) = fixture(&[1.0, 2.0, 3.0, 4.0, 100.0]);
        let d = mean_median_distance(&l, &c, &p).unwrap().unwrap();
        assert!((d - 3.0).abs() < 1e-9);
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), Some(2.5));
    }

    #[test]
    fn centroid_is_the_coordinate_mean() {
        let c =
            user_centroid(&"u".into(), &[LatLon::new(1.0, 2.0), LatLon::new(3.0, 6.0)]).unwrap();
        assert_eq!(c, LatLon::new(2.0, 4.0));
        assert!(user_centroid(&"u".into(), &[]).is_err());
    }
}
