//! Seeded synthetic check-in corpora.
//!
//! POIs are scattered around `n_geo_clusters` centres. Each POI draws its
//! check-in count from a truncated discrete power law `P(c) ∝ c^exponent`
//! on `[min_poi_checkins, c_max]`, where `c_max` is the smallest cap whose
//! expected total reaches `n_users * mean_checkins_per_user`. The visits of
//! a POI are then handed to users with weights proportional to an activity
//! level times a distance decay from the user's home, so realized POI
//! counts follow the power law exactly and users visit mostly nearby POIs.

use serde::{Deserialize, Serialize};

use super::{CheckIn, Dataset, Poi};
use crate::error::{Error, Result};
use crate::geo::LatLon;
use crate::ids::UserId;
use crate::rng::SeededRng;

const KM_PER_DEGREE: f64 = 111.195;
const BASE_TIMESTAMP: i64 = 1_262_304_000; // 2010-01-01T00:00:00Z
const TIME_SPAN_SECS: i64 = 365 * 86_400;
const MAX_POPULARITY_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n_users: usize,
    pub n_pois: usize,
    /// Exponent of the POI popularity histogram; must be negative.
    pub power_law_exponent: f64,
    pub n_geo_clusters: usize,
    pub mean_checkins_per_user: f64,
    pub social_edge_probability: f64,
    pub rng_seed: u64,
    pub n_categories: usize,
    /// POIs never fall farther than this from their cluster centre.
    pub cluster_radius_km: f64,
    /// Side of the square the cluster centres are drawn from.
    pub region_km: f64,
    pub min_poi_checkins: u64,
    /// Distance decay scale for user-to-POI visit weights.
    pub locality_km: f64,
    pub center_lat: f64,
    pub center_lon: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_users: 200,
            n_pois: 500,
            power_law_exponent: -1.5,
            n_geo_clusters: 5,
            mean_checkins_per_user: 108.0,
            social_edge_probability: 0.03,
            rng_seed: 42,
            n_categories: 8,
            cluster_radius_km: 6.0,
            region_km: 40.0,
            min_poi_checkins: 12,
            locality_km: 8.0,
            center_lat: 40.75,
            center_lon: -73.98,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("synthetic config: {m}")));
        if self.n_users == 0 || self.n_pois == 0 || self.n_geo_clusters == 0 {
            return bad("n_users, n_pois and n_geo_clusters must be at least 1");
        }
        if self.n_categories == 0 {
            return bad("n_categories must be at least 1");
        }
        if !(self.power_law_exponent < 0.0) {
            return bad("power_law_exponent must be negative");
        }
        if !(self.mean_checkins_per_user >= 1.0) {
            return bad("mean_checkins_per_user must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.social_edge_probability) {
            return bad("social_edge_probability must lie in [0, 1]");
        }
        if self.min_poi_checkins == 0 {
            return bad("min_poi_checkins must be at least 1");
        }
        for (name, v) in [
            ("cluster_radius_km", self.cluster_radius_km),
            ("region_km", self.region_km),
            ("locality_km", self.locality_km),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive"));
            }
        }
        if !(-80.0..=80.0).contains(&self.center_lat) {
            return bad("center_lat must lie within [-80, 80]");
        }
        Ok(())
    }
}

/// Truncated discrete power law on `[lo, hi]` sampled by inverse CDF.
struct DiscretePowerLaw {
    lo: u64,
    cdf: Vec<f64>,
}

impl DiscretePowerLaw {
    fn new(exponent: f64, lo: u64, hi: u64) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = (lo..=hi)
            .map(|c| {
                acc += (c as f64).powf(exponent);
                acc
            })
            .collect();
        let total = acc;
        for v in &mut cdf {
            *v /= total;
        }
        Self { lo, cdf }
    }

    fn mean(exponent: f64, lo: u64, hi: u64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for c in lo..=hi {
            let w = (c as f64).powf(exponent);
            num += c as f64 * w;
            den += w;
        }
        num / den
    }

    fn sample(&self, rng: &mut SeededRng) -> u64 {
        let u = rng.uniform();
        let idx = self
            .cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1);
        self.lo + idx as u64
    }
}

/// Smallest cap whose truncated mean reaches `target`.
fn popularity_cap(exponent: f64, lo: u64, target: f64) -> u64 {
    if DiscretePowerLaw::mean(exponent, lo, lo) >= target {
        return lo;
    }
    let (mut a, mut b) = (lo, MAX_POPULARITY_CAP);
    if DiscretePowerLaw::mean(exponent, lo, b) < target {
        return b;
    }
    while b - a > 1 {
        let mid = a + (b - a) / 2;
        if DiscretePowerLaw::mean(exponent, lo, mid) >= target {
            b = mid;
        } else {
            a = mid;
        }
    }
    b
}

fn offset(center: LatLon, north_km: f64, east_km: f64) -> LatLon {
    let lat = center.lat + north_km / KM_PER_DEGREE;
    let lon = center.lon + east_km / (KM_PER_DEGREE * center.lat.to_radians().cos());
    LatLon::new(lat.clamp(-90.0, 90.0), wrap_lon(lon))
}

fn wrap_lon(lon: f64) -> f64 {
    let mut l = lon;
    while l > 180.0 {
        l -= 360.0;
    }
    while l <= -180.0 {
        l += 360.0;
    }
    l
}

/// Gaussian scatter around `center`, rejected beyond `radius_km`.
fn scatter(rng: &mut SeededRng, center: LatLon, radius_km: f64) -> LatLon {
    let sigma = radius_km / 2.5;
    loop {
        let north = sigma * rng.standard_normal();
        let east = sigma * rng.standard_normal();
        let p = offset(center, north, east);
        // the planar offset and the great-circle distance differ slightly
        if center.haversine_km(&p) <= radius_km {
            return p;
        }
    }
}

pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = SeededRng::new(cfg.rng_seed);
    let origin = LatLon::new(cfg.center_lat, cfg.center_lon);

    let centers: Vec<LatLon> = (0..cfg.n_geo_clusters)
        .map(|_| {
            let north = (rng.uniform() - 0.5) * cfg.region_km;
            let east = (rng.uniform() - 0.5) * cfg.region_km;
            offset(origin, north, east)
        })
        .collect();

    let width = cfg.n_pois.to_string().len().max(3);
    let mut pois = Vec::with_capacity(cfg.n_pois);
    for i in 0..cfg.n_pois {
        let cluster = rng.below(cfg.n_geo_clusters as u64) as usize;
        let loc = scatter(&mut rng, centers[cluster], cfg.cluster_radius_km);
        let category = rng.below(cfg.n_categories as u64);
        pois.push(
            Poi::new(format!("p{i:0width$}"), loc.lat, loc.lon)
                .with_category(format!("c{category}")),
        );
    }

    let uwidth = cfg.n_users.to_string().len().max(3);
    let users: Vec<UserId> = (0..cfg.n_users)
        .map(|i| UserId::new(format!("u{i:0uwidth$}")))
        .collect();
    let homes: Vec<LatLon> = (0..cfg.n_users)
        .map(|_| {
            let cluster = rng.below(cfg.n_geo_clusters as u64) as usize;
            scatter(&mut rng, centers[cluster], cfg.cluster_radius_km * 1.5)
        })
        .collect();
    let activity: Vec<f64> = (0..cfg.n_users)
        .map(|_| (0.8 * rng.standard_normal()).exp())
        .collect();

    let target_mean = cfg.n_users as f64 * cfg.mean_checkins_per_user / cfg.n_pois as f64;
    let cap = popularity_cap(cfg.power_law_exponent, cfg.min_poi_checkins, target_mean);
    let law = DiscretePowerLaw::new(cfg.power_law_exponent, cfg.min_poi_checkins, cap);

    let mut checkins = Vec::new();
    let mut keyed: Vec<(f64, usize)> = Vec::with_capacity(cfg.n_users);
    for poi in &pois {
        let count = law.sample(&mut rng);
        let loc = poi.location();
        let weights: Vec<f64> = homes
            .iter()
            .zip(&activity)
            .map(|(h, a)| a * ((-h.haversine_km(&loc) / cfg.locality_km).exp() + 0.02))
            .collect();
        let mut remaining = count;
        while remaining > 0 {
            // weighted sampling without replacement (Efraimidis-Spirakis)
            keyed.clear();
            keyed.extend(
                weights
                    .iter()
                    .enumerate()
                    .map(|(u, w)| (rng.uniform_open0().ln() / w, u)),
            );
            keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let take = remaining.min(keyed.len() as u64) as usize;
            for &(_, u) in &keyed[..take] {
                let ts = BASE_TIMESTAMP + rng.below(TIME_SPAN_SECS as u64) as i64;
                checkins.push(CheckIn::new(users[u].clone(), poi.id.clone(), ts));
            }
            remaining -= take as u64;
        }
    }
    checkins.sort_by(|a, b| (&a.user, a.timestamp, &a.poi).cmp(&(&b.user, b.timestamp, &b.poi)));

    let mut dataset = Dataset {
        users: users.iter().cloned().collect(),
        pois: pois.into_iter().map(|p| (p.id.clone(), p)).collect(),
        checkins,
        ..Default::default()
    };
    for i in 0..cfg.n_users {
        for j in (i + 1)..cfg.n_users {
            if rng.bernoulli(cfg.social_edge_probability) {
                dataset.social.insert(users[i].clone(), users[j].clone());
            }
        }
    }
    Ok(dataset)
}
