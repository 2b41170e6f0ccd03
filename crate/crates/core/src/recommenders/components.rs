//! Scoring components shared by the three contextual models. Each returns
//! one value per POI index.

use super::context::TrainContext;
use crate::geo::LatLon;
use crate::regression::fit_line;

/// Lower bound applied to component probabilities before products and logs.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Distances below this are treated as equal to it in the distance law.
pub const MIN_DISTANCE_KM: f64 = 0.01;

const DISTANCE_BINS: usize = 30;

/// User-based collaborative filtering on the binary matrix: the
/// similarity-weighted fraction of neighbours who visited each POI.
/// Neighbours are all other users when `neighbours` is `None`.
pub fn user_cf(
    ctx: &TrainContext,
    user: usize,
    neighbours: Option<&[u32]>,
    similarity: impl Fn(usize) -> f64,
) -> Vec<f64> {
    let mut acc = vec![0.0; ctx.n_pois()];
    let mut total = 0.0;
    let mut visit = |v: usize| {
        if v == user {
            return;
        }
        let s = similarity(v);
        if s <= 0.0 {
            return;
        }
        total += s;
        for &(p, _) in ctx.matrix.row(v) {
            acc[p as usize] += s;
        }
    };
    match neighbours {
        Some(list) => list.iter().for_each(|&v| visit(v as usize)),
        None => (0..ctx.n_users()).for_each(&mut visit),
    }
    if total > 0.0 {
        for a in &mut acc {
            *a /= total;
        }
    }
    acc
}

/// Jaccard overlap of two users' friend lists.
pub fn friend_jaccard(ctx: &TrainContext, a: usize, b: usize) -> f64 {
    let (fa, fb) = (&ctx.friends[a], &ctx.friends[b]);
    if fa.is_empty() && fb.is_empty() {
        return 0.0;
    }
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < fa.len() && j < fb.len() {
        match fa[i].cmp(&fb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    inter as f64 / (fa.len() + fb.len() - inter) as f64
}

/// `P(d) = coefficient * d^exponent`, the pooled distance law between POIs
/// visited by the same user.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DistanceLaw {
    pub coefficient: f64,
    pub exponent: f64,
}

impl DistanceLaw {
    pub const NEUTRAL: DistanceLaw = DistanceLaw {
        coefficient: 1.0,
        exponent: 0.0,
    };

    pub fn probability(&self, d_km: f64) -> f64 {
        (self.coefficient * d_km.max(MIN_DISTANCE_KM).powf(self.exponent)).max(PROBABILITY_FLOOR)
    }

    /// Fits the law to pairwise distances between each user's distinct
    /// visited POIs: log-binned densities regressed in log-log space.
    pub fn fit(ctx: &TrainContext) -> DistanceLaw {
        let mut distances = Vec::new();
        for u in 0..ctx.n_users() {
            let row = ctx.matrix.row(u);
            for (i, &(a, _)) in row.iter().enumerate() {
                for &(b, _) in &row[i + 1..] {
                    let d = ctx.coords[a as usize].haversine_km(&ctx.coords[b as usize]);
                    distances.push(d.max(MIN_DISTANCE_KM));
                }
            }
        }
        Self::fit_distances(&distances)
    }

    pub fn fit_distances(distances: &[f64]) -> DistanceLaw {
        let Some(max) = distances.iter().copied().reduce(f64::max) else {
            return Self::NEUTRAL;
        };
        let min = distances.iter().copied().fold(f64::INFINITY, f64::min);
        if !(max > min) {
            return Self::NEUTRAL;
        }
        let (lmin, lmax) = (min.ln(), max.ln());
        let step = (lmax - lmin) / DISTANCE_BINS as f64;
        let mut counts = [0usize; DISTANCE_BINS];
        for d in distances {
            let b = (((d.ln() - lmin) / step) as usize).min(DISTANCE_BINS - 1);
            counts[b] += 1;
        }
        let total = distances.len() as f64;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (b, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let lo = (lmin + step * b as f64).exp();
            let hi = (lmin + step * (b + 1) as f64).exp();
            let density = c as f64 / (total * (hi - lo));
            xs.push(((lo * hi).sqrt()).ln());
            ys.push(density.ln());
        }
        match fit_line(&xs, &ys, 0.0) {
            Ok(line) => DistanceLaw {
                coefficient: line.intercept.exp(),
                exponent: line.slope,
            },
            Err(_) => Self::NEUTRAL,
        }
    }
}

/// Normalized product of distance probabilities to the user's distinct
/// visited POIs: `exp(Σ ln P(d) - max)`, so the best POI scores 1.
pub fn geo_influence(ctx: &TrainContext, user: usize, law: &DistanceLaw) -> Vec<f64> {
    let visited: Vec<LatLon> = ctx
        .matrix
        .row(user)
        .iter()
        .map(|&(p, _)| ctx.coords[p as usize])
        .collect();
    let log_sums: Vec<f64> = ctx
        .coords
        .iter()
        .map(|c| {
            visited
                .iter()
                .map(|v| law.probability(c.haversine_km(v)).ln())
                .sum()
        })
        .collect();
    let max = log_sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    log_sums.into_iter().map(|l| (l - max).exp()).collect()
}

/// Standard-deviation bandwidth rule on the radial spread of the user's
/// check-ins around their centroid: `1.06 * sigma * n^(-1/5)`.
pub fn kde_bandwidth(points: &[LatLon], min_bandwidth_km: f64) -> f64 {
    let Some((centre, _)) = crate::geo::centroid(points) else {
        return min_bandwidth_km;
    };
    let n = points.len() as f64;
    let var = points
        .iter()
        .map(|p| p.haversine_km(&centre).powi(2))
        .sum::<f64>()
        / n;
    (1.06 * var.sqrt() * n.powf(-0.2)).max(min_bandwidth_km)
}

/// Gaussian kernel density over the user's check-in locations, with the
/// kernel left unscaled so values lie in `[0, 1]`.
pub fn kde_scores(ctx: &TrainContext, user: usize, bandwidth_km: f64) -> Vec<f64> {
    let points = ctx.visit_locations(user);
    if points.is_empty() {
        return vec![PROBABILITY_FLOOR; ctx.n_pois()];
    }
    let n = points.len() as f64;
    let two_h2 = 2.0 * bandwidth_km * bandwidth_km;
    ctx.coords
        .iter()
        .map(|c| {
            let s: f64 = points
                .iter()
                .map(|p| (-c.haversine_km(p).powi(2) / two_h2).exp())
                .sum();
            (s / n).max(PROBABILITY_FLOOR)
        })
        .collect()
}

/// Check-ins at each POI by the user's friends, `+1` smoothed and divided
/// by the maximum. All ones when the user has no friends.
pub fn social_popularity(ctx: &TrainContext, user: usize) -> Vec<f64> {
    let mut counts = vec![1.0; ctx.n_pois()];
    for &f in &ctx.friends[user] {
        for &(p, n) in ctx.matrix.row(f as usize) {
            counts[p as usize] += n as f64;
        }
    }
    let max = counts.iter().copied().fold(1.0, f64::max);
    counts.into_iter().map(|c| c / max).collect()
}

/// Category affinity of the user times global category popularity, both
/// `+1` smoothed, divided by the maximum over POIs.
pub fn category_scores(ctx: &TrainContext, user: usize) -> Vec<f64> {
    let k = ctx.n_categories as f64;
    let mut user_freq = vec![0.0; ctx.n_categories];
    let mut user_total = 0.0;
    for &(p, n) in ctx.matrix.row(user) {
        user_freq[ctx.categories[p as usize].0 as usize] += n as f64;
        user_total += n as f64;
    }
    let mut global = vec![0.0; ctx.n_categories];
    for (p, &n) in ctx.matrix.poi_counts().iter().enumerate() {
        global[ctx.categories[p].0 as usize] += n as f64;
    }
    let global_total: f64 = global.iter().sum();
    let per_cat: Vec<f64> = (0..ctx.n_categories)
        .map(|c| {
            ((user_freq[c] + 1.0) / (user_total + k)) * ((global[c] + 1.0) / (global_total + k))
        })
        .collect();
    let max = per_cat.iter().copied().fold(0.0, f64::max);
    ctx.categories
        .iter()
        .map(|c| per_cat[c.0 as usize] / max)
        .collect()
}

/// First-order transition probabilities from the train sequences.
#[derive(Debug, Clone, Default)]
pub struct Transitions {
    /// Per source POI: `(target, count)` sorted by target.
    out: Vec<Vec<(u32, u32)>>,
    totals: Vec<u32>,
}

impl Transitions {
    pub fn from_sequences<'a>(n_pois: usize, seqs: impl IntoIterator<Item = &'a [u32]>) -> Self {
        let mut maps: Vec<std::collections::BTreeMap<u32, u32>> = vec![Default::default(); n_pois];
        for seq in seqs {
            for w in seq.windows(2) {
                if w[0] != w[1] {
                    *maps[w[0] as usize].entry(w[1]).or_insert(0) += 1;
                }
            }
        }
        let out: Vec<Vec<(u32, u32)>> = maps.into_iter().map(|m| m.into_iter().collect()).collect();
        let totals = out.iter().map(|v| v.iter().map(|e| e.1).sum()).collect();
        Self { out, totals }
    }

    /// Adds `weight * P(from -> q)` into `acc` for every successor `q`.
    fn add_row(&self, from: usize, weight: f64, acc: &mut [f64]) {
        let total = self.totals[from];
        if total == 0 {
            return;
        }
        let scale = weight / total as f64;
        for &(q, c) in &self.out[from] {
            acc[q as usize] += scale * c as f64;
        }
    }
}

/// Additive Markov score: recency-weighted sum over the user's sequence of
/// transition probabilities to each POI, blending the user's own
/// transitions with the global ones; divided by its maximum.
pub fn sequential_scores(
    ctx: &TrainContext,
    global: &Transitions,
    user: usize,
    decay: f64,
    personal_blend: f64,
) -> Vec<f64> {
    let seq = &ctx.sequences[user];
    let personal = Transitions::from_sequences(ctx.n_pois(), [seq.as_slice()]);
    let mut acc = vec![0.0; ctx.n_pois()];
    let mut weight = 1.0;
    for &l in seq.iter().rev() {
        if weight < 1e-12 {
            break;
        }
        personal.add_row(l as usize, weight * personal_blend, &mut acc);
        global.add_row(l as usize, weight * (1.0 - personal_blend), &mut acc);
        weight *= decay;
    }
    let max = acc.iter().copied().fold(0.0, f64::max);
    acc.into_iter()
        .map(|a| {
            if max > 0.0 {
                (a / max).max(PROBABILITY_FLOOR)
            } else {
                PROBABILITY_FLOOR
            }
        })
        .collect()
}
