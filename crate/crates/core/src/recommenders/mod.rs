//! Baseline recommenders producing per-user scores in `[0, 1]`.
//!
//! - **USG**: `(1 - ws - wg) * CF + ws * SOC + wg * GEO`. CF is cosine
//!   user-based collaborative filtering on the binary matrix; SOC runs the
//!   same estimator over the user's friends with a similarity that averages
//!   check-in cosine and friend-list Jaccard; GEO is the normalized product
//!   of a pooled power-law distance probability to each visited POI.
//! - **GeoSoCa**: `G * S * C`, a Gaussian KDE over the user's check-ins
//!   (standard-deviation bandwidth), friends' check-in popularity, and
//!   category affinity times category popularity.
//! - **LORE**: `SEQ * G * S`, where SEQ is an additive first-order Markov
//!   score over the user's check-in sequence, blending personal and global
//!   transitions.
//! - **Popularity**: train check-in count.
//!
//! Raw scores are min-max normalized per user over the candidate set (all
//! POIs the user did not visit in train). A constant score vector maps to
//! 0.5 everywhere.

mod components;
mod context;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use components::{DistanceLaw, Transitions, PROBABILITY_FLOOR};
pub use context::{CategoryIx, CheckinMatrix, TrainContext};

use crate::corpus::{Dataset, SocialGraph};
use crate::error::{Error, Result};
use crate::ids::{PoiId, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Usg,
    GeoSoCa,
    Lore,
    Popularity,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Usg,
        ModelKind::GeoSoCa,
        ModelKind::Lore,
        ModelKind::Popularity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Usg => "usg",
            ModelKind::GeoSoCa => "geosoca",
            ModelKind::Lore => "lore",
            ModelKind::Popularity => "popularity",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown model `{s}` (expected usg, geosoca, lore or popularity)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelParams {
    /// USG weight of the social component.
    pub social_weight: f64,
    /// USG weight of the geographical component.
    pub geo_weight: f64,
    pub min_bandwidth_km: f64,
    /// LORE recency decay per step back in the sequence.
    pub markov_decay: f64,
    /// LORE share of personal (vs global) transitions.
    pub personal_blend: f64,
    /// GeoSoCa refuses datasets without categories unless this is false,
    /// in which case the category factor is 1.
    pub require_categories: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            social_weight: 0.1,
            geo_weight: 0.1,
            min_bandwidth_km: 0.1,
            markov_decay: 0.5,
            personal_blend: 0.5,
            require_categories: true,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.social_weight)
            || !unit(self.geo_weight)
            || self.social_weight + self.geo_weight > 1.0
        {
            return Err(Error::Config(format!(
                "USG weights must be in [0, 1] with sum <= 1, got {} and {}",
                self.social_weight, self.geo_weight
            )));
        }
        if !unit(self.markov_decay) || !unit(self.personal_blend) {
            return Err(Error::Config(
                "LORE decay and blend must be in [0, 1]".into(),
            ));
        }
        if !(self.min_bandwidth_km > 0.0) {
            return Err(Error::Config("min_bandwidth_km must be positive".into()));
        }
        Ok(())
    }
}

/// Parameters estimated from the train split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum Fitted {
    Popularity,
    Usg { distance_law: DistanceLaw },
    GeoSoCa { bandwidths_km: Vec<f64> },
    Lore { bandwidths_km: Vec<f64> },
}

impl Fitted {
    pub fn kind(&self) -> ModelKind {
        match self {
            Fitted::Popularity => ModelKind::Popularity,
            Fitted::Usg { .. } => ModelKind::Usg,
            Fitted::GeoSoCa { .. } => ModelKind::GeoSoCa,
            Fitted::Lore { .. } => ModelKind::Lore,
        }
    }
}

/// A trained recommender. Immutable; scoring is deterministic and can be
/// called concurrently.
#[derive(Debug, Clone)]
pub struct BaseModel {
    kind: ModelKind,
    params: ModelParams,
    fitted: Fitted,
    ctx: Arc<TrainContext>,
    transitions: Option<Arc<Transitions>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidates {
    pub user: UserId,
    /// `(poi, score)` in POI id order; scores lie in `[0, 1]`.
    pub entries: Vec<(PoiId, f64)>,
}

/// Top-k recommendations, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationList {
    pub user: UserId,
    pub k: usize,
    pub items: Vec<(PoiId, f64)>,
}

impl RecommendationList {
    /// Fewer than `k` candidates were available.
    pub fn is_short(&self) -> bool {
        self.items.len() < self.k
    }

    pub fn poi_ids(&self) -> impl Iterator<Item = &PoiId> {
        self.items.iter().map(|(p, _)| p)
    }

    /// The first `k` entries as a list of its own.
    pub fn truncated(&self, k: usize) -> RecommendationList {
        RecommendationList {
            user: self.user.clone(),
            k,
            items: self.items.iter().take(k).cloned().collect(),
        }
    }
}

/// Maps values to `[0, 1]` by min-max; constant (or empty) input maps to 0.5.
pub fn min_max_normalize(values: &mut [f64]) {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = hi - lo;
    if !(range > 0.0) || !range.is_finite() {
        values.iter_mut().for_each(|v| *v = 0.5);
        return;
    }
    for v in values.iter_mut() {
        *v = ((*v - lo) / range).clamp(0.0, 1.0);
    }
}

pub fn train(
    kind: ModelKind,
    train: &Dataset,
    social: &SocialGraph,
    params: &ModelParams,
) -> Result<BaseModel> {
    params.validate()?;
    let ctx = Arc::new(TrainContext::build(train, social)?);
    if kind == ModelKind::GeoSoCa && params.require_categories && !ctx.has_categories {
        return Err(Error::Capability(
            "GeoSoCa needs POI categories; none of the POIs has a category_id \
             (set require_categories = false to score with a neutral category factor)"
                .into(),
        ));
    }
    let fitted = match kind {
        ModelKind::Popularity => Fitted::Popularity,
        ModelKind::Usg => Fitted::Usg {
            distance_law: DistanceLaw::fit(&ctx),
        },
        ModelKind::GeoSoCa => Fitted::GeoSoCa {
            bandwidths_km: bandwidths(&ctx, params),
        },
        ModelKind::Lore => Fitted::Lore {
            bandwidths_km: bandwidths(&ctx, params),
        },
    };
    BaseModel::assemble(kind, params.clone(), fitted, ctx)
}

fn bandwidths(ctx: &TrainContext, params: &ModelParams) -> Vec<f64> {
    (0..ctx.n_users())
        .map(|u| components::kde_bandwidth(&ctx.visit_locations(u), params.min_bandwidth_km))
        .collect()
}

impl BaseModel {
    pub(crate) fn assemble(
        kind: ModelKind,
        params: ModelParams,
        fitted: Fitted,
        ctx: Arc<TrainContext>,
    ) -> Result<Self> {
        if fitted.kind() != kind {
            return Err(Error::Config(format!(
                "fitted parameters are for {}, not {kind}",
                fitted.kind()
            )));
        }
        if let Fitted::GeoSoCa { bandwidths_km } | Fitted::Lore { bandwidths_km } = &fitted {
            if bandwidths_km.len() != ctx.n_users() {
                return Err(Error::Config(format!(
                    "{} bandwidths for {} users",
                    bandwidths_km.len(),
                    ctx.n_users()
                )));
            }
        }
        let transitions = (kind == ModelKind::Lore).then(|| {
            Arc::new(Transitions::from_sequences(
                ctx.n_pois(),
                ctx.sequences.iter().map(Vec::as_slice),
            ))
        });
        Ok(Self {
            kind,
            params,
            fitted,
            ctx,
            transitions,
        })
    }

    /// Rebuilds a model from saved parameters without refitting.
    pub fn from_parts(
        kind: ModelKind,
        params: ModelParams,
        fitted: Fitted,
        train: &Dataset,
        social: &SocialGraph,
    ) -> Result<Self> {
        params.validate()?;
        let ctx = Arc::new(TrainContext::build(train, social)?);
        Self::assemble(kind, params, fitted, ctx)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn fitted(&self) -> &Fitted {
        &self.fitted
    }

    pub fn context(&self) -> &TrainContext {
        &self.ctx
    }

    /// Unnormalized score of every POI (by index) for a user index.
    pub fn raw_scores(&self, user: usize) -> Vec<f64> {
        let ctx = &*self.ctx;
        match &self.fitted {
            Fitted::Popularity => ctx.matrix.poi_counts().iter().map(|&c| c as f64).collect(),
            Fitted::Usg { distance_law } => {
                let p = &self.params;
                let w_cf = 1.0 - p.social_weight - p.geo_weight;
                let cf = components::user_cf(ctx, user, None, |v| ctx.cosine(user, v));
                let mut out: Vec<f64> = cf.iter().map(|c| w_cf * c).collect();
                if p.social_weight > 0.0 {
                    let soc = components::user_cf(ctx, user, Some(&ctx.friends[user]), |v| {
                        0.5 * ctx.cosine(user, v) + 0.5 * components::friend_jaccard(ctx, user, v)
                    });
                    out.iter_mut()
                        .zip(soc)
                        .for_each(|(o, s)| *o += p.social_weight * s);
                }
                if p.geo_weight > 0.0 {
                    let geo = components::geo_influence(ctx, user, distance_law);
                    out.iter_mut()
                        .zip(geo)
                        .for_each(|(o, g)| *o += p.geo_weight * g);
                }
                out
            }
            Fitted::GeoSoCa { bandwidths_km } => {
                let g = components::kde_scores(ctx, user, bandwidths_km[user]);
                let s = components::social_popularity(ctx, user);
                let c = if ctx.has_categories {
                    components::category_scores(ctx, user)
                } else {
                    vec![1.0; ctx.n_pois()]
                };
                g.iter()
                    .zip(&s)
                    .zip(&c)
                    .map(|((g, s), c)| {
                        g.max(PROBABILITY_FLOOR)
                            * s.max(PROBABILITY_FLOOR)
                            * c.max(PROBABILITY_FLOOR)
                    })
                    .collect()
            }
            Fitted::Lore { bandwidths_km } => {
                let transitions = self.transitions.as_ref().expect("LORE transitions");
                let seq = components::sequential_scores(
                    ctx,
                    transitions,
                    user,
                    self.params.markov_decay,
                    self.params.personal_blend,
                );
                let g = components::kde_scores(ctx, user, bandwidths_km[user]);
                let s = components::social_popularity(ctx, user);
                seq.iter()
                    .zip(&g)
                    .zip(&s)
                    .map(|((q, g), s)| {
                        q.max(PROBABILITY_FLOOR)
                            * g.max(PROBABILITY_FLOOR)
                            * s.max(PROBABILITY_FLOOR)
                    })
                    .collect()
            }
        }
    }

    /// Normalized `(poi index, score)` over the user's candidates, in index
    /// (and therefore id) order.
    pub fn candidate_scores(&self, user: usize) -> Vec<(usize, f64)> {
        let raw = self.raw_scores(user);
        let mut idx = Vec::with_capacity(raw.len());
        let mut vals = Vec::with_capacity(raw.len());
        for (p, v) in raw.into_iter().enumerate() {
            if !self.ctx.matrix.visited(user, p) {
                idx.push(p);
                vals.push(v);
            }
        }
        min_max_normalize(&mut vals);
        idx.into_iter().zip(vals).collect()
    }

    pub fn score_candidates(&self, user: &UserId) -> Result<ScoredCandidates> {
        let u = self
            .ctx
            .user_ix(user)
            .ok_or_else(|| Error::unknown("user", user))?;
        Ok(ScoredCandidates {
            user: user.clone(),
            entries: self
                .candidate_scores(u)
                .into_iter()
                .map(|(p, s)| (self.ctx.pois[p].clone(), s))
                .collect(),
        })
    }
}

/// Score descending, then id ascending.
fn rank_order(a: &(PoiId, f64), b: &(PoiId, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// The `k` best candidates, ties broken by POI id. Returns every candidate
/// (a short list) when fewer than `k` exist.
pub fn top_k(s: &ScoredCandidates, k: usize) -> Result<RecommendationList> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let mut entries = s.entries.clone();
    if entries.len() > k {
        entries.select_nth_unstable_by(k - 1, rank_order);
        entries.truncate(k);
    }
    entries.sort_by(rank_order);
    Ok(RecommendationList {
        user: s.user.clone(),
        k,
        items: entries,
    })
}

/// [`top_k`] over `(poi index, score)` pairs. Index order equals id order,
/// so both break ties the same way.
pub fn top_k_indexed(mut entries: Vec<(usize, f64)>, k: usize) -> Vec<(usize, f64)> {
    let order = |a: &(usize, f64), b: &(usize, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    if k == 0 {
        return Vec::new();
    }
    if entries.len() > k {
        entries.select_nth_unstable_by(k - 1, order);
        entries.truncate(k);
    }
    entries.sort_by(order);
    entries
}

#[cfg(test)]
mod tests;
