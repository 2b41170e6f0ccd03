use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::corpus::{
    assign_groups, chronological_split, filter_sparse, generate_synthetic, load_dataset, Dataset,
    GroupAssignment, LoadOptions, SplitDataset,
};
use crate::error::{Error, Result};
use crate::fairness::{
    build_consumer_context, build_popularity_histogram, combine, fit_exposure, ConsumerContext,
    ExposureFamily, ExposureModel,
};
use crate::ids::{PoiId, UserId};
use crate::metrics::{evaluate_lists, precision_at_k, EvalContext, MetricsReport, ReportLabel};
use crate::model_doc;
use crate::recommenders::{top_k_indexed, train, BaseModel, ModelKind, RecommendationList};

/// Data after filtering, splitting and grouping.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub filtered: Dataset,
    pub split: SplitDataset,
    pub groups: GroupAssignment,
}

/// Loads the configured files, or generates the synthetic corpus.
pub fn load_corpus(cfg: &ExperimentConfig) -> Result<Dataset> {
    match (&cfg.data.checkins, &cfg.data.pois) {
        (Some(c), Some(p)) => load_dataset(
            c,
            p,
            cfg.data.social.as_deref(),
            LoadOptions {
                delimiter: cfg.data.delimiter,
            },
        ),
        _ => {
            let mut s = cfg.synthetic.clone();
            s.rng_seed = cfg.run.seed;
            generate_synthetic(&s)
        }
    }
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let raw = load_corpus(cfg).map_err(|e| e.in_stage("ingest"))?;
    let filtered = if cfg.filter.enabled {
        filter_sparse(
            &raw,
            cfg.filter.min_users_per_poi,
            cfg.filter.min_pois_per_user,
        )
        .map_err(|e| e.in_stage("filter"))?
    } else {
        raw
    };
    let split = chronological_split(&filtered, cfg.split).map_err(|e| e.in_stage("split"))?;
    let groups = assign_groups(&split.train).map_err(|e| e.in_stage("group"))?;
    Ok(Prepared {
        filtered,
        split,
        groups,
    })
}

/// Trained base models, fitted exposure models and the consumer context.
#[derive(Debug, Clone)]
pub struct Trained {
    pub models: Vec<BaseModel>,
    pub exposure: BTreeMap<ExposureFamily, ExposureModel>,
    pub consumer: Arc<ConsumerContext>,
}

impl Trained {
    pub fn model(&self, kind: ModelKind) -> Option<&BaseModel> {
        self.models.iter().find(|m| m.kind() == kind)
    }
}

fn cached_base(path: &Path, hash: &str, prepared: &Prepared) -> Option<BaseModel> {
    let train = &prepared.split.train;
    match model_doc::load_base_model(path, train, &train.social) {
        Ok((m, Some(h))) if h == hash => Some(m),
        _ => None,
    }
}

fn cached_exposure(path: &Path, hash: &str) -> Option<ExposureModel> {
    match model_doc::load_exposure_model(path) {
        Ok((m, Some(h))) if h == hash => Some(m),
        _ => None,
    }
}

fn cache_subdir(cache_dir: Option<&Path>, sub: &str) -> Result<Option<std::path::PathBuf>> {
    match cache_dir {
        Some(d) => {
            let p = d.join(sub);
            fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
            Ok(Some(p))
        }
        None => Ok(None),
    }
}

/// Trains every configured model. With `cache_dir`, models saved there
/// under the same training hash are reused and fresh ones are saved.
pub fn train_models(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    cache_dir: Option<&Path>,
) -> Result<Vec<BaseModel>> {
    let train_split = &prepared.split.train;
    let hash = cfg.training_hash();
    let dir = cache_subdir(cache_dir, "models")?;
    cfg.models
        .kinds
        .par_iter()
        .map(|&kind| {
            let path = dir.as_ref().map(|d| d.join(format!("{kind}.json")));
            if let Some(m) = path
                .as_deref()
                .and_then(|p| cached_base(p, &hash, prepared))
            {
                log::info!("reusing cached {kind} model");
                return Ok(m);
            }
            let m = train(kind, train_split, &train_split.social, &cfg.models.params)
                .map_err(|e| e.in_stage("train"))?;
            if let Some(p) = path {
                model_doc::save_base_model(&p, &m, Some(hash.clone()))?;
            }
            Ok(m)
        })
        .collect()
}

/// Fits the configured exposure families plus the tradeoff family, with the
/// same caching as [`train_models`].
pub fn fit_exposures(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    cache_dir: Option<&Path>,
) -> Result<BTreeMap<ExposureFamily, ExposureModel>> {
    let hash = cfg.training_hash();
    let dir = cache_subdir(cache_dir, "exposure")?;
    let histogram = build_popularity_histogram(&prepared.split.train);
    let mut families: Vec<ExposureFamily> = cfg.exposure.families.clone();
    families.push(cfg.sweep.tradeoff_family);
    families.sort();
    families.dedup();
    let mut exposure = BTreeMap::new();
    for family in families {
        let path = dir.as_ref().map(|d| d.join(format!("{family}.json")));
        let m = match path.as_deref().and_then(|p| cached_exposure(p, &hash)) {
            Some(m) => m,
            None => {
                let m = fit_exposure(family, &histogram, cfg.exposure.ridge_lambda)
                    .map_err(|e| e.in_stage("fit-exposure"))?;
                if let Some(p) = &path {
                    model_doc::save_exposure_model(p, &m, Some(hash.clone()))?;
                }
                m
            }
        };
        exposure.insert(family, m);
    }
    Ok(exposure)
}

/// Trains every configured model and fits every exposure family once.
pub fn train_all(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    cache_dir: Option<&Path>,
) -> Result<Trained> {
    let models = train_models(cfg, prepared, cache_dir)?;
    let exposure = fit_exposures(cfg, prepared, cache_dir)?;
    let train_split = &prepared.split.train;
    let consumer = build_consumer_context(train_split, &prepared.groups, &train_split.pois);
    Ok(Trained {
        models,
        exposure,
        consumer: Arc::new(consumer),
    })
}

/// One re-scoring setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Combo {
    pub family: ExposureFamily,
    pub alpha: f64,
    pub beta: f64,
    /// Added for a tradeoff pair rather than by the grid.
    pub tradeoff: bool,
}

/// Grid settings (family x alpha x beta) followed by tradeoff pairs that
/// the grid does not already cover.
pub fn combos(cfg: &ExperimentConfig) -> Vec<Combo> {
    let mut out = Vec::new();
    for &family in &cfg.exposure.families {
        for &alpha in &cfg.sweep.alpha_grid {
            for &beta in &cfg.sweep.beta_grid {
                out.push(Combo {
                    family,
                    alpha,
                    beta,
                    tradeoff: false,
                });
            }
        }
    }
    let family = cfg.sweep.tradeoff_family;
    for &(alpha, beta) in &cfg.sweep.tradeoff_pairs {
        let covered = out
            .iter()
            .any(|c| c.family == family && c.alpha == alpha && c.beta == beta);
        if !covered {
            out.push(Combo {
                family,
                alpha,
                beta,
                tradeoff: true,
            });
        }
    }
    out
}

/// Top-`k` lists of every user for every combo: `result[combo][user]`.
/// Users are in id order.
pub fn recommend_all(
    model: &BaseModel,
    trained: &Trained,
    combos: &[Combo],
    k: usize,
) -> Vec<Vec<RecommendationList>> {
    let ctx = model.context();
    let provider: BTreeMap<ExposureFamily, Vec<f64>> = trained
        .exposure
        .iter()
        .map(|(f, m)| {
            let v = (0..ctx.n_pois())
                .map(|p| m.provider_score(ctx.matrix.poi_count(p)))
                .collect();
            (*f, v)
        })
        .collect();
    let needs_consumer = combos.iter().any(|c| c.beta > 0.0);
    let per_user: Vec<Vec<RecommendationList>> = (0..ctx.n_users())
        .into_par_iter()
        .map(|u| {
            let user = &ctx.users[u];
            let base = model.candidate_scores(u);
            let mut consumer = vec![0.0; ctx.n_pois()];
            if needs_consumer {
                for (p, s) in trained.consumer.scores_for(user) {
                    if let Some(ix) = ctx.poi_ix(&p) {
                        consumer[ix] = s;
                    }
                }
            }
            combos
                .iter()
                .map(|c| {
                    let fp = &provider[&c.family];
                    let scored: Vec<(usize, f64)> = base
                        .iter()
                        .map(|&(p, m)| (p, combine(m, fp[p], consumer[p], c.alpha, c.beta)))
                        .collect();
                    RecommendationList {
                        user: user.clone(),
                        k,
                        items: top_k_indexed(scored, k)
                            .into_iter()
                            .map(|(p, s)| (ctx.pois[p].clone(), s))
                            .collect(),
                    }
                })
                .collect()
        })
        .collect();
    let mut by_combo: Vec<Vec<RecommendationList>> =
        vec![Vec::with_capacity(per_user.len()); combos.len()];
    for lists in per_user {
        for (c, l) in lists.into_iter().enumerate() {
            by_combo[c].push(l);
        }
    }
    by_combo
}

/// Per-configuration samples for significance testing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub model: ModelKind,
    pub combo: Combo,
    pub k: usize,
    /// Aligned with [`SweepResult::sample_users`].
    pub user_precision: Vec<f64>,
    /// Aligned with [`SweepResult::pois`].
    pub poi_exposure: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<MetricsReport>,
    /// Which row came from a tradeoff pair rather than the grid.
    pub tradeoff_rows: Vec<bool>,
    pub samples: Vec<SampleSet>,
    /// Users with at least one visit in the evaluation split.
    pub sample_users: Vec<UserId>,
    pub pois: Vec<PoiId>,
    pub provenance: Provenance,
}

fn row_key(r: &MetricsReport) -> (usize, usize, u64, u64, usize) {
    let model = ModelKind::ALL
        .iter()
        .position(|m| m.name() == r.model)
        .unwrap_or(usize::MAX);
    let family = ExposureFamily::ALL
        .iter()
        .position(|f| f.name() == r.exposure_family)
        .unwrap_or(usize::MAX);
    // alpha, beta lie in [0, 1], where bit order is numeric order
    (model, family, r.alpha.to_bits(), r.beta.to_bits(), r.k)
}

/// Report rows, each flagged when it comes from a tradeoff pair.
pub type FlaggedRows = Vec<(MetricsReport, bool)>;

/// Rows of one model over every combo and k, plus significance samples.
pub fn evaluate_model(
    model: &BaseModel,
    trained: &Trained,
    combos: &[Combo],
    k_list: &[usize],
    eval: &EvalContext,
    sample_users: &[UserId],
    pois: &[PoiId],
) -> Result<(FlaggedRows, Vec<SampleSet>)> {
    let max_k = *k_list.iter().max().expect("k_list is non-empty");
    let lists = recommend_all(model, trained, combos, max_k);
    let poi_pos: BTreeMap<&PoiId, usize> = pois.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut rows = Vec::new();
    let mut samples = Vec::new();
    for (combo, combo_lists) in combos.iter().zip(&lists) {
        for &k in k_list {
            let cut: Vec<RecommendationList> = combo_lists.iter().map(|l| l.truncated(k)).collect();
            let label = ReportLabel {
                model: model.kind().name().into(),
                alpha: combo.alpha,
                beta: combo.beta,
                exposure_family: combo.family.name().into(),
            };
            let report =
                evaluate_lists(&cut, eval, k, label).map_err(|e| e.in_stage("evaluate"))?;
            rows.push((report, combo.tradeoff));

            let by_user: BTreeMap<&UserId, &RecommendationList> =
                cut.iter().map(|l| (&l.user, l)).collect();
            let user_precision = sample_users
                .iter()
                .map(|u| match by_user.get(u) {
                    Some(l) => precision_at_k(l, &eval.test_visits[u], k, eval.precision_mode),
                    None => Ok(0.0),
                })
                .collect::<Result<Vec<f64>>>()?;
            let mut poi_exposure = vec![0u64; pois.len()];
            for l in &cut {
                for p in l.poi_ids() {
                    if let Some(&i) = poi_pos.get(p) {
                        poi_exposure[i] += 1;
                    }
                }
            }
            samples.push(SampleSet {
                model: model.kind(),
                combo: *combo,
                k,
                user_precision,
                poi_exposure,
            });
        }
    }
    Ok((rows, samples))
}

/// Sweep outcome so far; rows of models evaluated before a failure are kept.
pub struct PartialSweep {
    pub result: SweepResult,
    pub error: Option<Error>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Evaluation context against `target` (the test split for sweeps, the
/// validation split for tuning).
pub fn eval_context(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    target: &Dataset,
) -> Result<EvalContext> {
    let mut eval = EvalContext::new(&prepared.split.train, target, prepared.groups.clone())?;
    eval.precision_mode = cfg.sweep.precision_mode;
    Ok(eval)
}

/// Runs every configured model over the grid on the test split. Models are
/// trained (or loaded) first; a failure keeps the rows finished so far.
pub fn sweep_partial(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    cache_dir: Option<&Path>,
) -> PartialSweep {
    let started_at = now();
    let combos = combos(cfg);
    let pois: Vec<PoiId> = prepared.split.train.pois.keys().cloned().collect();
    let mut result = SweepResult {
        rows: Vec::new(),
        tradeoff_rows: Vec::new(),
        samples: Vec::new(),
        sample_users: Vec::new(),
        pois: pois.clone(),
        provenance: Provenance {
            config_hash: cfg.config_hash(),
            seed: cfg.run.seed,
            started_at,
            finished_at: String::new(),
        },
    };
    let outcome = (|| -> Result<()> {
        let eval = eval_context(cfg, prepared, &prepared.split.test)?;
        let sample_users: Vec<UserId> = eval
            .test_visits
            .iter()
            .filter(|(u, v)| !v.is_empty() && prepared.groups.user(u).is_some())
            .map(|(u, _)| u.clone())
            .collect();
        result.sample_users = sample_users.clone();
        let trained = train_all(cfg, prepared, cache_dir)?;
        let mut rows = Vec::new();
        for model in &trained.models {
            let (r, s) = evaluate_model(
                model,
                &trained,
                &combos,
                &cfg.sweep.k_list,
                &eval,
                &sample_users,
                &pois,
            )?;
            rows.extend(r);
            result.samples.extend(s);
            rows.sort_by_key(|(r, _)| row_key(r));
            result.rows = rows.iter().map(|(r, _)| r.clone()).collect();
            result.tradeoff_rows = rows.iter().map(|(_, t)| *t).collect();
        }
        Ok(())
    })();
    result.provenance.finished_at = now();
    PartialSweep {
        result,
        error: outcome.err(),
    }
}

/// Prepares the data, trains and sweeps. Uses `cfg.run.out` as model cache
/// when `cfg.run.cache` is set.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let prepared = prepare(cfg)?;
    let cache = cfg.run.cache.then_some(cfg.run.out.as_path());
    let partial = sweep_partial(cfg, &prepared, cache);
    match partial.error {
        Some(e) => Err(e),
        None => Ok(partial.result),
    }
}
