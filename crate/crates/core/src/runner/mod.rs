//! Experiment orchestration: configuration, the train-once sweep over
//! (model, exposure family, alpha, beta, k), result tables, significance
//! tests, validation tuning and run manifests.

mod compare;
mod config;
mod emit;
mod pipeline;
mod stages;
mod tune;

use std::fs;
use std::path::{Path, PathBuf};

pub use compare::{
    compare_models, SampleMetric, Selector, SignificanceRow, TestKind, SIGNIFICANCE_COLUMNS,
};
pub use config::{
    env_overrides, flatten, DataSection, ExperimentConfig, ExposureSection, FilterSection,
    ModelsSection, RunSection, SweepSection, TuneSection, ENV_PREFIX,
};
pub use emit::{
    emit_tables, mark_pareto_file, write_json, write_manifest, write_results, write_significance,
    Manifest, TableLayout, MANIFEST_FILE, POINT_COLUMNS,
};
pub use pipeline::{
    combos, eval_context, evaluate_model, fit_exposures, load_corpus, prepare, recommend_all,
    run_pipeline, sweep_partial, train_all, train_models, Combo, PartialSweep, Prepared,
    Provenance, SampleSet, SweepResult, Trained,
};
pub use stages::{
    evaluate_stage, finish_stage, fit_exposure_stage, ingest_stage, read_columns, recommend_stage,
    split_stage, stats_from_file, synth_stage, train_stage, tune_stage, SingleRun,
};
pub use tune::{tune, TuneCandidate, TuneOutcome};

use crate::error::{Error, Result};

/// Builds the worker pool; `jobs == 0` uses every core.
pub fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn relative(dir: &Path, files: &[PathBuf]) -> Vec<String> {
    files
        .iter()
        .map(|f| f.strip_prefix(dir).unwrap_or(f).display().to_string())
        .collect()
}

/// Full sweep into `cfg.run.out`: results, tables, significance grid and
/// MANIFEST, plus validation tuning when `with_tune` is set. On failure the
/// rows finished so far are written and the manifest is marked incomplete.
pub fn run_sweep(cfg: &ExperimentConfig, with_tune: bool) -> Result<SweepResult> {
    cfg.validate()?;
    let dir = cfg.run.out.clone();
    ensure_dir(&dir)?;
    let started = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let mut manifest = Manifest {
        status: "incomplete".into(),
        command: "sweep".into(),
        config_hash: cfg.config_hash(),
        seed: cfg.run.seed,
        started_at: started,
        finished_at: String::new(),
        version: env!("CARGO_PKG_VERSION").into(),
        files: Vec::new(),
        error: None,
        config: flatten(cfg),
    };
    let finish = |m: &mut Manifest, files: &[PathBuf]| -> Result<()> {
        m.finished_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        m.files = relative(&dir, files);
        write_manifest(m, &dir)?;
        Ok(())
    };
    let prepared = match prepare(cfg) {
        Ok(p) => p,
        Err(e) => {
            manifest.error = Some(e.to_string());
            finish(&mut manifest, &[])?;
            return Err(e);
        }
    };
    let cache = cfg.run.cache.then_some(dir.as_path());
    let partial = sweep_partial(cfg, &prepared, cache);
    let result = partial.result;
    let mut files = write_results(&result.rows, &dir)?;
    if let Some(e) = partial.error {
        manifest.error = Some(e.to_string());
        finish(&mut manifest, &files)?;
        return Err(e);
    }
    files.extend(emit_tables(&result, &TableLayout::from_config(cfg), &dir)?);
    let selector = Selector {
        alpha: cfg.sweep.significance_alpha,
        beta: TableLayout::from_config(cfg).table_beta,
        k: cfg.sweep.significance_k,
        baseline_alpha: 0.0,
    };
    let mut sig = Vec::new();
    for test in TestKind::ALL {
        sig.extend(compare_models(&result, test, selector)?);
    }
    files.push(write_significance(&sig, &dir)?);
    if with_tune {
        match tune_stage(cfg) {
            Ok((_, f)) => files.extend(f),
            Err(e) => {
                manifest.error = Some(e.to_string());
                finish(&mut manifest, &files)?;
                return Err(e);
            }
        }
    }
    manifest.status = "complete".into();
    manifest.started_at = result.provenance.started_at.clone();
    finish(&mut manifest, &files)?;
    Ok(result)
}
