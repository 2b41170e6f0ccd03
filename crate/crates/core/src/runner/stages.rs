//! Single pipeline stages as run by the command-line subcommands. Each
//! writes its artifacts under `cfg.run.out`.

use std::fs;
use std::path::{Path, PathBuf};

use super::compare::TestKind;
use super::config::ExperimentConfig;
use super::emit::{write_json, write_manifest, Manifest};
use super::pipeline::{
    eval_context, fit_exposures, load_corpus, prepare, recommend_all, train_all, train_models,
    Combo, Prepared,
};
use super::tune::{tune, TuneOutcome};
use super::{ensure_dir, flatten};
use crate::corpus::{dataset_stats, filter_sparse, write_dataset, Dataset, StatsSummary};
use crate::error::{Error, Result};
use crate::fairness::FairnessWeights;
use crate::metrics::{evaluate_lists, MetricsReport, ReportLabel};
use crate::recommenders::{ModelKind, RecommendationList};
use crate::stats::{kruskal_wallis, mann_whitney_u, wilcoxon_signed_rank, TestResult};

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Writes a complete manifest for a finished stage.
pub fn finish_stage(
    cfg: &ExperimentConfig,
    command: &str,
    started_at: String,
    files: &[PathBuf],
) -> Result<PathBuf> {
    let dir = &cfg.run.out;
    write_manifest(
        &Manifest {
            status: "complete".into(),
            command: command.into(),
            config_hash: cfg.config_hash(),
            seed: cfg.run.seed,
            started_at,
            finished_at: now(),
            version: env!("CARGO_PKG_VERSION").into(),
            files: files
                .iter()
                .map(|f| f.strip_prefix(dir).unwrap_or(f).display().to_string())
                .collect(),
            error: None,
            config: flatten(cfg),
        },
        dir,
    )
}

fn dataset_files(dir: &Path, cfg: &ExperimentConfig) -> Vec<PathBuf> {
    let ext = match cfg.data.delimiter {
        crate::corpus::Delimiter::Tab => "tsv",
        crate::corpus::Delimiter::Comma => "csv",
    };
    ["checkins", "pois", "social"]
        .iter()
        .map(|n| dir.join(format!("{n}.{ext}")))
        .collect()
}

/// Generates the configured synthetic corpus into `out/raw`.
pub fn synth_stage(cfg: &ExperimentConfig) -> Result<Dataset> {
    let started = now();
    let mut s = cfg.synthetic.clone();
    s.rng_seed = cfg.run.seed;
    let d = crate::corpus::generate_synthetic(&s)?;
    let dir = cfg.run.out.join("raw");
    write_dataset(&dir, &d, cfg.data.delimiter)?;
    finish_stage(cfg, "synth", started, &dataset_files(&dir, cfg))?;
    Ok(d)
}

/// Loads the configured corpus, applies the sparsity filter and writes the
/// result into `out/filtered`.
pub fn ingest_stage(cfg: &ExperimentConfig) -> Result<Dataset> {
    let started = now();
    let raw = load_corpus(cfg).map_err(|e| e.in_stage("ingest"))?;
    let d = if cfg.filter.enabled {
        filter_sparse(
            &raw,
            cfg.filter.min_users_per_poi,
            cfg.filter.min_pois_per_user,
        )
        .map_err(|e| e.in_stage("filter"))?
    } else {
        raw
    };
    let dir = cfg.run.out.join("filtered");
    write_dataset(&dir, &d, cfg.data.delimiter)?;
    finish_stage(cfg, "ingest", started, &dataset_files(&dir, cfg))?;
    Ok(d)
}

/// Splits the filtered corpus and writes each part plus the group labels
/// and train statistics into `out/split`.
pub fn split_stage(cfg: &ExperimentConfig) -> Result<(Prepared, StatsSummary)> {
    let started = now();
    let prepared = prepare(cfg)?;
    let dir = cfg.run.out.join("split");
    let mut files = Vec::new();
    for (name, part) in [
        ("train", &prepared.split.train),
        ("validation", &prepared.split.validation),
        ("test", &prepared.split.test),
    ] {
        write_dataset(&dir.join(name), part, cfg.data.delimiter)?;
        files.extend(dataset_files(&dir.join(name), cfg));
    }
    let groups = dir.join("groups.json");
    write_json(&groups, &prepared.groups)?;
    let stats = dataset_stats(&prepared.split.train, &prepared.groups);
    let stats_path = dir.join("train_stats.json");
    write_json(&stats_path, &stats)?;
    files.extend([groups, stats_path]);
    finish_stage(cfg, "split", started, &files)?;
    Ok((prepared, stats))
}

/// Trains the configured models into `out/models`.
pub fn train_stage(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let started = now();
    let prepared = prepare(cfg)?;
    let out = cfg.run.out.as_path();
    let models = train_models(cfg, &prepared, Some(out))?;
    let files: Vec<PathBuf> = models
        .iter()
        .map(|m| out.join("models").join(format!("{}.json", m.kind())))
        .collect();
    finish_stage(cfg, "train", started, &files)?;
    Ok(files)
}

/// Fits the configured exposure families into `out/exposure`.
pub fn fit_exposure_stage(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let started = now();
    let prepared = prepare(cfg)?;
    let out = cfg.run.out.as_path();
    let fitted = fit_exposures(cfg, &prepared, Some(out))?;
    let files: Vec<PathBuf> = fitted
        .keys()
        .map(|f| out.join("exposure").join(format!("{f}.json")))
        .collect();
    finish_stage(cfg, "fit-exposure", started, &files)?;
    Ok(files)
}

/// One model under one fairness setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleRun {
    pub model: ModelKind,
    pub weights: FairnessWeights,
    pub k: usize,
}

fn single_lists(
    cfg: &ExperimentConfig,
    run: SingleRun,
) -> Result<(Prepared, Vec<RecommendationList>)> {
    run.weights.validate()?;
    if run.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let mut cfg = cfg.clone();
    cfg.models.kinds = vec![run.model];
    cfg.exposure.families = vec![run.weights.exposure_family];
    let prepared = prepare(&cfg)?;
    let cache = cfg.run.cache.then_some(cfg.run.out.as_path());
    let trained = train_all(&cfg, &prepared, cache)?;
    let combo = Combo {
        family: run.weights.exposure_family,
        alpha: run.weights.alpha,
        beta: run.weights.beta,
        tradeoff: false,
    };
    let lists = recommend_all(&trained.models[0], &trained, &[combo], run.k)
        .pop()
        .expect("one combo");
    Ok((prepared, lists))
}

/// Top-k lists for every user, written to `out/recommendations.csv` as
/// `user_id, rank, poi_id, score`.
pub fn recommend_stage(cfg: &ExperimentConfig, run: SingleRun) -> Result<Vec<RecommendationList>> {
    let started = now();
    let (_, lists) = single_lists(cfg, run)?;
    ensure_dir(&cfg.run.out)?;
    let path = cfg.run.out.join("recommendations.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["user_id", "rank", "poi_id", "score"])?;
    for l in &lists {
        for (rank, (poi, score)) in l.items.iter().enumerate() {
            w.write_record([
                l.user.as_str(),
                &(rank + 1).to_string(),
                poi.as_str(),
                &score.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    finish_stage(cfg, "recommend", started, &[path])?;
    Ok(lists)
}

/// Metrics of one setting on the test split, written to
/// `out/evaluation.json`.
pub fn evaluate_stage(cfg: &ExperimentConfig, run: SingleRun) -> Result<MetricsReport> {
    let started = now();
    let (prepared, lists) = single_lists(cfg, run)?;
    let eval = eval_context(cfg, &prepared, &prepared.split.test)?;
    let report = evaluate_lists(
        &lists,
        &eval,
        run.k,
        ReportLabel {
            model: run.model.name().into(),
            alpha: run.weights.alpha,
            beta: run.weights.beta,
            exposure_family: run.weights.exposure_family.name().into(),
        },
    )?;
    ensure_dir(&cfg.run.out)?;
    let path = cfg.run.out.join("evaluation.json");
    write_json(&path, &report)?;
    finish_stage(cfg, "evaluate", started, &[path])?;
    Ok(report)
}

/// Validation tuning, written to `out/tune.csv` and `out/tune.json`.
pub fn tune_stage(cfg: &ExperimentConfig) -> Result<(Vec<TuneOutcome>, Vec<PathBuf>)> {
    let prepared = prepare(cfg)?;
    let cache = cfg.run.cache.then_some(cfg.run.out.as_path());
    let trained = train_all(cfg, &prepared, cache)?;
    let outcomes = tune(cfg, &prepared, &trained)?;
    ensure_dir(&cfg.run.out)?;
    let csv_path = cfg.run.out.join("tune.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record([
        "model",
        "exposure_family",
        "longtail_floor",
        "alpha",
        "beta",
        "validation_precision",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for o in &outcomes {
        w.write_record([
            o.model.clone(),
            o.exposure_family.clone(),
            o.longtail_floor.to_string(),
            opt(o.alpha),
            opt(o.beta),
            opt(o.validation_precision),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;
    let json_path = cfg.run.out.join("tune.json");
    write_json(&json_path, &outcomes)?;
    Ok((outcomes, vec![csv_path, json_path]))
}

/// Reads numeric columns from a delimited file with a header row. Empty
/// cells are skipped, so columns may differ in length.
pub fn read_columns(path: &Path, delimiter: u8) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(file);
    let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_owned()).collect();
    let mut cols = vec![Vec::new(); header.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        for (c, cell) in rec.iter().enumerate().take(header.len()) {
            let cell = cell.trim();
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                file: path.to_path_buf(),
                line: line + 2,
                column: c + 1,
                message: format!("`{cell}` is not a number"),
            })?;
            cols[c].push(v);
        }
    }
    Ok((header, cols))
}

/// Runs `test` over the columns of a file. Kruskal-Wallis takes every
/// column as a group; Mann-Whitney compares the first two; Wilcoxon uses
/// the paired differences of the first two.
pub fn stats_from_file(path: &Path, delimiter: u8, test: TestKind) -> Result<TestResult> {
    let (header, cols) = read_columns(path, delimiter)?;
    if cols.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "{} has {} column(s), need at least two",
            path.display(),
            header.len()
        )));
    }
    match test {
        TestKind::Kruskal => kruskal_wallis(&cols),
        TestKind::MannWhitney => mann_whitney_u(&cols[0], &cols[1]),
        TestKind::Wilcoxon => {
            if cols[0].len() != cols[1].len() {
                return Err(Error::DegenerateInput(format!(
                    "paired columns `{}` and `{}` differ in length ({} vs {})",
                    header[0],
                    header[1],
                    cols[0].len(),
                    cols[1].len()
                )));
            }
            let d: Vec<f64> = cols[0].iter().zip(&cols[1]).map(|(a, b)| a - b).collect();
            wilcoxon_signed_rank(&d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_with_gaps_are_read_by_position() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        fs::write(&p, "a,b,c\n1,4,7\n2,5,8\n3,,9\n").unwrap();
        let (h, cols) = read_columns(&p, b',').unwrap();
        assert_eq!(h, ["a", "b", "c"]);
        assert_eq!(
            cols,
            vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0], vec![7.0, 8.0, 9.0]]
        );
    }

    #[test]
    fn file_tests_match_direct_calls() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        fs::write(&p, "a,b,c\n1,4,7\n2,5,8\n3,6,9\n").unwrap();
        let kw = stats_from_file(&p, b',', TestKind::Kruskal).unwrap();
        assert!((kw.statistic - 7.2).abs() < 1e-12);
        let w = stats_from_file(&p, b',', TestKind::Wilcoxon).unwrap();
        assert_eq!(w, wilcoxon_signed_rank(&[-3.0, -3.0, -3.0]).unwrap());
    }

    #[test]
    fn non_numeric_cells_are_parse_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        fs::write(&p, "a,b\n1,x\n").unwrap();
        let e = read_columns(&p, b',').unwrap_err();
        assert!(
            matches!(
                e,
                Error::Parse {
                    line: 2,
                    column: 2,
                    ..
                }
            ),
            "{e}"
        );
    }
}
