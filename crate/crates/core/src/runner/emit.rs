use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::compare::{SignificanceRow, SIGNIFICANCE_COLUMNS};
use super::config::ExperimentConfig;
use super::pipeline::SweepResult;
use crate::error::{Error, Result};
use crate::fairness::ExposureFamily;
use crate::metrics::{pareto_mask, GceValue, MetricsReport, ParetoPoint, REPORT_COLUMNS};

/// Which slices of a sweep the summary tables show.
#[derive(Debug, Clone, PartialEq)]
pub struct TableLayout {
    /// k of the per-alpha table.
    pub table_k: usize,
    /// beta of the per-alpha table.
    pub table_beta: f64,
    pub tradeoff_pairs: Vec<(f64, f64)>,
    pub tradeoff_family: ExposureFamily,
}

impl TableLayout {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        let ks = &cfg.sweep.k_list;
        let table_k = if ks.contains(&10) {
            10
        } else {
            *ks.iter().min().unwrap_or(&10)
        };
        let table_beta = if cfg.sweep.beta_grid.contains(&0.0) {
            0.0
        } else {
            cfg.sweep
                .beta_grid
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        };
        Self {
            table_k,
            table_beta,
            tradeoff_pairs: cfg.sweep.tradeoff_pairs.clone(),
            tradeoff_family: cfg.sweep.tradeoff_family,
        }
    }
}

fn csv_file(
    path: &Path,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| (*s).to_owned()).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// `results.csv` and `results.json`: one row per configuration.
pub fn write_results(rows: &[MetricsReport], dir: &Path) -> Result<Vec<PathBuf>> {
    let csv_path = dir.join("results.csv");
    csv_file(
        &csv_path,
        &strings(&REPORT_COLUMNS),
        rows.iter().map(MetricsReport::csv_record),
    )?;
    let json_path = dir.join("results.json");
    write_json(&json_path, &rows)?;
    Ok(vec![csv_path, json_path])
}

fn grid_rows(r: &SweepResult) -> impl Iterator<Item = &MetricsReport> {
    r.rows
        .iter()
        .zip(&r.tradeoff_rows)
        .filter(|(_, t)| !**t)
        .map(|(row, _)| row)
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Precision and long-tail exposure by (model, family) across alpha.
fn table1(r: &SweepResult, layout: &TableLayout, path: &Path) -> Result<()> {
    let slice: Vec<&MetricsReport> = grid_rows(r)
        .filter(|row| row.k == layout.table_k && row.beta == layout.table_beta)
        .collect();
    let alphas = distinct(slice.iter().map(|row| row.alpha));
    let mut header = strings(&["model", "exposure_family", "k", "beta"]);
    header.extend(alphas.iter().map(|a| format!("precision_a{a}")));
    header.extend(alphas.iter().map(|a| format!("exp_longtail_a{a}")));
    let mut groups: Vec<(String, String)> = Vec::new();
    for row in &slice {
        let key = (row.model.clone(), row.exposure_family.clone());
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    let records = groups.into_iter().map(|(model, family)| {
        let pick = |a: f64| {
            slice
                .iter()
                .find(|row| row.model == model && row.exposure_family == family && row.alpha == a)
        };
        let mut rec = vec![
            model.clone(),
            family.clone(),
            layout.table_k.to_string(),
            layout.table_beta.to_string(),
        ];
        rec.extend(alphas.iter().map(|&a| {
            pick(a)
                .map(|row| row.precision.to_string())
                .unwrap_or_default()
        }));
        rec.extend(alphas.iter().map(|&a| {
            pick(a)
                .map(|row| row.exp_longtail.to_string())
                .unwrap_or_default()
        }));
        rec
    });
    csv_file(path, &header, records)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Precision, item GCE, user GCE and distance by (model, alpha, beta)
/// across k, for the tradeoff pairs.
fn table2(r: &SweepResult, layout: &TableLayout, path: &Path) -> Result<()> {
    let family = layout.tradeoff_family.name();
    let ks: Vec<usize> = {
        let mut v: Vec<usize> = r.rows.iter().map(|row| row.k).collect();
        v.sort();
        v.dedup();
        v
    };
    let mut header = strings(&["model", "alpha", "beta", "exposure_family"]);
    for metric in ["precision", "gce_items", "gce_users", "mean_median_dist_km"] {
        header.extend(ks.iter().map(|k| format!("{metric}@{k}")));
    }
    let mut models: Vec<&str> = Vec::new();
    for row in &r.rows {
        if !models.contains(&row.model.as_str()) {
            models.push(&row.model);
        }
    }
    let mut records = Vec::new();
    for model in models {
        for &(alpha, beta) in &layout.tradeoff_pairs {
            let at = |k: usize| {
                r.rows.iter().find(|row| {
                    row.model == model
                        && row.exposure_family == family
                        && row.alpha == alpha
                        && row.beta == beta
                        && row.k == k
                })
            };
            if ks.iter().all(|&k| at(k).is_none()) {
                continue;
            }
            let mut rec = vec![
                model.to_owned(),
                alpha.to_string(),
                beta.to_string(),
                family.to_owned(),
            ];
            rec.extend(
                ks.iter()
                    .map(|&k| at(k).map(|x| x.precision.to_string()).unwrap_or_default()),
            );
            rec.extend(
                ks.iter()
                    .map(|&k| at(k).map(|x| x.gce_items.to_string()).unwrap_or_default()),
            );
            rec.extend(
                ks.iter()
                    .map(|&k| at(k).map(|x| x.gce_users.to_string()).unwrap_or_default()),
            );
            rec.extend(ks.iter().map(|&k| {
                at(k)
                    .map(|x| opt(x.mean_median_dist_km))
                    .unwrap_or_default()
            }));
            records.push(rec);
        }
    }
    csv_file(path, &header, records)
}

pub const POINT_COLUMNS: [&str; 11] = [
    "label",
    "model",
    "exposure_family",
    "alpha",
    "beta",
    "k",
    "user_gce",
    "item_gce",
    "precision",
    "tradeoff",
    "on_front",
];

fn gce_coordinate(v: GceValue) -> f64 {
    v.finite().unwrap_or(f64::NEG_INFINITY)
}

/// Pareto scatter data; the front is taken within each (model, k).
fn points(r: &SweepResult, path: &Path) -> Result<()> {
    let mut by_group: BTreeMap<(String, usize), Vec<usize>> = BTreeMap::new();
    for (i, row) in r.rows.iter().enumerate() {
        by_group
            .entry((row.model.clone(), row.k))
            .or_default()
            .push(i);
    }
    let mut on_front = vec![false; r.rows.len()];
    for ixs in by_group.values() {
        let pts: Vec<ParetoPoint> = ixs
            .iter()
            .map(|&i| ParetoPoint {
                label: String::new(),
                user_gce: gce_coordinate(r.rows[i].gce_users),
                item_gce: gce_coordinate(r.rows[i].gce_items),
                precision: r.rows[i].precision,
            })
            .collect();
        for (&i, on) in ixs.iter().zip(pareto_mask(&pts)) {
            on_front[i] = on;
        }
    }
    let records = r.rows.iter().enumerate().map(|(i, row)| {
        vec![
            format!(
                "{}|{}|a={}|b={}|k={}",
                row.model, row.exposure_family, row.alpha, row.beta, row.k
            ),
            row.model.clone(),
            row.exposure_family.clone(),
            row.alpha.to_string(),
            row.beta.to_string(),
            row.k.to_string(),
            row.gce_users.to_string(),
            row.gce_items.to_string(),
            row.precision.to_string(),
            r.tradeoff_rows[i].to_string(),
            on_front[i].to_string(),
        ]
    });
    csv_file(path, &strings(&POINT_COLUMNS), records)
}

/// Writes `table1.csv`, `table2.csv` and `points.csv`.
pub fn emit_tables(r: &SweepResult, layout: &TableLayout, dir: &Path) -> Result<Vec<PathBuf>> {
    if r.rows.is_empty() {
        return Err(Error::DegenerateInput("no sweep rows to tabulate".into()));
    }
    let t1 = dir.join("table1.csv");
    table1(r, layout, &t1)?;
    let t2 = dir.join("table2.csv");
    table2(r, layout, &t2)?;
    let p = dir.join("points.csv");
    points(r, &p)?;
    Ok(vec![t1, t2, p])
}

pub fn write_significance(rows: &[SignificanceRow], dir: &Path) -> Result<PathBuf> {
    let path = dir.join("significance.csv");
    csv_file(
        &path,
        &strings(&SIGNIFICANCE_COLUMNS),
        rows.iter().map(SignificanceRow::csv_record),
    )?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub status: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub version: String,
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config: BTreeMap<String, String>,
}

pub const MANIFEST_FILE: &str = "MANIFEST.json";

pub fn write_manifest(m: &Manifest, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(MANIFEST_FILE);
    write_json(&path, m)?;
    Ok(path)
}

/// Reads a points file (or any CSV with `user_gce` and `item_gce` columns)
/// and rewrites it with a fresh `on_front` column. Non-numeric GCE cells
/// (e.g. `degenerate`) are never on the front. Returns the front size.
pub fn mark_pareto_file(input: &Path, output: &Path) -> Result<usize> {
    let mut r = csv::Reader::from_path(input)?;
    let header = r.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse {
                file: input.to_path_buf(),
                line: 1,
                column: 1,
                message: format!("missing `{name}` column"),
            })
    };
    let (ux, ix) = (col("user_gce")?, col("item_gce")?);
    let label_ix = header.iter().position(|h| h == "label");
    let prec_ix = header.iter().position(|h| h == "precision");
    let mut records = Vec::new();
    for rec in r.records() {
        records.push(rec?);
    }
    let num = |s: &str| s.trim().parse::<f64>().unwrap_or(f64::NEG_INFINITY);
    let pts: Vec<ParetoPoint> = records
        .iter()
        .map(|rec| ParetoPoint {
            label: label_ix.map(|i| rec[i].to_owned()).unwrap_or_default(),
            user_gce: num(&rec[ux]),
            item_gce: num(&rec[ix]),
            precision: prec_ix.map(|i| num(&rec[i])).unwrap_or(f64::NAN),
        })
        .collect();
    // fronts are taken within each (model, k) when those columns exist
    let group_cols: Vec<usize> = ["model", "k"]
        .iter()
        .filter_map(|n| header.iter().position(|h| h == *n))
        .collect();
    let mut groups: BTreeMap<Vec<&str>, Vec<usize>> = BTreeMap::new();
    for (i, rec) in records.iter().enumerate() {
        groups
            .entry(group_cols.iter().map(|&c| &rec[c]).collect())
            .or_default()
            .push(i);
    }
    let mut mask = vec![false; records.len()];
    for ixs in groups.values() {
        let sub: Vec<ParetoPoint> = ixs.iter().map(|&i| pts[i].clone()).collect();
        for (&i, on) in ixs.iter().zip(pareto_mask(&sub)) {
            mask[i] = on;
        }
    }
    let front_ix = header.iter().position(|h| h == "on_front");
    let mut out_header: Vec<String> = header.iter().map(str::to_owned).collect();
    if front_ix.is_none() {
        out_header.push("on_front".into());
    }
    let out = records.iter().zip(&mask).map(|(rec, on)| {
        let mut v: Vec<String> = rec.iter().map(str::to_owned).collect();
        match front_ix {
            Some(i) => v[i] = on.to_string(),
            None => v.push(on.to_string()),
        }
        v
    });
    csv_file(output, &out_header, out)?;
    Ok(mask.iter().filter(|m| **m).count())
}
