use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::pipeline::{SampleSet, SweepResult};
use crate::error::{Error, Result};
use crate::fairness::ExposureFamily;
use crate::recommenders::ModelKind;
use crate::stats::{kruskal_wallis, mann_whitney_u, wilcoxon_signed_rank, TestResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Kruskal,
    MannWhitney,
    Wilcoxon,
}

impl TestKind {
    pub const ALL: [TestKind; 3] = [TestKind::Kruskal, TestKind::MannWhitney, TestKind::Wilcoxon];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Kruskal => "kruskal",
            TestKind::MannWhitney => "mannwhitney",
            TestKind::Wilcoxon => "wilcoxon",
        }
    }
}

impl FromStr for TestKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "kruskal" | "kruskalwallis" => Ok(TestKind::Kruskal),
            "mannwhitney" | "mannwhitneyu" => Ok(TestKind::MannWhitney),
            "wilcoxon" => Ok(TestKind::Wilcoxon),
            _ => Err(Error::Config(format!(
                "unknown test `{s}` (expected kruskal, mannwhitney or wilcoxon)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMetric {
    /// Per-user precision.
    Precision,
    /// Per-POI exposure.
    Exposure,
}

impl SampleMetric {
    pub const ALL: [SampleMetric; 2] = [SampleMetric::Precision, SampleMetric::Exposure];

    pub fn name(self) -> &'static str {
        match self {
            SampleMetric::Precision => "precision",
            SampleMetric::Exposure => "exposure",
        }
    }

    fn values(self, s: &SampleSet) -> Vec<f64> {
        match self {
            SampleMetric::Precision => s.user_precision.clone(),
            SampleMetric::Exposure => s.poi_exposure.iter().map(|&e| e as f64).collect(),
        }
    }
}

/// Which configurations to compare: grid rows at `alpha`, `beta` and `k`.
/// Wilcoxon pairs each family at `alpha` with the same family at
/// `baseline_alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selector {
    pub alpha: f64,
    pub beta: f64,
    pub k: usize,
    pub baseline_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceRow {
    pub test: String,
    pub model: String,
    pub metric: String,
    pub k: usize,
    /// Compared configurations, e.g. `linear@0.5`.
    pub a: String,
    pub b: String,
    pub result: Option<TestResult>,
    /// Why `result` is missing.
    pub note: String,
}

pub const SIGNIFICANCE_COLUMNS: [&str; 11] = [
    "test",
    "model",
    "metric",
    "k",
    "a",
    "b",
    "statistic",
    "p_value",
    "significant",
    "method",
    "note",
];

impl SignificanceRow {
    pub fn csv_record(&self) -> Vec<String> {
        let (stat, p, sig, method) = match &self.result {
            Some(r) => (
                r.statistic.to_string(),
                r.p_value.to_string(),
                r.significant().to_string(),
                serde_json::to_value(r.method)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default(),
            ),
            None => Default::default(),
        };
        vec![
            self.test.clone(),
            self.model.clone(),
            self.metric.clone(),
            self.k.to_string(),
            self.a.clone(),
            self.b.clone(),
            stat,
            p,
            sig,
            method,
            self.note.clone(),
        ]
    }
}

fn find(
    r: &SweepResult,
    model: ModelKind,
    family: ExposureFamily,
    alpha: f64,
    beta: f64,
    k: usize,
) -> Option<&SampleSet> {
    r.samples.iter().find(|s| {
        s.model == model
            && !s.combo.tradeoff
            && s.combo.family == family
            && s.combo.alpha == alpha
            && s.combo.beta == beta
            && s.k == k
    })
}

fn outcome(res: Result<TestResult>) -> Result<(Option<TestResult>, String)> {
    match res {
        Ok(t) => Ok((Some(t), String::new())),
        Err(Error::DegenerateInput(m)) => Ok((None, m)),
        Err(e) => Err(e),
    }
}

/// Runs `test` over the samples of every model, grouped by exposure family.
pub fn compare_models(
    r: &SweepResult,
    test: TestKind,
    sel: Selector,
) -> Result<Vec<SignificanceRow>> {
    let mut models: Vec<ModelKind> = r.samples.iter().map(|s| s.model).collect();
    models.sort();
    models.dedup();
    let mut families: Vec<ExposureFamily> = r.samples.iter().map(|s| s.combo.family).collect();
    families.sort();
    families.dedup();
    let tag = |f: ExposureFamily, a: f64| format!("{f}@{a}");
    let mut rows = Vec::new();
    for &model in &models {
        for metric in SampleMetric::ALL {
            let row = |a: String, b: String, res: Result<TestResult>| -> Result<SignificanceRow> {
                let (result, note) = outcome(res)?;
                Ok(SignificanceRow {
                    test: test.name().into(),
                    model: model.name().into(),
                    metric: metric.name().into(),
                    k: sel.k,
                    a,
                    b,
                    result,
                    note,
                })
            };
            let at: Vec<(ExposureFamily, &SampleSet)> = families
                .iter()
                .filter_map(|&f| find(r, model, f, sel.alpha, sel.beta, sel.k).map(|s| (f, s)))
                .collect();
            match test {
                TestKind::Kruskal => {
                    if at.len() < 2 {
                        continue;
                    }
                    let groups: Vec<Vec<f64>> = at.iter().map(|(_, s)| metric.values(s)).collect();
                    let names: Vec<String> = at.iter().map(|(f, _)| tag(*f, sel.alpha)).collect();
                    rows.push(row(
                        names.join("|"),
                        String::new(),
                        kruskal_wallis(&groups),
                    )?);
                }
                TestKind::MannWhitney => {
                    for i in 0..at.len() {
                        for j in i + 1..at.len() {
                            let (fa, sa) = at[i];
                            let (fb, sb) = at[j];
                            rows.push(row(
                                tag(fa, sel.alpha),
                                tag(fb, sel.alpha),
                                mann_whitney_u(&metric.values(sa), &metric.values(sb)),
                            )?);
                        }
                    }
                }
                TestKind::Wilcoxon => {
                    for &(f, after) in &at {
                        let Some(before) = find(r, model, f, sel.baseline_alpha, sel.beta, sel.k)
                        else {
                            continue;
                        };
                        let (x, y) = (metric.values(before), metric.values(after));
                        if x.len() != y.len() {
                            return Err(Error::DegenerateInput(format!(
                                "paired samples differ in length: {} vs {}",
                                x.len(),
                                y.len()
                            )));
                        }
                        let deltas: Vec<f64> = y.iter().zip(&x).map(|(b, a)| b - a).collect();
                        rows.push(row(
                            tag(f, sel.baseline_alpha),
                            tag(f, sel.alpha),
                            wilcoxon_signed_rank(&deltas),
                        )?);
                    }
                }
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::pipeline::{Combo, Provenance};

    fn set(
        model: ModelKind,
        family: ExposureFamily,
        alpha: f64,
        prec: Vec<f64>,
        exp: Vec<u64>,
    ) -> SampleSet {
        SampleSet {
            model,
            combo: Combo {
                family,
                alpha,
                beta: 0.0,
                tradeoff: false,
            },
            k: 10,
            user_precision: prec,
            poi_exposure: exp,
        }
    }

    fn result(samples: Vec<SampleSet>) -> SweepResult {
        SweepResult {
            rows: vec![],
            tradeoff_rows: vec![],
            samples,
            sample_users: vec![],
            pois: vec![],
            provenance: Provenance {
                config_hash: String::new(),
                seed: 0,
                started_at: String::new(),
                finished_at: String::new(),
            },
        }
    }

    fn sel() -> Selector {
        Selector {
            alpha: 0.5,
            beta: 0.0,
            k: 10,
            baseline_alpha: 0.0,
        }
    }

    #[test]
    fn identical_configurations_are_not_different() {
        let p = vec![0.1, 0.2, 0.0, 0.3, 0.1, 0.2];
        let e = vec![3, 0, 1, 5, 2, 2];
        let samples: Vec<SampleSet> = ExposureFamily::ALL
            .iter()
            .map(|f| set(ModelKind::Popularity, *f, 0.5, p.clone(), e.clone()))
            .collect();
        let r = result(samples);
        let kw = compare_models(&r, TestKind::Kruskal, sel()).unwrap();
        // one row per (model, metric)
        assert_eq!(kw.len(), 2);
        for row in kw
            .iter()
            .chain(&compare_models(&r, TestKind::MannWhitney, sel()).unwrap())
        {
            assert!(row.result.as_ref().unwrap().p_value > 0.99, "{row:?}");
        }
    }

    #[test]
    fn wilcoxon_uses_recomputed_deltas() {
        let before = vec![0.1, 0.2, 0.3, 0.4, 0.5];
        let after = vec![0.0, 0.0, 0.1, 0.1, 0.2];
        let r = result(vec![
            set(
                ModelKind::Usg,
                ExposureFamily::Linear,
                0.0,
                before.clone(),
                vec![1; 5],
            ),
            set(
                ModelKind::Usg,
                ExposureFamily::Linear,
                0.5,
                after.clone(),
                vec![1; 5],
            ),
        ]);
        let rows = compare_models(&r, TestKind::Wilcoxon, sel()).unwrap();
        let prec = rows.iter().find(|r| r.metric == "precision").unwrap();
        let deltas: Vec<f64> = after.iter().zip(&before).map(|(a, b)| a - b).collect();
        assert_eq!(
            prec.result.as_ref().unwrap(),
            &wilcoxon_signed_rank(&deltas).unwrap()
        );
        // identical exposure vectors have no non-zero difference
        let exp = rows.iter().find(|r| r.metric == "exposure").unwrap();
        assert!(exp.result.is_none() && !exp.note.is_empty());
    }

    #[test]
    fn mismatched_pairs_are_errors() {
        let r = result(vec![
            set(
                ModelKind::Usg,
                ExposureFamily::Linear,
                0.0,
                vec![0.1, 0.2],
                vec![1],
            ),
            set(
                ModelKind::Usg,
                ExposureFamily::Linear,
                0.5,
                vec![0.1],
                vec![1],
            ),
        ]);
        assert!(compare_models(&r, TestKind::Wilcoxon, sel()).is_err());
    }
}
