use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::pipeline::{eval_context, recommend_all, Combo, Prepared, Trained};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_lists, MetricsReport, ReportLabel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneCandidate {
    pub report: MetricsReport,
    pub feasible: bool,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub model: String,
    pub exposure_family: String,
    /// Long-tail exposure the selection had to reach.
    pub longtail_floor: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub validation_precision: Option<f64>,
    pub candidates: Vec<TuneCandidate>,
}

/// Picks `(alpha, beta)` per model and exposure family on the validation
/// split: the highest precision among settings whose long-tail mean
/// exposure reaches `longtail_floor_ratio` times the unweighted value.
/// Ties go to the smaller `alpha + beta`, then the smaller `alpha`.
pub fn tune(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    trained: &Trained,
) -> Result<Vec<TuneOutcome>> {
    let eval = eval_context(cfg, prepared, &prepared.split.validation)?;
    let k = cfg.tune.k;
    let mut out = Vec::new();
    for model in &trained.models {
        for &family in &cfg.exposure.families {
            let mut combos = vec![Combo {
                family,
                alpha: 0.0,
                beta: 0.0,
                tradeoff: false,
            }];
            for &alpha in &cfg.tune.alpha_grid {
                for &beta in &cfg.tune.beta_grid {
                    if alpha != 0.0 || beta != 0.0 {
                        combos.push(Combo {
                            family,
                            alpha,
                            beta,
                            tradeoff: false,
                        });
                    }
                }
            }
            let lists = recommend_all(model, trained, &combos, k);
            let reports = combos
                .iter()
                .zip(&lists)
                .map(|(c, l)| {
                    evaluate_lists(
                        l,
                        &eval,
                        k,
                        ReportLabel {
                            model: model.kind().name().into(),
                            alpha: c.alpha,
                            beta: c.beta,
                            exposure_family: family.name().into(),
                        },
                    )
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.in_stage("tune"))?;
            let floor = reports[0].exp_longtail * cfg.tune.longtail_floor_ratio;
            let mut best: Option<usize> = None;
            for (i, r) in reports.iter().enumerate() {
                if r.exp_longtail < floor {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(b) => {
                        let q = &reports[b];
                        r.precision > q.precision
                            || (r.precision == q.precision
                                && (r.alpha + r.beta, r.alpha) < (q.alpha + q.beta, q.alpha))
                    }
                };
                if better {
                    best = Some(i);
                }
            }
            let chosen = best.map(|b| &reports[b]);
            out.push(TuneOutcome {
                model: model.kind().name().into(),
                exposure_family: family.name().into(),
                longtail_floor: floor,
                alpha: chosen.map(|r| r.alpha),
                beta: chosen.map(|r| r.beta),
                validation_precision: chosen.map(|r| r.precision),
                candidates: reports
                    .iter()
                    .enumerate()
                    .map(|(i, r)| TuneCandidate {
                        report: r.clone(),
                        feasible: r.exp_longtail >= floor,
                        selected: Some(i) == best,
                    })
                    .collect(),
            });
        }
    }
    if out.is_empty() {
        return Err(Error::Config("nothing to tune".into()));
    }
    Ok(out)
}
