//! Exposure models mapping a POI's train check-in count to a provider
//! fairness score in `[0, 1]` that never increases with popularity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::histogram::PopularityHistogram;
use crate::corpus::top_fifth;
use crate::error::{Error, Result};
use crate::regression::fit_line;

/// Ridge strength for the log-log power-law fit.
pub const DEFAULT_RIDGE_LAMBDA: f64 = 10.0;

/// Slope penalty that keeps the logistic fit finite on separable data.
const LOGISTIC_RIDGE: f64 = 1e-2;
const LOGISTIC_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExposureFamily {
    PowerLaw,
    Linear,
    Logistic,
}

impl ExposureFamily {
    pub const ALL: [ExposureFamily; 3] = [
        ExposureFamily::PowerLaw,
        ExposureFamily::Linear,
        ExposureFamily::Logistic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExposureFamily::PowerLaw => "powerlaw",
            ExposureFamily::Linear => "linear",
            ExposureFamily::Logistic => "logistic",
        }
    }
}

impl fmt::Display for ExposureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExposureFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s
            .trim()
            .to_ascii_lowercase()
            .replace(['-', '_'], "")
            .as_str()
        {
            "powerlaw" => Ok(ExposureFamily::PowerLaw),
            "linear" => Ok(ExposureFamily::Linear),
            "logistic" => Ok(ExposureFamily::Logistic),
            _ => Err(Error::Config(format!(
                "unknown exposure family `{s}` (expected powerlaw, linear or logistic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ExposureParams {
    /// `y = w0 * x^w1`.
    PowerLaw { w0: f64, w1: f64 },
    /// `y = intercept + slope * x`, clamped at 0.
    Linear { intercept: f64, slope: f64 },
    /// `P(long tail) = sigmoid(intercept + slope * ln x)`.
    Logistic { intercept: f64, slope: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureModel {
    pub params: ExposureParams,
    /// Divisor mapping predictions into `[0, 1]`; 1 for logistic.
    pub score_ceiling: f64,
    /// Smallest positive count seen when fitting.
    pub x_min: u64,
}

impl ExposureModel {
    pub fn family(&self) -> ExposureFamily {
        match self.params {
            ExposureParams::PowerLaw { .. } => ExposureFamily::PowerLaw,
            ExposureParams::Linear { .. } => ExposureFamily::Linear,
            ExposureParams::Logistic { .. } => ExposureFamily::Logistic,
        }
    }

    /// Model prediction at `x` before normalization.
    pub fn predict(&self, x: f64) -> f64 {
        match self.params {
            ExposureParams::PowerLaw { w0, w1 } => w0 * x.powf(w1),
            ExposureParams::Linear { intercept, slope } => (intercept + slope * x).max(0.0),
            ExposureParams::Logistic { intercept, slope } => sigmoid(intercept + slope * x.ln()),
        }
    }

    /// The provider fairness score of a POI with `checkin_count` train
    /// check-ins. Counts of zero are scored as one; counts below the
    /// smallest fitted count score as that count, so the score never rises
    /// with popularity even when a fit comes out increasing.
    pub fn provider_score(&self, checkin_count: u64) -> f64 {
        let x = checkin_count.max(1);
        match self.params {
            ExposureParams::Logistic { .. } => self.predict(x as f64).clamp(0.0, 1.0),
            _ => {
                if !(self.score_ceiling > 0.0) {
                    return 0.0;
                }
                let x = x.max(self.x_min) as f64;
                (self.predict(x) / self.score_ceiling).clamp(0.0, 1.0)
            }
        }
    }

    /// Logistic midpoint in count units, when the slope is nonzero.
    pub fn logistic_midpoint(&self) -> Option<f64> {
        match self.params {
            ExposureParams::Logistic { intercept, slope } if slope != 0.0 => {
                Some((-intercept / slope).exp())
            }
            _ => None,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn require_spread(h: &PopularityHistogram) -> Result<u64> {
    if h.distinct_x() < 2 {
        return Err(Error::Fit(format!(
            "need at least two distinct check-in counts, histogram has {}",
            h.distinct_x()
        )));
    }
    Ok(h.x_min().expect("nonempty"))
}

/// `(w0, w1)` of `y = w0 * x^w1` by ridge regression of `ln y` on `ln x`;
/// only the slope is penalized. Points must be positive.
pub fn power_law_params(xs: &[f64], ys: &[f64], ridge_lambda: f64) -> Result<(f64, f64)> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::Fit("power-law fit needs positive x and y".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let line = fit_line(&lx, &ly, ridge_lambda)?;
    Ok((line.intercept.exp(), line.slope))
}

/// Power law fitted to the histogram points; the score ceiling is the
/// prediction at the smallest count.
pub fn fit_power_law(h: &PopularityHistogram, ridge_lambda: f64) -> Result<ExposureModel> {
    let x_min = require_spread(h)?;
    let xs: Vec<f64> = h.points.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = h.points.iter().map(|p| p.1 as f64).collect();
    let (w0, w1) = power_law_params(&xs, &ys, ridge_lambda)?;
    let params = ExposureParams::PowerLaw { w0, w1 };
    let mut model = ExposureModel {
        params,
        score_ceiling: 1.0,
        x_min,
    };
    model.score_ceiling = model.predict(x_min as f64);
    Ok(model)
}

/// Least squares `y = a + b x` on the histogram points.
pub fn fit_linear(h: &PopularityHistogram) -> Result<ExposureModel> {
    let x_min = require_spread(h)?;
    let xs: Vec<f64> = h.points.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = h.points.iter().map(|p| p.1 as f64).collect();
    let line = fit_line(&xs, &ys, 0.0)?;
    let mut model = ExposureModel {
        params: ExposureParams::Linear {
            intercept: line.intercept,
            slope: line.slope,
        },
        score_ceiling: 1.0,
        x_min,
    };
    model.score_ceiling = model.predict(x_min as f64);
    Ok(model)
}

/// Logistic regression of long-tail membership on `ln(count)`, one sample
/// per POI. The top fifth of POIs by count are the short head; zero-count
/// POIs take feature `ln 1`. The slope is capped at zero so the score never
/// rises with popularity.
pub fn fit_logistic(h: &PopularityHistogram) -> Result<ExposureModel> {
    let x_min = require_spread(h)?;
    let counts = h.counts_descending();
    let n_head = top_fifth(counts.len());
    let samples: Vec<(f64, f64)> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| ((c.max(1) as f64).ln(), if i < n_head { 0.0 } else { 1.0 }))
        .collect();
    let positives = samples.iter().filter(|s| s.1 == 1.0).count();
    if positives == 0 || positives == samples.len() {
        return Err(Error::Fit(
            "logistic fit needs both short-head and long-tail POIs".into(),
        ));
    }
    let (intercept, slope) = logistic_newton(&samples)?;
    Ok(ExposureModel {
        params: ExposureParams::Logistic {
            intercept,
            slope: slope.min(0.0),
        },
        score_ceiling: 1.0,
        x_min,
    })
}

/// Penalized Newton-Raphson for `(intercept, slope)`; only the slope is
/// penalized.
fn logistic_newton(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    let (mut b0, mut b1) = (0.0f64, 0.0f64);
    for _ in 0..LOGISTIC_MAX_ITER {
        let (mut g0, mut g1) = (0.0, -LOGISTIC_RIDGE * b1);
        let (mut h00, mut h01, mut h11) = (0.0, 0.0, LOGISTIC_RIDGE);
        for &(x, y) in samples {
            let p = sigmoid(b0 + b1 * x);
            let w = p * (1.0 - p);
            g0 += y - p;
            g1 += (y - p) * x;
            h00 += w;
            h01 += w * x;
            h11 += w * x * x;
        }
        let det = h00 * h11 - h01 * h01;
        if !(det.abs() > 1e-300) {
            break;
        }
        let d0 = (h11 * g0 - h01 * g1) / det;
        let d1 = (h00 * g1 - h01 * g0) / det;
        b0 += d0;
        b1 += d1;
        if !(b0.is_finite() && b1.is_finite()) {
            return Err(Error::Fit("logistic fit diverged".into()));
        }
        if d0.abs().max(d1.abs()) < 1e-10 {
            break;
        }
    }
    Ok((b0, b1))
}

pub fn fit_exposure(
    family: ExposureFamily,
    h: &PopularityHistogram,
    ridge_lambda: f64,
) -> Result<ExposureModel> {
    match family {
        ExposureFamily::PowerLaw => fit_power_law(h, ridge_lambda),
        ExposureFamily::Linear => fit_linear(h),
        ExposureFamily::Logistic => fit_logistic(h),
    }
}
