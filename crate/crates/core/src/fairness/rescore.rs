use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::exposure::ExposureFamily;
use crate::error::{Error, Result};
use crate::ids::PoiId;
use crate::recommenders::ScoredCandidates;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessWeights {
    /// Provider weight.
    pub alpha: f64,
    /// Consumer weight.
    pub beta: f64,
    pub exposure_family: ExposureFamily,
}

impl FairnessWeights {
    pub fn new(alpha: f64, beta: f64, exposure_family: ExposureFamily) -> Self {
        Self {
            alpha,
            beta,
            exposure_family,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.alpha == 0.0 && self.beta == 0.0
    }
}

/// `(base + alpha * provider + beta * consumer) / (1 + alpha + beta)`.
#[inline]
pub fn combine(base: f64, provider: f64, consumer: f64, alpha: f64, beta: f64) -> f64 {
    (base + alpha * provider + beta * consumer) / (1.0 + alpha + beta)
}

/// Re-scores candidates. POIs missing from `provider` or `consumer` get 0
/// for that factor.
pub fn rescore(
    base: &ScoredCandidates,
    provider: &HashMap<PoiId, f64>,
    consumer: &HashMap<PoiId, f64>,
    w: &FairnessWeights,
) -> Result<ScoredCandidates> {
    w.validate()?;
    let entries = base
        .entries
        .iter()
        .map(|(p, m)| {
            let fp = provider.get(p).copied().unwrap_or(0.0);
            let fc = consumer.get(p).copied().unwrap_or(0.0);
            (p.clone(), combine(*m, fp, fc, w.alpha, w.beta))
        })
        .collect();
    Ok(ScoredCandidates {
        user: base.user.clone(),
        entries,
    })
}
