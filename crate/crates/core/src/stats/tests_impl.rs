use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use super::rank::{midranks, tie_term};
use crate::error::{Error, Result};

/// Two-sided threshold for calling a difference significant.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Largest number of non-zero differences for which the Wilcoxon p-value
/// is computed exactly.
pub const WILCOXON_EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    NormalApproximation,
    ChiSquareApproximation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test: String,
    pub statistic: f64,
    pub p_value: f64,
    /// Sample sizes (per group, or the number of non-zero differences).
    pub n: Vec<usize>,
    pub method: Method,
}

impl TestResult {
    pub fn significant(&self) -> bool {
        self.p_value < SIGNIFICANCE_LEVEL
    }
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Two-sided normal p-value with a 0.5 continuity correction.
fn normal_two_sided(deviation: f64, variance: f64) -> f64 {
    if !(variance > 0.0) {
        return 1.0;
    }
    let z = ((deviation.abs() - 0.5).max(0.0)) / variance.sqrt();
    (2.0 * standard_normal().sf(z)).min(1.0)
}

/// H statistic with tie correction; p from chi-square with `groups - 1`
/// degrees of freedom.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::DegenerateInput(
            "Kruskal-Wallis needs at least two groups".into(),
        ));
    }
    if groups.iter().any(Vec::is_empty) {
        return Err(Error::DegenerateInput(
            "Kruskal-Wallis group is empty".into(),
        ));
    }
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = pooled.len() as f64;
    let ranks = midranks(&pooled);
    let mut offset = 0;
    let mut sum_sq = 0.0;
    for g in groups {
        let r: f64 = ranks[offset..offset + g.len()].iter().sum();
        sum_sq += r * r / g.len() as f64;
        offset += g.len();
    }
    let correction = 1.0 - tie_term(&pooled) / (n * n * n - n);
    let sizes = groups.iter().map(Vec::len).collect();
    if correction <= 0.0 {
        return Ok(TestResult {
            test: "kruskal_wallis".into(),
            statistic: 0.0,
            p_value: 1.0,
            n: sizes,
            method: Method::ChiSquareApproximation,
        });
    }
    // one division at the end keeps integer rank sums exact
    let nn1 = n * (n + 1.0);
    let h = ((12.0 * sum_sq - 3.0 * (n + 1.0) * nn1) / nn1 / correction).max(0.0);
    let df = (groups.len() - 1) as f64;
    let p = ChiSquared::new(df).expect("positive df").sf(h);
    Ok(TestResult {
        test: "kruskal_wallis".into(),
        statistic: h,
        p_value: p.clamp(0.0, 1.0),
        n: sizes,
        method: Method::ChiSquareApproximation,
    })
}

/// Smaller of the two U statistics; two-sided p from the tie-corrected
/// normal approximation.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::DegenerateInput(
            "Mann-Whitney sample is empty".into(),
        ));
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let r1: f64 = ranks[..a.len()].iter().sum();
    let u1 = r1 - n1 * (n1 + 1.0) / 2.0;
    let u = u1.min(n1 * n2 - u1);
    let variance = n1 * n2 / 12.0 * ((n + 1.0) - tie_term(&pooled) / (n * (n - 1.0)));
    Ok(TestResult {
        test: "mann_whitney_u".into(),
        statistic: u,
        p_value: normal_two_sided(u1 - n1 * n2 / 2.0, variance),
        n: vec![a.len(), b.len()],
        method: Method::NormalApproximation,
    })
}

/// Number of sign assignments per achievable doubled positive-rank sum.
fn signed_rank_counts(doubled: &[usize]) -> Vec<f64> {
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in doubled {
        reach += r;
        for s in (r..=reach).rev() {
            counts[s] += counts[s - r];
        }
    }
    counts
}

/// `W = min(W+, W-)` over non-zero differences. Exact two-sided p for up
/// to [`WILCOXON_EXACT_MAX_N`] differences, normal approximation with
/// continuity and tie correction beyond.
pub fn wilcoxon_signed_rank(differences: &[f64]) -> Result<TestResult> {
    let nz: Vec<f64> = differences.iter().copied().filter(|d| *d != 0.0).collect();
    if nz.is_empty() {
        return Err(Error::DegenerateInput(
            "all paired differences are zero".into(),
        ));
    }
    let mags: Vec<f64> = nz.iter().map(|d| d.abs()).collect();
    let ranks = midranks(&mags);
    let w_plus: f64 = ranks
        .iter()
        .zip(&nz)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let n = nz.len() as f64;
    let w_minus = n * (n + 1.0) / 2.0 - w_plus;
    let w = w_plus.min(w_minus);
    let (p, method) = if nz.len() <= WILCOXON_EXACT_MAX_N {
        // midranks are multiples of 0.5, so doubled ranks are integers
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let counts = signed_rank_counts(&doubled);
        let limit = (2.0 * w).round() as usize;
        let at_most: f64 = counts[..=limit].iter().sum();
        let total = 2f64.powi(nz.len() as i32);
        ((2.0 * at_most / total).min(1.0), Method::Exact)
    } else {
        let variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term(&mags) / 48.0;
        (
            normal_two_sided(w - n * (n + 1.0) / 4.0, variance),
            Method::NormalApproximation,
        )
    };
    Ok(TestResult {
        test: "wilcoxon_signed_rank".into(),
        statistic: w,
        p_value: p,
        n: vec![nz.len()],
        method,
    })
}
