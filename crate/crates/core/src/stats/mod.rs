//! Rank-based hypothesis tests: Kruskal-Wallis, Mann-Whitney U and the
//! Wilcoxon signed-rank test.

mod rank;
mod tests_impl;

pub use rank::{midranks, tie_sizes};
pub use tests_impl::{
    kruskal_wallis, mann_whitney_u, wilcoxon_signed_rank, Method, TestResult, SIGNIFICANCE_LEVEL,
    WILCOXON_EXACT_MAX_N,
};
