//! Runs the full sweep on the default synthetic corpus, writes the result
//! tables to a directory and prints long-tail exposure against alpha.
//!
//! cargo run --release --example fairness_sweep -- [out-dir]

use fairpoi::runner::{run_sweep, ExperimentConfig};

fn main() -> fairpoi::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "fairpoi-out".into());
    let cfg = ExperimentConfig::from_toml_with_overrides(
        "",
        &[
            format!("run.out={}", toml_quote(&out)),
            "sweep.k_list=[10]".into(),
        ],
    )?;
    let result = run_sweep(&cfg, false)?;
    println!("{} rows, tables in {out}", result.rows.len());
    println!(
        "{:<11} {:<9} {:>6} {:>10} {:>10}",
        "model", "family", "alpha", "precision", "long-tail"
    );
    for r in result.rows.iter().filter(|r| r.beta == 0.0) {
        println!(
            "{:<11} {:<9} {:>6} {:>10.4} {:>10.4}",
            r.model, r.exposure_family, r.alpha, r.precision, r.exp_longtail
        );
    }
    Ok(())
}

fn toml_quote(s: &str) -> String {
    format!("{s:?}")
}
