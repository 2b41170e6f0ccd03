//! Reads a configuration from TOML text, applies `section.key=value`
//! overrides and prints the resulting hash and settings.

use fairpoi::runner::{env_overrides, flatten, ExperimentConfig};

const TEXT: &str = r#"
[synthetic]
n_users = 100
n_pois = 250

[sweep]
alpha_grid = [0.0, 0.5, 1.0]
k_list = [10]
"#;

fn main() -> fairpoi::Result<()> {
    let env = env_overrides([("FAIRPOI_RUN__SEED".to_string(), "7".to_string())]);
    let mut overrides = env.clone();
    overrides.push("sweep.beta_grid=[0.0, 0.5]".into());
    let cfg = ExperimentConfig::from_toml_with_overrides(TEXT, &overrides)?;
    println!("environment gives {env:?}");
    println!("config hash {}", cfg.config_hash());
    for (k, v) in flatten(&cfg)
        .iter()
        .filter(|(k, _)| k.starts_with("sweep.") || k.starts_with("run."))
    {
        println!("  {k} = {v}");
    }
    println!("\nas TOML:\n{}", cfg.to_toml());
    Ok(())
}
