//! Generates a seeded synthetic corpus, filters and splits it, and prints
//! the train statistics and group sizes.
//!
//! cargo run --example synthetic_corpus -- [seed]

use fairpoi::corpus::{
    assign_groups, chronological_split, dataset_stats, filter_sparse_default, generate_synthetic,
    SplitFractions, SyntheticConfig,
};

fn main() -> fairpoi::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(42);
    let cfg = SyntheticConfig {
        rng_seed: seed,
        ..Default::default()
    };
    let raw = generate_synthetic(&cfg)?;
    let filtered = filter_sparse_default(&raw)?;
    println!(
        "raw: {} users, {} POIs, {} check-ins; filtered: {} users, {} POIs, {} check-ins",
        raw.num_users(),
        raw.num_pois(),
        raw.num_checkins(),
        filtered.num_users(),
        filtered.num_pois(),
        filtered.num_checkins()
    );
    let split = chronological_split(&filtered, SplitFractions::default())?;
    println!(
        "split: train {}, validation {}, test {}",
        split.train.num_checkins(),
        split.validation.num_checkins(),
        split.test.num_checkins()
    );
    let groups = assign_groups(&split.train)?;
    print!("{}", dataset_stats(&split.train, &groups).to_key_value());
    Ok(())
}
