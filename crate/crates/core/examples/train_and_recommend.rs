//! Trains each baseline recommender on a synthetic train split and prints
//! the top five POIs for one user.

use fairpoi::corpus::{
    chronological_split, filter_sparse_default, generate_synthetic, SplitFractions, SyntheticConfig,
};
use fairpoi::recommenders::{top_k, train, ModelKind, ModelParams};

fn main() -> fairpoi::Result<()> {
    let data = filter_sparse_default(&generate_synthetic(&SyntheticConfig::default())?)?;
    let split = chronological_split(&data, SplitFractions::default())?;
    let user = split.train.users.iter().next().expect("users").clone();
    for kind in ModelKind::ALL {
        let model = train(
            kind,
            &split.train,
            &split.train.social,
            &ModelParams::default(),
        )?;
        let list = top_k(&model.score_candidates(&user)?, 5)?;
        let items: Vec<String> = list
            .items
            .iter()
            .map(|(p, s)| format!("{p}:{s:.3}"))
            .collect();
        println!("{:<10} {user}: {}", kind.name(), items.join(" "));
    }
    Ok(())
}
