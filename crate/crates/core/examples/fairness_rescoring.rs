//! Re-scores one inactive user's candidates with the provider and consumer
//! factors and shows how the top ten changes with the weights.

use fairpoi::corpus::{
    assign_groups, chronological_split, filter_sparse_default, generate_synthetic, ItemGroup,
    SplitFractions, SyntheticConfig, UserGroup,
};
use fairpoi::fairness::{
    build_consumer_context, build_popularity_histogram, fit_exposure, rescore, ExposureFamily,
    FairnessWeights, DEFAULT_RIDGE_LAMBDA,
};
use fairpoi::recommenders::{top_k, train, ModelKind, ModelParams};

fn main() -> fairpoi::Result<()> {
    let data = filter_sparse_default(&generate_synthetic(&SyntheticConfig::default())?)?;
    let split = chronological_split(&data, SplitFractions::default())?;
    let train_split = &split.train;
    let groups = assign_groups(train_split)?;
    let model = train(
        ModelKind::Usg,
        train_split,
        &train_split.social,
        &ModelParams::default(),
    )?;
    let family = ExposureFamily::Linear;
    let exposure = fit_exposure(
        family,
        &build_popularity_histogram(train_split),
        DEFAULT_RIDGE_LAMBDA,
    )?;
    let consumer = build_consumer_context(train_split, &groups, &train_split.pois);

    let user = groups
        .users_in(UserGroup::Inactive)
        .next()
        .expect("inactive users")
        .clone();
    let base = model.score_candidates(&user)?;
    let provider = base
        .entries
        .iter()
        .map(|(p, _)| {
            (
                p.clone(),
                exposure.provider_score(consumer.checkin_count(p)),
            )
        })
        .collect();
    let consumer_scores = consumer.scores_for(&user);
    println!(
        "user {user}: {} candidates, {} nearby popular POIs, threshold {:.2} km",
        base.entries.len(),
        consumer_scores.len(),
        consumer.threshold_km(&user).unwrap_or(f64::NAN)
    );
    for (alpha, beta) in [(0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (0.0, 1.0), (0.5, 0.5)] {
        let w = FairnessWeights::new(alpha, beta, family);
        let list = top_k(&rescore(&base, &provider, &consumer_scores, &w)?, 10)?;
        let long_tail = list
            .poi_ids()
            .filter(|p| groups.item(p) == Some(ItemGroup::LongTail))
            .count();
        let ids: Vec<&str> = list.poi_ids().map(|p| p.as_str()).collect();
        println!(
            "alpha={alpha:<4} beta={beta:<4} long-tail={long_tail:>2}  {}",
            ids.join(" ")
        );
    }
    Ok(())
}
