//! Fits the three exposure families to the train popularity histogram and
//! prints each provider score curve.

use fairpoi::corpus::{
    chronological_split, filter_sparse_default, generate_synthetic, SplitFractions, SyntheticConfig,
};
use fairpoi::fairness::{
    build_popularity_histogram, fit_exposure, ExposureFamily, DEFAULT_RIDGE_LAMBDA,
};

fn main() -> fairpoi::Result<()> {
    let data = filter_sparse_default(&generate_synthetic(&SyntheticConfig::default())?)?;
    let split = chronological_split(&data, SplitFractions::default())?;
    let h = build_popularity_histogram(&split.train);
    println!(
        "histogram: {} POIs over {} distinct counts",
        h.num_pois(),
        h.distinct_x()
    );

    let counts = [1u64, 5, 10, 20, 40, 80, 160];
    print!("{:<10}", "count");
    for c in counts {
        print!("{c:>8}");
    }
    println!();
    for family in ExposureFamily::ALL {
        let m = fit_exposure(family, &h, DEFAULT_RIDGE_LAMBDA)?;
        print!("{:<10}", family.name());
        for c in counts {
            print!("{:>8.3}", m.provider_score(c));
        }
        println!("   {:?}", m.params);
    }
    Ok(())
}
