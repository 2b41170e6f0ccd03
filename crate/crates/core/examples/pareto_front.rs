//! Extracts the Pareto front of random (user GCE, item GCE) points.

use fairpoi::metrics::{pareto_front, ParetoPoint};
use fairpoi::rng::SeededRng;

fn main() {
    let mut rng = SeededRng::new(7);
    let points: Vec<ParetoPoint> = (0..30)
        .map(|i| ParetoPoint {
            label: format!("config-{i:02}"),
            user_gce: -rng.uniform(),
            item_gce: -rng.uniform(),
            precision: rng.uniform() * 0.1,
        })
        .collect();
    let mut front = pareto_front(&points);
    front.sort_by(|a, b| b.user_gce.total_cmp(&a.user_gce));
    println!(
        "{} of {} points are non-dominated:",
        front.len(),
        points.len()
    );
    for p in front {
        println!(
            "  {}  user {:.3}  item {:.3}  precision {:.3}",
            p.label, p.user_gce, p.item_gce, p.precision
        );
    }
}
