use serde::{Deserialize, Serialize};

/// One configuration in the (user GCE, item GCE) plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub label: String,
    pub user_gce: f64,
    pub item_gce: f64,
    pub precision: f64,
}

/// `true` for points no other point dominates when maximizing both GCEs.
/// Points with a non-finite coordinate are never on the front.
pub fn pareto_mask(points: &[ParetoPoint]) -> Vec<bool> {
    let finite = |p: &ParetoPoint| p.user_gce.is_finite() && p.item_gce.is_finite();
    let mut order: Vec<usize> = (0..points.len()).filter(|&i| finite(&points[i])).collect();
    order.sort_by(|&a, &b| {
        points[b]
            .user_gce
            .total_cmp(&points[a].user_gce)
            .then(points[b].item_gce.total_cmp(&points[a].item_gce))
    });
    let mut mask = vec![false; points.len()];
    // best item GCE among points with strictly larger user GCE
    let mut best_before = f64::NEG_INFINITY;
    let mut i = 0;
    while i < order.len() {
        let x = points[order[i]].user_gce;
        let mut j = i;
        while j < order.len() && points[order[j]].user_gce == x {
            j += 1;
        }
        // within a tie block the first entry has the largest item GCE
        let top = points[order[i]].item_gce;
        for &ix in &order[i..j] {
            let y = points[ix].item_gce;
            mask[ix] = y == top && y > best_before;
        }
        best_before = best_before.max(top);
        i = j;
    }
    mask
}

pub fn pareto_front(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    points
        .iter()
        .zip(pareto_mask(points))
        .filter(|(_, on)| *on)
        .map(|(p, _)| p.clone())
        .collect()
}
