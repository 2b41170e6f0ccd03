use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Dataset;

/// `(x, y)`: `y` POIs have exactly `x >= 1` train check-ins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularityHistogram {
    pub points: Vec<(u64, u64)>,
    /// POIs with no train check-ins.
    pub zero_count: u64,
}

impl PopularityHistogram {
    pub fn from_counts(counts: impl IntoIterator<Item = u64>) -> Self {
        let mut by_x: BTreeMap<u64, u64> = BTreeMap::new();
        let mut zero_count = 0;
        for c in counts {
            if c == 0 {
                zero_count += 1;
            } else {
                *by_x.entry(c).or_insert(0) += 1;
            }
        }
        Self {
            points: by_x.into_iter().collect(),
            zero_count,
        }
    }

    pub fn num_pois(&self) -> u64 {
        self.points.iter().map(|p| p.1).sum::<u64>() + self.zero_count
    }

    pub fn x_min(&self) -> Option<u64> {
        self.points.first().map(|p| p.0)
    }

    pub fn distinct_x(&self) -> usize {
        self.points.len()
    }

    /// Per-POI counts in descending order, zero-count POIs last.
    pub fn counts_descending(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.num_pois() as usize);
        for &(x, y) in self.points.iter().rev() {
            out.extend(std::iter::repeat_n(x, y as usize));
        }
        out.extend(std::iter::repeat_n(0, self.zero_count as usize));
        out
    }
}

/// Histogram of train check-in counts over every POI in the dataset.
pub fn build_popularity_histogram(train: &Dataset) -> PopularityHistogram {
    let counts = train.poi_checkin_counts();
    PopularityHistogram::from_counts(
        train
            .pois
            .keys()
            .map(|p| counts.get(p).copied().unwrap_or(0)),
    )
}
