use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CheckIn, Dataset};
use crate::error::{Error, Result};
use crate::ids::UserId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.7,
            validation: 0.2,
            test: 0.1,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::Config(format!("invalid split fractions {parts:?}")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split fractions must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }

    /// `(train, validation, test)` sizes for a user with `n` check-ins.
    ///
    /// Train and validation take `ceil(fraction * n)`; test gets the rest.
    /// When the two ceilings leave nothing for test, one check-in is moved
    /// from validation (or from train if validation has at most one).
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        // 1e-9 guard so that e.g. 0.7 * 10 does not ceil to 8
        let ceil = |f: f64| ((f * n as f64) - 1e-9).ceil().max(0.0) as usize;
        let mut train = ceil(self.train).min(n);
        let mut val = ceil(self.validation).min(n - train);
        if n >= 2 && train + val >= n && self.test > 0.0 {
            if val > 1 || (val == 1 && train == 0) {
                val -= 1;
            } else if train > 1 {
                train -= 1;
            } else {
                val = val.saturating_sub(1);
            }
        }
        (train, val, n - train - val)
    }
}

/// Train, validation and test views over the same entity tables.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
}

impl SplitDataset {
    pub fn part(&self, split: Split) -> &Dataset {
        match split {
            Split::Train => &self.train,
            Split::Validation => &self.validation,
            Split::Test => &self.test,
        }
    }
}

/// Splits each user's check-ins in time order: the earliest fraction goes
/// to train, the next to validation, the remainder to test. Ties in time
/// are broken by POI id. Every check-in is tagged with its split.
pub fn chronological_split(d: &Dataset, fractions: SplitFractions) -> Result<SplitDataset> {
    fractions.validate()?;
    let mut per_user: BTreeMap<&UserId, Vec<&CheckIn>> = BTreeMap::new();
    for c in &d.checkins {
        per_user.entry(&c.user).or_default().push(c);
    }
    let mut train = Vec::new();
    let mut validation = Vec::new();
    let mut test = Vec::new();
    for (user, mut seq) in per_user {
        seq.sort_by(|a, b| (a.timestamp, &a.poi).cmp(&(b.timestamp, &b.poi)));
        let (n_train, n_val, n_test) = fractions.sizes(seq.len());
        if n_test == 0 && fractions.test > 0.0 {
            return Err(Error::DegenerateInput(format!(
                "user {user} has {} check-ins, too few for a nonempty test split",
                seq.len()
            )));
        }
        for (i, c) in seq.into_iter().enumerate() {
            let (dest, tag) = if i < n_train {
                (&mut train, Split::Train)
            } else if i < n_train + n_val {
                (&mut validation, Split::Validation)
            } else {
                (&mut test, Split::Test)
            };
            let mut c = c.clone();
            c.split = Some(tag);
            dest.push(c);
        }
    }
    Ok(SplitDataset {
        train: d.with_checkins(train),
        validation: d.with_checkins(validation),
        test: d.with_checkins(test),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Poi;

    fn user_dataset(events: &[(&str, &str, i64)]) -> Dataset {
        let mut d = Dataset::default();
        for (u, p, t) in events {
            d.users.insert((*u).into());
            d.pois
                .entry((*p).into())
                .or_insert_with(|| Poi::new(*p, 0.0, 0.0));
            d.checkins.push(CheckIn::new(*u, *p, *t));
        }
        d
    }

    #[test]
    fn ten_checkins_split_seven_two_one() {
        let events: Vec<(String, i64)> = (1..=10).rev().map(|t| (format!("p{t:02}"), t)).collect();
        let ev: Vec<(&str, &str, i64)> =
            events.iter().map(|(p, t)| ("u", p.as_str(), *t)).collect();
        let s = chronological_split(&user_dataset(&ev), SplitFractions::default()).unwrap();
        let ts = |d: &Dataset| {
            let mut v: Vec<i64> = d.checkins.iter().map(|c| c.timestamp).collect();
            v.sort();
            v
        };
        assert_eq!(ts(&s.train), (1..=7).collect::<Vec<_>>());
        assert_eq!(ts(&s.validation), vec![8, 9]);
        assert_eq!(ts(&s.test), vec![10]);
        assert!(s.test.checkins.iter().all(|c| c.split == Some(Split::Test)));
    }

    #[test]
    fn equal_timestamps_break_ties_by_poi() {
        let ev: Vec<(String, i64)> = (0..10).map(|i| (format!("p{}", 9 - i), 5)).collect();
        let ev: Vec<(&str, &str, i64)> = ev.iter().map(|(p, t)| ("u", p.as_str(), *t)).collect();
        let a = chronological_split(&user_dataset(&ev), SplitFractions::default()).unwrap();
        assert_eq!(a.test.checkins[0].poi.as_str(), "p9");
        let mut rev = ev.clone();
        rev.reverse();
        let b = chronological_split(&user_dataset(&rev), SplitFractions::default()).unwrap();
        assert_eq!(a.test.checkins, b.test.checkins);
        assert_eq!(
            a.validation
                .checkins
                .iter()
                .map(|c| &c.poi)
                .collect::<Vec<_>>(),
            b.validation
                .checkins
                .iter()
                .map(|c| &c.poi)
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn fractions_must_sum_to_one() {
        let d = user_dataset(&[("u", "p", 1)]);
        let bad = SplitFractions {
            train: 0.7,
            validation: 0.2,
            test: 0.2,
        };
        assert!(matches!(
            chronological_split(&d, bad),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn sizes_never_leave_test_empty_from_ten_up() {
        let f = SplitFractions::default();
        assert_eq!(f.sizes(10), (7, 2, 1));
        // ceil(7.7) + ceil(2.2) = 11 would starve test
        assert_eq!(f.sizes(11), (8, 2, 1));
        assert_eq!(f.sizes(16), (12, 3, 1));
        assert_eq!(f.sizes(100), (70, 20, 10));
        for n in 10..2000 {
            let (a, b, c) = f.sizes(n);
            assert_eq!(a + b + c, n);
            assert!(c >= 1, "n = {n}");
        }
    }
}
