//! Least-squares line fits shared by the exposure models and the USG
//! distance law.

use crate::error::{Error, Result};

/// Fitted `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub intercept: f64,
    pub slope: f64,
}

/// Minimizes `Σ (y - a - b x)^2 + ridge * b^2`; the intercept is not
/// penalized. Needs at least two distinct `x` values.
pub fn fit_line(xs: &[f64], ys: &[f64], ridge: f64) -> Result<Line> {
    if xs.len() != ys.len() {
        return Err(Error::Fit(format!(
            "length mismatch: {} x values, {} y values",
            xs.len(),
            ys.len()
        )));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::Fit(format!(
            "ridge strength must be >= 0, got {ridge}"
        )));
    }
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return Err(Error::Fit("need at least two points".into()));
    }
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        sxx += dx * dx;
        sxy += dx * (y - mean_y);
    }
    if sxx <= 0.0 {
        return Err(Error::Fit("all x values are identical".into()));
    }
    let slope = sxy / (sxx + ridge);
    Ok(Line {
        intercept: mean_y - slope * mean_x,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs: Vec<f64> = (1..=9).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 10.0 - x).collect();
        let l = fit_line(&xs, &ys, 0.0).unwrap();
        assert!((l.intercept - 10.0).abs() < 1e-12);
        assert!((l.slope + 1.0).abs() < 1e-12);
    }

    #[test]
    fn ridge_shrinks_slope() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 2.0, 4.0];
        // sxx = 2, sxy = 4 -> slope 4 / (2 + 2) = 1
        let l = fit_line(&xs, &ys, 2.0).unwrap();
        assert_eq!(l.slope, 1.0);
        assert_eq!(l.intercept, 1.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_line(&[1.0, 1.0], &[2.0, 3.0], 0.0).is_err());
        assert!(fit_line(&[1.0], &[2.0], 0.0).is_err());
    }
}
