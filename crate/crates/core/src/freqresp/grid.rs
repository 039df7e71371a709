//! Frequency grid shared by all sampled responses.

use crate::error::CoreError;
use crate::Result;

/// Ordered list of frequencies in Hz: strictly increasing, finite, all > 0.
///
/// Grid compatibility between two responses is *exact* (bitwise) equality of
/// the point lists. Resampling, if ever needed, must be an explicit step.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    /// Builds a grid from explicit points, validating the invariants.
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(CoreError::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        for (i, &f) in points.iter().enumerate() {
            if !f.is_finite() || f <= 0.0 {
                return Err(CoreError::InvalidGrid(format!(
                    "point {i} = {f} is not a finite positive frequency"
                )));
            }
            if i > 0 && f <= points[i - 1] {
                return Err(CoreError::InvalidGrid(format!(
                    "points must be strictly increasing: point {i} = {f} after {}",
                    points[i - 1]
                )));
            }
        }
        Ok(Self { points })
    }

    /// `n` logarithmically spaced points with `points[0] == f_min` and
    /// `points[n-1] == f_max` exactly.
    pub fn log_spaced(f_min: f64, f_max: f64, n: usize) -> Result<Self> {
        if !(f_min.is_finite() && f_max.is_finite()) || f_min <= 0.0 || f_min >= f_max {
            return Err(CoreError::InvalidGrid(format!(
                "log spacing requires 0 < f_min < f_max, got [{f_min}, {f_max}]"
            )));
        }
        if n < 2 {
            return Err(CoreError::InvalidGrid(format!(
                "log spacing requires n >= 2, got {n}"
            )));
        }
        let (lo, hi) = (f_min.ln(), f_max.ln());
        let mut points = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 / (n - 1) as f64;
            points.push((lo + t * (hi - lo)).exp());
        }
        // Pin the endpoints so they survive the round trip through ln/exp.
        points[0] = f_min;
        points[n - 1] = f_max;
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_decade_grid() {
        let g = FrequencyGrid::log_spaced(1.0, 100.0, 3).unwrap();
        assert_eq!(g.points()[0], 1.0);
        assert!((g.points()[1] - 10.0).abs() < 1e-12);
        assert_eq!(g.points()[2], 100.0);
    }

    #[test]
    fn degenerate_bounds_rejected() {
        assert!(FrequencyGrid::log_spaced(50.0, 50.0, 2).is_err());
        assert!(FrequencyGrid::log_spaced(100.0, 1.0, 5).is_err());
        assert!(FrequencyGrid::log_spaced(0.0, 1.0, 5).is_err());
        assert!(FrequencyGrid::log_spaced(1.0, 1000.0, 1).is_err());
    }

    #[test]
    fn neighbor_ratios_constant() {
        // Independent check of log spacing: ratio between neighbors is the
        // same everywhere.
        let g = FrequencyGrid::log_spaced(1.0, 1000.0, 61).unwrap();
        assert_eq!(g.len(), 61);
        let pts = g.points();
        let r0 = pts[1] / pts[0];
        for w in pts.windows(2) {
            let r = w[1] / w[0];
            assert!(
                (r / r0 - 1.0).abs() < 1e-12,
                "ratio {r} deviates from {r0}"
            );
        }
    }

    #[test]
    fn unsorted_and_nonpositive_rejected() {
        assert!(FrequencyGrid::new(vec![1.0, 1.0, 2.0]).is_err());
        assert!(FrequencyGrid::new(vec![2.0, 1.0]).is_err());
        assert!(FrequencyGrid::new(vec![-1.0, 1.0]).is_err());
        assert!(FrequencyGrid::new(vec![1.0, f64::NAN]).is_err());
    }
}
