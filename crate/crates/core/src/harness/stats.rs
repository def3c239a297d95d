//! Summary statistics for Monte Carlo samples.

use serde::Serialize;

/// Quantile by linear interpolation between order statistics
/// (Hyndman-Fan type 7). `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxplotStats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Most extreme samples within 1.5 IQR of the quartiles.
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

impl BoxplotStats {
    /// `None` for an empty sample. NaNs are dropped.
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        let mut xs: Vec<f64> = samples.iter().copied().filter(|x| !x.is_nan()).collect();
        if xs.is_empty() {
            return None;
        }
        xs.sort_by(f64::total_cmp);
        let q1 = quantile_sorted(&xs, 0.25);
        let median = quantile_sorted(&xs, 0.5);
        let q3 = quantile_sorted(&xs, 0.75);
        let iqr = q3 - q1;
        let (fence_lo, fence_hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let inside = xs.iter().copied().filter(|&x| x >= fence_lo && x <= fence_hi);
        let whisker_low = inside.clone().fold(f64::INFINITY, f64::min);
        let whisker_high = inside.fold(f64::NEG_INFINITY, f64::max);
        let outliers = xs.iter().copied().filter(|&x| x < fence_lo || x > fence_hi).collect();
        Some(Self {
            count: xs.len(),
            mean: mean(&xs).expect("non-empty"),
            min: xs[0],
            q1,
            median,
            q3,
            max: xs[xs.len() - 1],
            whisker_low,
            whisker_high,
            outliers,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_interpolate() {
        let s = BoxplotStats::from_samples(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (1.75, 2.5, 3.25));
        assert_eq!((s.whisker_low, s.whisker_high), (1.0, 4.0));
        assert!(s.outliers.is_empty());
    }

    #[test]
    fn far_point_is_an_outlier() {
        let s = BoxplotStats::from_samples(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!(s.outliers, [100.0]);
        assert_eq!(s.whisker_high, 4.0);
        assert_eq!(s.max, 100.0);
    }

    #[test]
    fn single_sample() {
        let s = BoxplotStats::from_samples(&[7.0]).unwrap();
        assert_eq!(
            (s.q1, s.median, s.q3, s.whisker_low, s.whisker_high),
            (7.0, 7.0, 7.0, 7.0, 7.0)
        );
        assert!(BoxplotStats::from_samples(&[]).is_none());
    }
}
