//! Order-deterministic reductions for Monte Carlo estimates.

use serde::{Deserialize, Serialize};

/// Pairwise (cascade) summation. The result depends only on the order of
/// `xs`, never on how work was scheduled to produce it.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`.
    pub std_error: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, std_error: f64::NAN, n };
        }
        let mean = pairwise_sum(xs) / n as f64;
        if n == 1 {
            return Self { mean, std_error: 0.0, n };
        }
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = pairwise_sum(&dev) / (n - 1) as f64;
        Self { mean, std_error: (var / n as f64).sqrt(), n }
    }

    /// Standardized distance of the estimate from `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.std_error > 0.0 {
            (self.mean - target) / self.std_error
        } else if self.mean == target {
            0.0
        } else {
            f64::INFINITY.copysign(self.mean - target)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_sum() {
        let xs: Vec<f64> = (1..=10_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 50_005_000.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn mean_and_error() {
        let e = MeanEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((e.std_error - sd / 2.0).abs() < 1e-15);
        assert_eq!(MeanEstimate::from_samples(&[7.0]).std_error, 0.0);
        assert_eq!(e.z_score(2.5), 0.0);
    }
}
