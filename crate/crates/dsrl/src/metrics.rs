//! Scalar quality measures over node estimates.

use thiserror::Error;

use crate::point::{mean_point, Point};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
}

/// One row of diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub rmse: f64,
    pub disagreement: f64,
    pub objective: f64,
}

/// Root-mean-square localization error:
/// `sqrt(sum_i ||x_i - x_true||^2 / L)`.
pub fn rmse(estimates: &[Point], x_true: &Point) -> Result<f64, MetricsError> {
    if estimates.is_empty() {
        return Err(MetricsError::SizeMismatch("no estimates".into()));
    }
    for (i, e) in estimates.iter().enumerate() {
        if e.dim() != x_true.dim() {
            return Err(MetricsError::SizeMismatch(format!(
                "estimate {} has dimension {}, expected {}",
                i,
                e.dim(),
                x_true.dim()
            )));
        }
    }
    let sum: f64 = estimates
        .iter()
        .map(|e| {
            let d = e.distance_to(x_true);
            d * d
        })
        .sum();
    Ok((sum / estimates.len() as f64).sqrt())
}

/// Root-mean-square deviation of the estimates from their mean; zero iff all
/// estimates coincide. Defined via deviation-from-mean so that
/// `rmse^2 = disagreement^2 + ||mean - x_true||^2` holds exactly.
pub fn disagreement(estimates: &[Point]) -> f64 {
    assert!(!estimates.is_empty(), "disagreement of zero estimates");
    let center = mean_point(estimates);
    let sum: f64 = estimates
        .iter()
        .map(|e| {
            let d = e.distance_to(&center);
            d * d
        })
        .sum();
    (sum / estimates.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn rmse_zero_at_truth() {
        let t = Point::new(vec![1.0, 2.0, 3.0]);
        let estimates = vec![t.clone(); 5];
        assert_eq!(rmse(&estimates, &t).unwrap(), 0.0);
    }

    #[test]
    fn rmse_single_unit_offset() {
        let t = Point::zeros(3);
        let estimates = vec![Point::new(vec![1.0, 0.0, 0.0])];
        assert_eq!(rmse(&estimates, &t).unwrap(), 1.0);
    }

    #[test]
    fn rmse_mean_of_unit_offsets() {
        let t = Point::zeros(2);
        let estimates = vec![
            Point::new(vec![1.0, 0.0]),
            Point::new(vec![-1.0, 0.0]),
            Point::new(vec![0.0, 1.0]),
            Point::new(vec![0.0, -1.0]),
        ];
        assert_eq!(rmse(&estimates, &t).unwrap(), 1.0);
    }

    #[test]
    fn rmse_is_permutation_invariant() {
        let mut r = rng::stream(31, &[]);
        let t = Point::new(vec![0.3, -0.7]);
        let mut estimates: Vec<Point> = (0..8)
            .map(|_| Point::new((0..2).map(|_| r.gen_range(-2.0..2.0)).collect()))
            .collect();
        let before = rmse(&estimates, &t).unwrap();
        estimates.reverse();
        estimates.swap(1, 5);
        let after = rmse(&estimates, &t).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn disagreement_two_node_line() {
        let estimates = vec![Point::new(vec![0.0]), Point::new(vec![2.0])];
        assert_eq!(disagreement(&estimates), 1.0);
        assert_eq!(disagreement(&[Point::zeros(3), Point::zeros(3)]), 0.0);
    }

    #[test]
    fn disagreement_is_translation_invariant() {
        let mut r = rng::stream(32, &[]);
        let estimates: Vec<Point> = (0..6)
            .map(|_| Point::new((0..3).map(|_| r.gen_range(-2.0..2.0)).collect()))
            .collect();
        let shift = Point::new(vec![10.0, -4.0, 2.5]);
        let shifted: Vec<Point> = estimates.iter().map(|e| e.plus(&shift)).collect();
        let d0 = disagreement(&estimates);
        let d1 = disagreement(&shifted);
        assert!((d0 - d1).abs() < 1e-12);
    }

    #[test]
    fn bias_variance_identity() {
        // rmse^2 = disagreement^2 + ||mean - truth||^2, exactly.
        let mut r = rng::stream(33, &[]);
        for _ in 0..200 {
            let t = Point::new((0..3).map(|_| r.gen_range(-3.0..3.0)).collect());
            let estimates: Vec<Point> = (0..10)
                .map(|_| Point::new((0..3).map(|_| r.gen_range(-5.0..5.0)).collect()))
                .collect();
            let e = rmse(&estimates, &t).unwrap();
            let d = disagreement(&estimates);
            let bias = mean_point(&estimates).distance_to(&t);
            let lhs = e * e;
            let rhs = d * d + bias * bias;
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(1e-30));
        }
    }

    #[test]
    fn rmse_rejects_mismatched_dimensions() {
        let t = Point::zeros(3);
        let estimates = vec![Point::zeros(2)];
        assert!(rmse(&estimates, &t).is_err());
    }
}
