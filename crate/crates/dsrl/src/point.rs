//! Dense n-dimensional coordinate vectors.
//!
//! Sensor positions, source locations, and node estimates are all [`Point`]s.
//! The dimension is dynamic (1-D test fixtures, 3-D deployments) and fixed at
//! construction.

use std::ops::{Index, IndexMut};

/// An n-dimensional real coordinate vector in abstract length units.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Wrap a coordinate vector. Panics on an empty vector; finiteness is the
    /// caller's concern (solvers check for non-finite states explicitly).
    pub fn new(coords: Vec<f64>) -> Self {
        assert!(!coords.is_empty(), "Point must have dimension >= 1");
        Self { coords }
    }

    /// The origin of `dim`-dimensional space.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "Point must have dimension >= 1");
        Self {
            coords: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Euclidean distance to `other`.
    pub fn distance_to(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// `self - other` as a new point.
    pub fn minus(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `self + other` as a new point.
    pub fn plus(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// `s * self` as a new point.
    pub fn scaled(&self, s: f64) -> Point {
        Point {
            coords: self.coords.iter().map(|c| s * c).collect(),
        }
    }

    /// In-place `self += s * (a - b)`. The workhorse of the diffusion step.
    pub fn add_scaled_diff(&mut self, s: f64, a: &Point, b: &Point) {
        debug_assert_eq!(self.dim(), a.dim());
        debug_assert_eq!(self.dim(), b.dim());
        for ((c, &ca), &cb) in self.coords.iter_mut().zip(&a.coords).zip(&b.coords) {
            *c += s * (ca - cb);
        }
    }

    /// In-place `self += s * a`.
    pub fn add_scaled(&mut self, s: f64, a: &Point) {
        debug_assert_eq!(self.dim(), a.dim());
        for (c, &ca) in self.coords.iter_mut().zip(&a.coords) {
            *c += s * ca;
        }
    }

    /// Overwrite with the coordinates of `other`.
    pub fn copy_from(&mut self, other: &Point) {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords.copy_from_slice(&other.coords);
    }

    pub fn fill(&mut self, value: f64) {
        self.coords.fill(value);
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

impl IndexMut<usize> for Point {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.coords[i]
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point::new(coords)
    }
}

/// Coordinate-wise mean of a nonempty set of points.
pub fn mean_point(points: &[Point]) -> Point {
    assert!(!points.is_empty(), "mean of zero points");
    let mut acc = Point::zeros(points[0].dim());
    for p in points {
        acc.add_scaled(1.0, p);
    }
    acc.scaled(1.0 / points.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_and_distance() {
        let p = Point::new(vec![3.0, 4.0, 0.0]);
        assert_eq!(p.norm(), 5.0);
        assert_eq!(p.distance_to(&Point::zeros(3)), 5.0);
    }

    #[test]
    fn add_scaled_diff_matches_formula() {
        let mut v = Point::new(vec![1.0, 2.0]);
        let a = Point::new(vec![3.0, 0.0]);
        let b = Point::new(vec![1.0, 1.0]);
        v.add_scaled_diff(0.5, &a, &b);
        assert_eq!(v.coords(), &[2.0, 1.5]);
    }

    #[test]
    fn mean_of_two() {
        let m = mean_point(&[Point::new(vec![0.0]), Point::new(vec![2.0])]);
        assert_eq!(m.coords(), &[1.0]);
    }

    #[test]
    #[should_panic]
    fn empty_point_rejected() {
        Point::new(vec![]);
    }
}
