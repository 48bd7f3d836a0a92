//! Dimension-generic Euclidean primitives.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A point of ℝ^d.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn origin(d: usize) -> Self {
        Point(vec![0.0; d])
    }

    /// `t · e_axis`.
    pub fn on_axis(d: usize, axis: usize, t: f64) -> Self {
        let mut c = vec![0.0; d];
        c[axis] = t;
        Point(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        distance(&self.0, &other.0)
    }

    /// Distance to the unit sphere, `1 − |x|`.
    pub fn boundary_distance(&self) -> f64 {
        1.0 - self.norm()
    }

    pub fn scaled(&self, s: f64) -> Point {
        Point(self.0.iter().map(|x| x * s).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A point τ of the unit sphere 𝕊.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint(Vec<f64>);

impl BoundaryPoint {
    /// Normalizes `direction`; fails for the zero vector.
    pub fn new(direction: Vec<f64>) -> Result<Self> {
        let n = norm(&direction);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter(
                "boundary direction must be a nonzero finite vector".into(),
            ));
        }
        Ok(BoundaryPoint(direction.into_iter().map(|x| x / n).collect()))
    }

    pub fn axis(d: usize, axis: usize) -> Self {
        let mut c = vec![0.0; d];
        c[axis] = 1.0;
        BoundaryPoint(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// The ball B(center, radius); whether it is open or closed is up to the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Self {
        debug_assert!(radius >= 0.0);
        Ball { center, radius }
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Signed distance from `x` to the sphere bounding the ball (negative inside).
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        distance(self.center.coords(), x) - self.radius
    }
}

/// Closed axis-aligned cube given by center and sidelength.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisCube {
    pub center: Point,
    pub side: f64,
}

impl AxisCube {
    pub fn new(center: Point, side: f64) -> Self {
        AxisCube { center, side }
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn diameter(&self) -> f64 {
        self.side * (self.dim() as f64).sqrt()
    }

    pub fn circumradius(&self) -> f64 {
        0.5 * self.diameter()
    }

    /// The concentric cube with sidelength multiplied by `factor`.
    pub fn dilated(&self, factor: f64) -> AxisCube {
        AxisCube::new(self.center.clone(), self.side * factor)
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim() as i32)
    }

    /// Euclidean distance from `x` to the closed cube (0 inside).
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        let h = 0.5 * self.side;
        x.iter()
            .zip(self.center.coords())
            .map(|(xi, ci)| {
                let e = (xi - ci).abs() - h;
                if e > 0.0 {
                    e * e
                } else {
                    0.0
                }
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Distance from an interior point `x` to the complement of the cube (0 outside).
    pub fn depth_of(&self, x: &[f64]) -> f64 {
        let h = 0.5 * self.side;
        x.iter()
            .zip(self.center.coords())
            .map(|(xi, ci)| h - (xi - ci).abs())
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let h = 0.5 * self.side;
        x.iter()
            .zip(self.center.coords())
            .all(|(xi, ci)| (xi - ci).abs() <= h)
    }

    /// Largest `|x|` over the cube.
    pub fn max_norm(&self) -> f64 {
        let h = 0.5 * self.side;
        self.center
            .coords()
            .iter()
            .map(|c| {
                let m = c.abs() + h;
                m * m
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Smallest `|x|` over the cube.
    pub fn min_norm(&self) -> f64 {
        self.distance_to(&vec![0.0; self.dim()])
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Γ(d/2) for integer d, exact recursion.
fn gamma_half(d: usize) -> f64 {
    if d % 2 == 0 {
        (1..d / 2).map(|k| k as f64).product()
    } else {
        // Γ(1/2) = √π, Γ(k + 1/2) = (k − 1/2) Γ(k − 1/2)
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x + 1.0 <= d as f64 / 2.0 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Surface area of the unit sphere in ℝ^d, `2π^{d/2}/Γ(d/2)`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

/// Volume of the unit ball in ℝ^d, σ_d = `π^{d/2}/Γ(d/2 + 1)`.
pub fn ball_volume(d: usize) -> f64 {
    sphere_area(d) / d as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_ball_constants() {
        assert_relative_eq!(sphere_area(2), 2.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, epsilon = 1e-13);
        assert_relative_eq!(ball_volume(3), 4.0 * PI / 3.0, epsilon = 1e-14);
        assert_relative_eq!(ball_volume(5), 8.0 * PI * PI / 15.0, epsilon = 1e-13);
    }

    #[test]
    fn cube_distances() {
        let q = AxisCube::new(Point::new(vec![0.0, 0.0, 0.0]), 0.5);
        assert_relative_eq!(q.distance_to(&[1.0, 0.0, 0.0]), 0.75);
        assert_eq!(q.distance_to(&[0.1, 0.1, 0.1]), 0.0);
        assert_relative_eq!(q.depth_of(&[0.2, 0.0, 0.0]), 0.05, epsilon = 1e-15);
        assert_relative_eq!(q.max_norm(), 0.1875f64.sqrt(), epsilon = 1e-15);
        assert_eq!(q.min_norm(), 0.0);
    }

    #[test]
    fn boundary_point_is_normalized() {
        let t = BoundaryPoint::new(vec![3.0, 4.0, 0.0]).unwrap();
        assert!((norm(t.coords()) - 1.0).abs() < 1e-12);
        assert!(BoundaryPoint::new(vec![0.0; 3]).is_err());
    }
}
