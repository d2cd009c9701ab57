//! Planar primitives in image coordinates (x right, y down).
//!
//! All angles follow the image convention: increasing `atan2(dy, dx)` sweeps
//! clockwise on screen because y grows downward. "Clockwise" throughout the
//! crate means visually clockwise in that frame, which corresponds to a
//! positive shoelace signed area.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

/// A point (or vector) in the image plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ZERO: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(&self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product, on raw image coordinates.
    pub fn cross(&self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(&self, other: Point2) -> f64 {
        (*self - other).norm()
    }

    /// Clockwise angle of this vector from the +x axis, in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        let a = self.y.atan2(self.x);
        if a < 0.0 {
            a + TAU
        } else {
            a
        }
    }

    /// Rotate by `theta` (clockwise on screen for positive `theta`).
    pub fn rotated(&self, theta: f64) -> Point2 {
        let (s, c) = theta.sin_cos();
        Point2::new(self.x * c - self.y * s, self.x * s + self.y * c)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Signed shoelace area of a closed polygon. Positive for a visually
/// clockwise traversal in image coordinates.
pub fn signed_area(points: &[Point2]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (i, p) in points.iter().enumerate() {
        let q = points[(i + 1) % points.len()];
        acc += p.cross(q);
    }
    acc / 2.0
}

/// Length of the closed polyline through `points`.
pub fn perimeter(points: &[Point2]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (i, p) in points.iter().enumerate() {
        acc += p.dist(points[(i + 1) % points.len()]);
    }
    acc
}

/// Arithmetic mean of a non-empty point set.
pub fn centroid(points: &[Point2]) -> Point2 {
    let n = points.len() as f64;
    let sum = points
        .iter()
        .fold(Point2::ZERO, |acc, p| acc + *p);
    Point2::new(sum.x / n, sum.y / n)
}

/// Perpendicular distance from `p` to the infinite line through `a` and `b`.
/// `a` and `b` must be distinct.
pub fn point_line_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    (ab.cross(p - a)).abs() / ab.norm()
}
