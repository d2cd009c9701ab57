//! Closed contours: construction, resampling and normalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Point2};

/// Traversal direction of a closed contour, in image coordinates
/// (y down). Clockwise means positive shoelace signed area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Clockwise,
    Counterclockwise,
}

/// Translation and scale removed by [`Contour::normalize`], kept for the
/// inverse mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRecord {
    pub centroid: Point2,
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ContourRepr {
    points: Vec<[f64; 2]>,
    closed: bool,
}

/// A closed polygonal contour: at least 3 points, no two consecutive points
/// identical, last point connecting back to the first.
///
/// The JSON form is `{"points": [[x, y], ...], "closed": true}`; the first
/// point is not repeated at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ContourRepr", into = "ContourRepr")]
pub struct Contour {
    points: Vec<Point2>,
    orientation: Orientation,
}

/// Relative tolerance (times the bounding-box diagonal) below which
/// consecutive points are treated as duplicates.
const DEDUP_REL_TOL: f64 = 1e-12;

impl Contour {
    /// Build a contour from an ordered closed point list. Consecutive
    /// duplicates (within `1e-12` of the bounding-box diagonal) are dropped,
    /// including a trailing repeat of the first point.
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinitePoint);
        }
        let tol = DEDUP_REL_TOL * bbox_diagonal(&points);
        let mut deduped: Vec<Point2> = Vec::with_capacity(points.len());
        for p in points {
            if deduped.last().is_none_or(|last| last.dist(p) > tol) {
                deduped.push(p);
            }
        }
        while deduped.len() > 1 && deduped[0].dist(*deduped.last().unwrap()) <= tol {
            deduped.pop();
        }
        if deduped.len() < 3 {
            return Err(Error::TooFewPoints(deduped.len()));
        }
        let orientation = if geometry::signed_area(&deduped) >= 0.0 {
            Orientation::Clockwise
        } else {
            Orientation::Counterclockwise
        };
        Ok(Contour {
            points: deduped,
            orientation,
        })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn signed_area(&self) -> f64 {
        geometry::signed_area(&self.points)
    }

    pub fn perimeter(&self) -> f64 {
        geometry::perimeter(&self.points)
    }

    pub fn centroid(&self) -> Point2 {
        geometry::centroid(&self.points)
    }

    /// Reverse traversal direction while keeping the first point first.
    pub fn reversed(&self) -> Contour {
        let mut pts = self.points.clone();
        pts[1..].reverse();
        Contour {
            points: pts,
            orientation: match self.orientation {
                Orientation::Clockwise => Orientation::Counterclockwise,
                Orientation::Counterclockwise => Orientation::Clockwise,
            },
        }
    }

    /// Same geometry traversed clockwise; first point preserved.
    pub fn clockwise(&self) -> Contour {
        match self.orientation {
            Orientation::Clockwise => self.clone(),
            Orientation::Counterclockwise => self.reversed(),
        }
    }

    /// Apply `f` to every point. The caller must keep the mapping injective
    /// enough that the result is still a valid contour.
    pub fn map_points(&self, f: impl Fn(Point2) -> Point2) -> Result<Contour> {
        Contour::new(self.points.iter().map(|p| f(*p)).collect())
    }

    /// Resample to `n` points equally spaced by arc length along the closed
    /// polyline, starting at the first point. Orientation is preserved.
    pub fn resample(&self, n: usize) -> Result<Contour> {
        if n < 3 {
            return Err(Error::TooFewPoints(n));
        }
        let m = self.points.len();
        let mut cumulative = Vec::with_capacity(m + 1);
        cumulative.push(0.0);
        for i in 0..m {
            let seg = self.points[i].dist(self.points[(i + 1) % m]);
            cumulative.push(cumulative[i] + seg);
        }
        let total = *cumulative.last().unwrap();
        if total <= 0.0 {
            return Err(Error::ZeroExtent);
        }
        let step = total / n as f64;
        let mut out = Vec::with_capacity(n);
        let mut seg = 0usize;
        for j in 0..n {
            let target = step * j as f64;
            while seg + 1 < m && cumulative[seg + 1] <= target {
                seg += 1;
            }
            let a = self.points[seg];
            let b = self.points[(seg + 1) % m];
            let seg_len = cumulative[seg + 1] - cumulative[seg];
            let t = if seg_len > 0.0 {
                (target - cumulative[seg]) / seg_len
            } else {
                0.0
            };
            out.push(a + (b - a) * t);
        }
        Contour::new(out)
    }

    /// Translate so the point centroid is the origin and scale so the mean
    /// distance from the centroid is 1. The record holds the removed
    /// centroid and scale.
    pub fn normalize(&self) -> Result<(Contour, NormalizationRecord)> {
        let c = self.centroid();
        let mean_dist =
            self.points.iter().map(|p| p.dist(c)).sum::<f64>() / self.points.len() as f64;
        if mean_dist <= 0.0 {
            return Err(Error::ZeroExtent);
        }
        let inv = 1.0 / mean_dist;
        let normalized = self.map_points(|p| (p - c) * inv)?;
        Ok((
            normalized,
            NormalizationRecord {
                centroid: c,
                scale: mean_dist,
            },
        ))
    }
}

fn bbox_diagonal(points: &[Point2]) -> f64 {
    let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    if min.x > max.x {
        return 0.0;
    }
    (max - min).norm()
}

impl TryFrom<ContourRepr> for Contour {
    type Error = Error;

    fn try_from(repr: ContourRepr) -> Result<Self> {
        if !repr.closed {
            return Err(Error::Parse(
                "open contours are not supported; \"closed\" must be true".into(),
            ));
        }
        Contour::new(
            repr.points
                .into_iter()
                .map(|[x, y]| Point2::new(x, y))
                .collect(),
        )
    }
}

impl From<Contour> for ContourRepr {
    fn from(c: Contour) -> Self {
        ContourRepr {
            points: c.points.iter().map(|p| [p.x, p.y]).collect(),
            closed: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn unit_square() -> Contour {
        Contour::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    fn blob(n: usize) -> Contour {
        // Asymmetric closed curve, clockwise in image coordinates.
        let pts = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                let r = 1.0 + 0.3 * (2.0 * t).cos() + 0.15 * (3.0 * t + 0.7).sin();
                Point2::new(r * t.cos(), r * t.sin())
            })
            .collect();
        Contour::new(pts).unwrap()
    }

    #[test]
    fn rejects_too_few_points() {
        assert!(matches!(
            Contour::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]),
            Err(Error::TooFewPoints(2))
        ));
    }

    #[test]
    fn dedups_consecutive_and_trailing_duplicates() {
        let c = Contour::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn orientation_matches_shoelace_sign() {
        let cw = unit_square();
        assert_eq!(cw.orientation(), Orientation::Clockwise);
        assert!(cw.signed_area() > 0.0);
        let ccw = cw.reversed();
        assert_eq!(ccw.orientation(), Orientation::Counterclockwise);
        assert!(ccw.signed_area() < 0.0);
        assert_eq!(ccw.points()[0], cw.points()[0]);
    }

    #[test]
    fn resample_square_to_corners() {
        let sq = unit_square();
        let r = sq.resample(4).unwrap();
        assert_eq!(r.points(), sq.points());
    }

    #[test]
    fn resample_square_to_corners_and_midpoints() {
        let r = unit_square().resample(8).unwrap();
        let expected = [
            [0.0, 0.0],
            [0.5, 0.0],
            [1.0, 0.0],
            [1.0, 0.5],
            [1.0, 1.0],
            [0.5, 1.0],
            [0.0, 1.0],
            [0.0, 0.5],
        ];
        for (p, e) in r.points().iter().zip(expected) {
            assert_relative_eq!(p.x, e[0], epsilon = 1e-12);
            assert_relative_eq!(p.y, e[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn resample_preserves_perimeter_closely() {
        let c = blob(57);
        let r = c.resample(100).unwrap();
        let rel = (r.perimeter() - c.perimeter()).abs() / c.perimeter();
        assert!(rel < 0.01, "perimeter drift {rel}");
    }

    /// Arc position of `p` along the closed polyline `pts`, searching
    /// forward from segment `*cursor`.
    fn arc_position(pts: &[Point2], cumulative: &[f64], p: Point2, cursor: &mut usize) -> f64 {
        let m = pts.len();
        for probe in 0..m {
            let seg = (*cursor + probe) % m;
            let a = pts[seg];
            let b = pts[(seg + 1) % m];
            let ab = b - a;
            let len_sq = ab.norm_sq();
            let t = (p - a).dot(ab) / len_sq;
            if (-1e-9..=1.0 + 1e-9).contains(&t) {
                let foot = a + ab * t;
                if foot.dist(p) < 1e-9 {
                    *cursor = seg;
                    return cumulative[seg] + t * len_sq.sqrt();
                }
            }
        }
        panic!("resampled point not on source polyline");
    }

    #[test]
    fn resample_spacing_is_uniform() {
        let c = blob(41);
        let n = 173usize;
        let r = c.resample(n).unwrap();
        let total = c.perimeter();
        let step = total / n as f64;
        let m = c.len();
        let mut cumulative = vec![0.0];
        for i in 0..m {
            let seg = c.points()[i].dist(c.points()[(i + 1) % m]);
            cumulative.push(cumulative[i] + seg);
        }
        let mut cursor = 0usize;
        let positions: Vec<f64> = r
            .points()
            .iter()
            .map(|p| arc_position(c.points(), &cumulative, *p, &mut cursor))
            .collect();
        for (j, w) in positions.windows(2).enumerate() {
            let spacing = w[1] - w[0];
            assert!(
                (spacing - step).abs() < 1e-9 * total,
                "spacing {spacing} vs step {step} at {j}"
            );
        }
        let wrap = total - positions[n - 1] + positions[0];
        assert!((wrap - step).abs() < 1e-9 * total);
    }

    #[test]
    fn normalize_centers_and_scales() {
        let (n, rec) = unit_square().normalize().unwrap();
        assert_relative_eq!(n.centroid().x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(n.centroid().y, 0.0, epsilon = 1e-12);
        let mean = n
            .points()
            .iter()
            .map(|p| p.norm())
            .sum::<f64>()
            / n.len() as f64;
        assert_relative_eq!(mean, 1.0, epsilon = 1e-12);
        assert_relative_eq!(rec.centroid.x, 0.5);
        assert_relative_eq!(rec.centroid.y, 0.5);
    }

    #[test]
    fn normalize_is_idempotent() {
        let (n1, _) = blob(33).normalize().unwrap();
        let (n2, rec2) = n1.normalize().unwrap();
        assert_relative_eq!(rec2.scale, 1.0, epsilon = 1e-12);
        for (a, b) in n1.points().iter().zip(n2.points()) {
            assert!(a.dist(*b) < 1e-12);
        }
    }

    #[test]
    fn normalize_equivariance() {
        let c = blob(29);
        let (base, base_rec) = c.normalize().unwrap();
        let shifted = c
            .map_points(|p| p + Point2::new(5.0, -3.0))
            .unwrap();
        let (n, rec) = shifted.normalize().unwrap();
        for (a, b) in base.points().iter().zip(n.points()) {
            assert!(a.dist(*b) < 1e-9);
        }
        assert_relative_eq!(rec.centroid.x, base_rec.centroid.x + 5.0, epsilon = 1e-9);
        assert_relative_eq!(rec.centroid.y, base_rec.centroid.y - 3.0, epsilon = 1e-9);

        let scaled = c.map_points(|p| p * 7.0).unwrap();
        let (ns, recs) = scaled.normalize().unwrap();
        for (a, b) in base.points().iter().zip(ns.points()) {
            assert!(a.dist(*b) < 1e-9);
        }
        assert_relative_eq!(recs.scale, base_rec.scale * 7.0, epsilon = 1e-9);
    }

    #[test]
    fn json_round_trip() {
        let c = blob(12);
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"closed\":true"));
        let back: Contour = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn json_rejects_open() {
        let err =
            serde_json::from_str::<Contour>(r#"{"points": [[0,0],[1,0],[1,1]], "closed": false}"#);
        assert!(err.is_err());
    }
}
