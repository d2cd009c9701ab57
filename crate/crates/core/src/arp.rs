//! Angular-radial partitioning: the surrounding circle and its division
//! into M concentric rings × N equal wedges.

use serde::{Deserialize, Serialize};

use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::geometry::Point2;

/// How the surrounding circle's center is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircleCenter {
    /// Contour point centroid (default: deterministic and cheap).
    #[default]
    Centroid,
    /// Center of the minimal enclosing circle.
    MinEnclosing,
}

/// Partition layout: `radial_count` rings of thickness R/M and
/// `angular_count` wedges of angle 2π/N, wedge 0 starting at `start_angle`
/// (clockwise from the +x axis, image frame).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArpConfig {
    pub radial_count: usize,
    pub angular_count: usize,
    pub start_angle: f64,
    pub center: CircleCenter,
}

impl Default for ArpConfig {
    fn default() -> Self {
        ArpConfig {
            radial_count: 4,
            angular_count: 8,
            start_angle: 0.0,
            center: CircleCenter::Centroid,
        }
    }
}

impl ArpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radial_count < 1 || self.angular_count < 1 {
            return Err(Error::InvalidConfig(
                "ARP needs at least one radial and one angular partition".into(),
            ));
        }
        if !self.start_angle.is_finite() {
            return Err(Error::InvalidConfig("ARP start angle must be finite".into()));
        }
        Ok(())
    }

    pub fn sector_count(&self) -> usize {
        self.radial_count * self.angular_count
    }
}

/// Containment slack: contour points may exceed R by this relative margin.
pub const CIRCLE_SLACK: f64 = 1e-9;

/// The circle enclosing the whole contour; the ARP reference frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurroundingCircle {
    pub center: Point2,
    pub radius: f64,
}

/// Build the surrounding circle for a contour: center per the config
/// (centroid by default), radius the maximum center-to-point distance.
pub fn surrounding_circle(contour: &Contour, cfg: &ArpConfig) -> Result<SurroundingCircle> {
    cfg.validate()?;
    let center = match cfg.center {
        CircleCenter::Centroid => contour.centroid(),
        CircleCenter::MinEnclosing => min_enclosing_circle(contour.points()).0,
    };
    let radius = contour
        .points()
        .iter()
        .map(|p| p.dist(center))
        .fold(0.0, f64::max);
    if radius <= 0.0 {
        return Err(Error::ZeroExtent);
    }
    Ok(SurroundingCircle { center, radius })
}

/// One sector of the M×N grid. Ordinal 1 is the innermost ring at wedge 0;
/// ordinals sweep clockwise within a ring before stepping outward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorId {
    pub ring: usize,
    pub wedge: usize,
    pub ordinal: usize,
}

impl SectorId {
    fn new(ring: usize, wedge: usize, angular_count: usize) -> Self {
        SectorId {
            ring,
            wedge,
            ordinal: ring * angular_count + wedge + 1,
        }
    }
}

/// Sector containing `p`. Rings and wedges are half-open intervals
/// `[kρ, (k+1)ρ)` and `[iθ, (i+1)θ)`, with the outermost ring closed at R;
/// the circle center maps to ring 0, wedge 0.
pub fn sector_of_point(
    p: Point2,
    circle: &SurroundingCircle,
    cfg: &ArpConfig,
) -> Result<SectorId> {
    cfg.validate()?;
    let v = p - circle.center;
    let dist = v.norm();
    if dist > circle.radius * (1.0 + CIRCLE_SLACK) {
        return Err(Error::OutsideCircle {
            dist,
            radius: circle.radius,
        });
    }
    if dist == 0.0 {
        return Ok(SectorId::new(0, 0, cfg.angular_count));
    }
    let rho = circle.radius / cfg.radial_count as f64;
    let ring = ((dist / rho) as usize).min(cfg.radial_count - 1);
    let theta = std::f64::consts::TAU / cfg.angular_count as f64;
    let phi = (v.angle() - cfg.start_angle).rem_euclid(std::f64::consts::TAU);
    let wedge = ((phi / theta) as usize).min(cfg.angular_count - 1);
    Ok(SectorId::new(ring, wedge, cfg.angular_count))
}

/// A maximal stretch of consecutive contour indices inside one sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointRun {
    pub start: usize,
    pub len: usize,
}

impl PointRun {
    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// All runs of one sector, in contour order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorSlice {
    pub sector: SectorId,
    pub arcs: Vec<PointRun>,
}

/// Group contour points into per-sector runs.
///
/// Runs are maximal stretches of consecutive indices sharing a sector; the
/// index sequence is treated linearly (a contour starting mid-sector
/// contributes separate leading and trailing runs to that sector rather
/// than one wrapped run). Slices are ordered by sector ordinal and their
/// runs by first contour index; empty sectors are omitted.
pub fn partition_contour(
    contour: &Contour,
    circle: &SurroundingCircle,
    cfg: &ArpConfig,
) -> Result<Vec<SectorSlice>> {
    let ids: Vec<SectorId> = contour
        .points()
        .iter()
        .map(|&p| sector_of_point(p, circle, cfg))
        .collect::<Result<_>>()?;

    let mut runs: Vec<(SectorId, PointRun)> = Vec::new();
    let mut start = 0usize;
    for i in 1..=ids.len() {
        if i == ids.len() || ids[i] != ids[start] {
            runs.push((
                ids[start],
                PointRun {
                    start,
                    len: i - start,
                },
            ));
            start = i;
        }
    }

    let mut slices: Vec<SectorSlice> = Vec::new();
    for (sector, run) in runs {
        match slices.iter_mut().find(|s| s.sector == sector) {
            Some(slice) => slice.arcs.push(run),
            None => slices.push(SectorSlice {
                sector,
                arcs: vec![run],
            }),
        }
    }
    slices.sort_by_key(|s| s.sector.ordinal);
    Ok(slices)
}

/// Minimal enclosing circle (deterministic incremental construction).
/// Returns (center, radius).
pub fn min_enclosing_circle(points: &[Point2]) -> (Point2, f64) {
    assert!(!points.is_empty());
    let slack = 1e-12;
    let inside = |c: Point2, r: f64, p: Point2| p.dist(c) <= r * (1.0 + slack) + slack;

    let mut center = points[0];
    let mut radius = 0.0;
    for (i, &p) in points.iter().enumerate().skip(1) {
        if inside(center, radius, p) {
            continue;
        }
        center = p;
        radius = 0.0;
        for (j, &q) in points[..i].iter().enumerate() {
            if inside(center, radius, q) {
                continue;
            }
            center = (p + q) * 0.5;
            radius = p.dist(q) / 2.0;
            for &s in &points[..j] {
                if inside(center, radius, s) {
                    continue;
                }
                if let Some((c, r)) = circumcircle(p, q, s) {
                    center = c;
                    radius = r;
                }
            }
        }
    }
    (center, radius)
}

fn circumcircle(a: Point2, b: Point2, c: Point2) -> Option<(Point2, f64)> {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if d.abs() < 1e-18 {
        return None;
    }
    let ux = (a.norm_sq() * (b.y - c.y) + b.norm_sq() * (c.y - a.y) + c.norm_sq() * (a.y - b.y)) / d;
    let uy = (a.norm_sq() * (c.x - b.x) + b.norm_sq() * (a.x - c.x) + c.norm_sq() * (b.x - a.x)) / d;
    let center = Point2::new(ux, uy);
    Some((center, center.dist(a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn circle_contour(n: usize, radius: f64, center: Point2) -> Contour {
        let pts = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                center + Point2::new(radius * t.cos(), radius * t.sin())
            })
            .collect();
        Contour::new(pts).unwrap()
    }

    #[test]
    fn unit_circle_circle() {
        let c = circle_contour(100, 1.0, Point2::ZERO);
        let sc = surrounding_circle(&c, &ArpConfig::default()).unwrap();
        assert!(sc.center.norm() < 1e-6);
        assert_relative_eq!(sc.radius, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn rectangle_corners_circle() {
        let c = Contour::new(vec![
            Point2::new(-2.0, -1.0),
            Point2::new(2.0, -1.0),
            Point2::new(2.0, 1.0),
            Point2::new(-2.0, 1.0),
        ])
        .unwrap();
        let sc = surrounding_circle(&c, &ArpConfig::default()).unwrap();
        assert_relative_eq!(sc.center.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(sc.center.y, 0.0, epsilon = 1e-12);
        assert_relative_eq!(sc.radius, 5.0_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn translation_shifts_center_only() {
        let c = circle_contour(64, 1.3, Point2::ZERO);
        let moved = c
            .map_points(|p| p + Point2::new(7.0, -2.0))
            .unwrap();
        let sc0 = surrounding_circle(&c, &ArpConfig::default()).unwrap();
        let sc1 = surrounding_circle(&moved, &ArpConfig::default()).unwrap();
        assert_relative_eq!(sc0.radius, sc1.radius, epsilon = 1e-12);
        assert_relative_eq!(sc1.center.x, sc0.center.x + 7.0, epsilon = 1e-9);
        assert_relative_eq!(sc1.center.y, sc0.center.y - 2.0, epsilon = 1e-9);
    }

    #[test]
    fn center_point_is_sector_one() {
        let circle = SurroundingCircle {
            center: Point2::new(1.0, 1.0),
            radius: 2.0,
        };
        let id = sector_of_point(Point2::new(1.0, 1.0), &circle, &ArpConfig::default()).unwrap();
        assert_eq!((id.ring, id.wedge, id.ordinal), (0, 0, 1));
    }

    #[test]
    fn sector_examples_m3_n4() {
        let cfg = ArpConfig {
            radial_count: 3,
            angular_count: 4,
            ..ArpConfig::default()
        };
        let circle = SurroundingCircle {
            center: Point2::ZERO,
            radius: 2.0,
        };
        // radius 0.5R, clockwise angle 10 degrees -> ring 1, wedge 0, ordinal 5
        let a = 10.0_f64.to_radians();
        let p = Point2::new(a.cos(), a.sin());
        let id = sector_of_point(p, &circle, &cfg).unwrap();
        assert_eq!((id.ring, id.wedge, id.ordinal), (1, 0, 5));
        // radius 0.99R, clockwise angle 359 degrees -> ring 2, wedge 3, ordinal 12
        let a = 359.0_f64.to_radians();
        let p = Point2::new(1.98 * a.cos(), 1.98 * a.sin());
        let id = sector_of_point(p, &circle, &cfg).unwrap();
        assert_eq!((id.ring, id.wedge, id.ordinal), (2, 3, 12));
    }

    #[test]
    fn boundary_radius_lands_in_outer_ring() {
        let cfg = ArpConfig::default();
        let circle = SurroundingCircle {
            center: Point2::ZERO,
            radius: 1.0,
        };
        let id = sector_of_point(Point2::new(1.0, 0.0), &circle, &cfg).unwrap();
        assert_eq!(id.ring, cfg.radial_count - 1);
        let outside = sector_of_point(Point2::new(1.1, 0.0), &circle, &cfg);
        assert!(matches!(outside, Err(Error::OutsideCircle { .. })));
    }

    #[test]
    fn whole_disc_is_single_slice() {
        let cfg = ArpConfig {
            radial_count: 1,
            angular_count: 1,
            ..ArpConfig::default()
        };
        let c = circle_contour(32, 1.0, Point2::ZERO);
        let circle = surrounding_circle(&c, &cfg).unwrap();
        let slices = partition_contour(&c, &circle, &cfg).unwrap();
        assert_eq!(slices.len(), 1);
        assert_eq!(slices[0].arcs.len(), 1);
        assert_eq!(slices[0].arcs[0], PointRun { start: 0, len: 32 });
    }

    #[test]
    fn blob_in_one_sector_of_external_circle() {
        // A small contour near the middle of wedge 0, ring 2 of a big
        // external circle occupies exactly one sector.
        let cfg = ArpConfig::default();
        let circle = SurroundingCircle {
            center: Point2::ZERO,
            radius: 10.0,
        };
        let center = Point2::new(6.2, 0.0).rotated(0.3);
        let c = circle_contour(24, 0.3, center);
        let slices = partition_contour(&c, &circle, &cfg).unwrap();
        assert_eq!(slices.len(), 1);
        assert_eq!(slices[0].arcs.len(), 1);
        assert_eq!(slices[0].arcs[0].len, 24);
    }

    #[test]
    fn circle_of_64_quarters_into_4_slices() {
        let cfg = ArpConfig {
            radial_count: 1,
            angular_count: 4,
            ..ArpConfig::default()
        };
        // Half-step offset keeps samples strictly inside wedges.
        let pts = (0..64)
            .map(|i| {
                let t = std::f64::consts::TAU * (i as f64 + 0.5) / 64.0;
                Point2::new(t.cos(), t.sin())
            })
            .collect();
        let c = Contour::new(pts).unwrap();
        let circle = surrounding_circle(&c, &cfg).unwrap();
        let slices = partition_contour(&c, &circle, &cfg).unwrap();
        assert_eq!(slices.len(), 4);
        for (w, slice) in slices.iter().enumerate() {
            assert_eq!(slice.sector.wedge, w);
            assert_eq!(slice.arcs.len(), 1);
            assert_eq!(slice.arcs[0].len, 16);
            assert_eq!(slice.arcs[0].start, 16 * w);
        }
    }

    #[test]
    fn partition_covers_every_point_once() {
        let shapes = [
            circle_contour(50, 1.0, Point2::new(0.3, -0.2)),
            circle_contour(97, 2.5, Point2::ZERO),
        ];
        for c in &shapes {
            let cfg = ArpConfig::default();
            let circle = surrounding_circle(c, &cfg).unwrap();
            let slices = partition_contour(c, &circle, &cfg).unwrap();
            let mut seen = vec![0u32; c.len()];
            for slice in &slices {
                for arc in &slice.arcs {
                    for i in arc.indices() {
                        seen[i] += 1;
                    }
                }
            }
            assert!(seen.iter().all(|&s| s == 1));
        }
    }

    #[test]
    fn sector_assignment_is_translation_scale_equivariant() {
        // Sampling offset keeps points away from wedge boundaries so the
        // float noise of transforming cannot flip a sector.
        let pts = (0..80)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 80.0 + 0.013;
                Point2::new(0.4 + t.cos(), 0.1 + t.sin())
            })
            .collect();
        let c = Contour::new(pts).unwrap();
        let cfg = ArpConfig::default();
        let circle = surrounding_circle(&c, &cfg).unwrap();
        let ids: Vec<SectorId> = c
            .points()
            .iter()
            .map(|&p| sector_of_point(p, &circle, &cfg).unwrap())
            .collect();
        let moved = c
            .map_points(|p| p * 31.7 + Point2::new(-100.0, 55.0))
            .unwrap();
        let circle_m = surrounding_circle(&moved, &cfg).unwrap();
        let ids_m: Vec<SectorId> = moved
            .points()
            .iter()
            .map(|&p| sector_of_point(p, &circle_m, &cfg).unwrap())
            .collect();
        assert_eq!(ids, ids_m);
    }

    #[test]
    fn min_enclosing_circle_of_square() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
            Point2::new(1.0, 1.0),
        ];
        let (c, r) = min_enclosing_circle(&pts);
        assert_relative_eq!(c.x, 1.0, epsilon = 1e-9);
        assert_relative_eq!(c.y, 1.0, epsilon = 1e-9);
        assert_relative_eq!(r, 2.0_f64.sqrt(), epsilon = 1e-9);
    }
}
