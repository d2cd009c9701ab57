//! Splitting contour runs at inflexion points and measuring each section.
//!
//! A section is a maximal stretch of uniform curvature class (Line, Convex
//! or Concave) between consecutive inflexion points. The five features per
//! section are: chord-to-arc area (normalized by πR²), chord inclination
//! angle folded to [0, π), convexity degree (max chord distance over chord
//! length), and the two chord-endpoint distances from the circle center
//! (normalized by R).

use serde::{Deserialize, Serialize};

use crate::arp::SurroundingCircle;
use crate::error::{Error, Result};
use crate::geometry::{self, Point2};

/// Curvature class of a section. For the canonical clockwise traversal in
/// image coordinates, Convex bulges away from the shape interior, which is
/// a positive discrete-curvature cross product on raw image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectionKind {
    Line,
    Convex,
    Concave,
}

/// Inflexion detection parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionParams {
    /// Centered moving-average window for curvature smoothing (clipped at
    /// run ends).
    pub window: usize,
    /// Smoothed turning-angle sines below this magnitude count as
    /// straight.
    pub line_eps: f64,
}

impl Default for SectionParams {
    fn default() -> Self {
        SectionParams {
            window: 5,
            line_eps: 1e-6,
        }
    }
}

impl SectionParams {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidConfig("curvature window must be >= 1".into()));
        }
        if !(self.line_eps > 0.0 && self.line_eps.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "invalid line epsilon {}",
                self.line_eps
            )));
        }
        Ok(())
    }
}

/// One measured section of a contour run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub kind: SectionKind,
    /// First point of the section (shared with the previous section).
    pub first: Point2,
    /// Last point of the section (shared with the next section).
    pub last: Point2,
    /// The section's points, a contiguous sub-run.
    pub points: Vec<Point2>,
    /// |area between arc and chord| / (πR²); 0 for Line sections.
    pub area: f64,
    /// Chord inclination to the +x axis, folded into [0, π).
    pub alpha: f64,
    /// Max distance from the arc to the chord, over chord length; 0 for
    /// Line sections.
    pub degree: f64,
    /// Distance of `first` from the circle center, over R.
    pub d1: f64,
    /// Distance of the chord's far endpoint from the circle center, over R.
    pub d2: f64,
}

/// Smoothed discrete-curvature class per interior point of a run:
/// +1 convex, -1 concave, 0 straight.
///
/// The per-point signal is the sine of the turning angle (the cross product
/// of the adjacent segment vectors divided by both segment lengths). It has
/// the same sign as the raw cross product but is independent of scale and
/// of sampling density, so `line_eps` means the same thing for a 50-point
/// and a 1000-point arc.
fn curvature_classes(points: &[Point2], params: &SectionParams) -> Vec<i8> {
    let n = points.len();
    if n < 3 {
        return Vec::new();
    }
    let kappa: Vec<f64> = (1..n - 1)
        .map(|j| {
            let v1 = points[j] - points[j - 1];
            let v2 = points[j + 1] - points[j];
            let denom = v1.norm() * v2.norm();
            if denom > 0.0 {
                v1.cross(v2) / denom
            } else {
                0.0
            }
        })
        .collect();
    let half = params.window / 2;
    (0..kappa.len())
        .map(|j| {
            let lo = j.saturating_sub(half);
            let hi = (j + half).min(kappa.len() - 1);
            let mean: f64 = kappa[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64;
            if mean.abs() < params.line_eps {
                0
            } else if mean > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// Indices (into the run) where the smoothed curvature class changes; each
/// returned index starts a new section and is shared with the previous one.
/// Runs with fewer than 3 points yield no splits.
pub fn detect_inflexions(points: &[Point2], params: &SectionParams) -> Vec<usize> {
    let classes = curvature_classes(points, params);
    let mut splits = Vec::new();
    for j in 1..classes.len() {
        if classes[j] != classes[j - 1] {
            splits.push(j + 1); // class index j is curvature at point j+1
        }
    }
    splits
}

/// Relative chord length below which the chord is considered degenerate.
const ZERO_CHORD_REL: f64 = 1e-12;

/// Split a run at its inflexion points and measure every section.
///
/// `run_is_full_contour` marks a run covering an entire closed contour; in
/// that case a degenerate chord (first and last point nearly coincident)
/// falls back to the chord from the first point to the farthest section
/// point instead of erroring.
pub fn make_sections(
    run: &[Point2],
    circle: &SurroundingCircle,
    params: &SectionParams,
    run_is_full_contour: bool,
) -> Result<Vec<Section>> {
    params.validate()?;
    if run.is_empty() {
        return Ok(Vec::new());
    }
    let classes = curvature_classes(run, params);
    let splits = detect_inflexions(run, params);

    let mut boundaries = Vec::with_capacity(splits.len() + 2);
    boundaries.push(0);
    boundaries.extend_from_slice(&splits);
    boundaries.push(run.len() - 1);

    let mut sections = Vec::new();
    for w in boundaries.windows(2) {
        let (a, b) = (w[0], w[1]);
        let pts = &run[a..=b];
        // Interior curvature classes of this stretch sit at class indices
        // a..b-1 (class index j = curvature at run point j+1).
        let kind = if b - a < 2 {
            SectionKind::Line
        } else {
            match classes[a..b - 1].first().copied().unwrap_or(0) {
                0 => SectionKind::Line,
                1 => SectionKind::Convex,
                _ => SectionKind::Concave,
            }
        };
        sections.push(measure_section(
            pts,
            kind,
            circle,
            run_is_full_contour && sections.is_empty() && b + 1 == run.len() && a == 0,
        )?);
    }
    Ok(sections)
}

fn measure_section(
    pts: &[Point2],
    kind: SectionKind,
    circle: &SurroundingCircle,
    allow_chord_fallback: bool,
) -> Result<Section> {
    let first = pts[0];
    let last = *pts.last().unwrap();
    let r = circle.radius;

    if pts.len() == 1 {
        // A lone sample clipped off by a sector corner: no chord to speak
        // of, encode as a degenerate straight piece at its own distance.
        let d = first.dist(circle.center) / r;
        return Ok(Section {
            kind: SectionKind::Line,
            first,
            last,
            points: pts.to_vec(),
            area: 0.0,
            alpha: 0.0,
            degree: 0.0,
            d1: d,
            d2: d,
        });
    }

    let mut chord_end = last;
    if first.dist(chord_end) < ZERO_CHORD_REL * r {
        if !allow_chord_fallback {
            return Err(Error::ZeroChord);
        }
        chord_end = *pts
            .iter()
            .max_by(|p, q| first.dist(**p).total_cmp(&first.dist(**q)))
            .unwrap();
        if first.dist(chord_end) < ZERO_CHORD_REL * r {
            return Err(Error::ZeroChord);
        }
    }
    let chord = chord_end - first;
    let chord_len = chord.norm();

    let (area, degree) = if kind == SectionKind::Line {
        (0.0, 0.0)
    } else {
        let area = geometry::signed_area(pts).abs() / (std::f64::consts::PI * r * r);
        let d_max = pts
            .iter()
            .map(|p| (chord.cross(*p - first)).abs() / chord_len)
            .fold(0.0, f64::max);
        (area, d_max / chord_len)
    };

    let alpha = chord.y.atan2(chord.x).rem_euclid(std::f64::consts::PI);
    let alpha = if alpha >= std::f64::consts::PI {
        0.0
    } else {
        alpha
    };

    Ok(Section {
        kind,
        first,
        last,
        points: pts.to_vec(),
        area,
        alpha,
        degree,
        d1: first.dist(circle.center) / r,
        d2: chord_end.dist(circle.center) / r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_circle() -> SurroundingCircle {
        SurroundingCircle {
            center: Point2::ZERO,
            radius: 1.0,
        }
    }

    #[test]
    fn collinear_run_is_one_line_section() {
        let pts: Vec<Point2> = (0..10).map(|i| Point2::new(i as f64 * 0.05, 0.2)).collect();
        let circle = unit_circle();
        assert!(detect_inflexions(&pts, &SectionParams::default()).is_empty());
        let sections = make_sections(&pts, &circle, &SectionParams::default(), false).unwrap();
        assert_eq!(sections.len(), 1);
        assert_eq!(sections[0].kind, SectionKind::Line);
        assert_eq!(sections[0].area, 0.0);
        assert_eq!(sections[0].degree, 0.0);
    }

    #[test]
    fn s_curve_splits_once_near_junction() {
        // Two circular arcs of opposite turning joined smoothly, 200 points.
        // First arc: radius 1 turning one way; second: radius 2 turning the
        // other. Equal arc-length steps on both sides.
        let step = 0.01;
        let mut pts = Vec::new();
        let n1 = 100;
        for i in 0..n1 {
            let t = step * i as f64;
            pts.push(Point2::new(t.sin(), 1.0 - t.cos()));
        }
        // Continue from the junction with opposite curvature, radius 2.
        let junction = Point2::new((step * n1 as f64).sin(), 1.0 - (step * n1 as f64).cos());
        let tangent_angle = step * n1 as f64;
        let center2 = junction
            + Point2::new(tangent_angle.cos(), tangent_angle.sin()).rotated(-std::f64::consts::FRAC_PI_2) * 2.0;
        for i in 0..100 {
            let phi = step * i as f64 / 2.0;
            let from_center = junction - center2;
            pts.push(center2 + from_center.rotated(-phi));
        }
        let splits = detect_inflexions(&pts, &SectionParams::default());
        assert_eq!(splits.len(), 1, "splits at {splits:?}");
        assert!(
            (splits[0] as i64 - n1 as i64).unsigned_abs() as usize <= 5,
            "split at {} expected near {}",
            splits[0],
            n1
        );
    }

    #[test]
    fn convex_polygon_arc_is_single_convex_section() {
        // Part of a clockwise (image frame) convex polygon.
        let pts: Vec<Point2> = (0..40)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 80.0;
                Point2::new(t.cos(), t.sin())
            })
            .collect();
        let circle = unit_circle();
        let sections = make_sections(&pts, &circle, &SectionParams::default(), false).unwrap();
        assert_eq!(sections.len(), 1);
        assert_eq!(sections[0].kind, SectionKind::Convex);
    }

    #[test]
    fn concave_arc_for_counterclockwise_turn() {
        let pts: Vec<Point2> = (0..40)
            .map(|i| {
                let t = -std::f64::consts::TAU * i as f64 / 80.0;
                Point2::new(t.cos(), t.sin())
            })
            .collect();
        let sections =
            make_sections(&pts, &unit_circle(), &SectionParams::default(), false).unwrap();
        assert_eq!(sections.len(), 1);
        assert_eq!(sections[0].kind, SectionKind::Concave);
    }

    #[test]
    fn semicircle_degree_and_area() {
        // Semicircular arc of radius r inside a circle of radius R.
        let r = 0.6;
        let big = SurroundingCircle {
            center: Point2::ZERO,
            radius: 2.0,
        };
        let pts: Vec<Point2> = (0..1000)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / 999.0;
                Point2::new(r * t.cos(), r * t.sin())
            })
            .collect();
        let sections = make_sections(&pts, &big, &SectionParams::default(), false).unwrap();
        assert_eq!(sections.len(), 1);
        let s = &sections[0];
        // Max sagitta r over chord 2r.
        assert_relative_eq!(s.degree, 0.5, epsilon = 1e-3);
        // Half-disc area over the ARP circle area.
        let expected = (r * r) / (2.0 * big.radius * big.radius);
        assert!((s.area - expected).abs() / expected < 1e-3);
        assert_relative_eq!(s.d1, r / big.radius, epsilon = 1e-12);
        assert_relative_eq!(s.d2, r / big.radius, epsilon = 1e-12);
        // The chord is horizontal; folded angle is near 0 or wraps near pi.
        let fold_dist = s.alpha.min(std::f64::consts::PI - s.alpha);
        assert!(fold_dist < 1e-9, "alpha {}", s.alpha);
    }

    #[test]
    fn sections_share_boundary_points_and_cover_run() {
        let mut pts = Vec::new();
        for i in 0..60 {
            let t = 0.02 * i as f64;
            pts.push(Point2::new(t.sin() * 0.5, 0.5 - 0.5 * t.cos()));
        }
        let last = *pts.last().unwrap();
        for i in 1..60 {
            let t = 0.02 * i as f64;
            pts.push(Point2::new(last.x + (0.5 * t).sin() * 0.5, last.y + 0.25 * t));
        }
        let circle = SurroundingCircle {
            center: Point2::ZERO,
            radius: 3.0,
        };
        let sections = make_sections(&pts, &circle, &SectionParams::default(), false).unwrap();
        assert!(!sections.is_empty());
        let mut covered = 0usize;
        for (i, s) in sections.iter().enumerate() {
            if i + 1 < sections.len() {
                assert_eq!(s.last, sections[i + 1].first);
            }
            covered += s.points.len() - 1;
        }
        assert_eq!(covered + 1, pts.len());
        assert_eq!(sections[0].first, pts[0]);
        assert_eq!(sections.last().unwrap().last, *pts.last().unwrap());
    }

    #[test]
    fn features_are_scale_translation_invariant() {
        let pts: Vec<Point2> = (0..200)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / 260.0 + 0.21;
                Point2::new(0.8 * t.cos(), 0.7 * t.sin())
            })
            .collect();
        let circle = SurroundingCircle {
            center: Point2::new(0.1, -0.05),
            radius: 1.5,
        };
        let base = make_sections(&pts, &circle, &SectionParams::default(), false).unwrap();

        let scale = 41.5;
        let shift = Point2::new(-7.0, 12.0);
        let moved: Vec<Point2> = pts.iter().map(|p| *p * scale + shift).collect();
        let circle_m = SurroundingCircle {
            center: circle.center * scale + shift,
            radius: circle.radius * scale,
        };
        let got = make_sections(&moved, &circle_m, &SectionParams::default(), false).unwrap();

        assert_eq!(base.len(), got.len());
        for (a, b) in base.iter().zip(&got) {
            assert_eq!(a.kind, b.kind);
            assert_relative_eq!(a.area, b.area, epsilon = 1e-9);
            assert_relative_eq!(a.alpha, b.alpha, epsilon = 1e-9);
            assert_relative_eq!(a.degree, b.degree, epsilon = 1e-9);
            assert_relative_eq!(a.d1, b.d1, epsilon = 1e-9);
            assert_relative_eq!(a.d2, b.d2, epsilon = 1e-9);
        }
    }

    #[test]
    fn feature_ranges() {
        let pts: Vec<Point2> = (0..150)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 150.0 + 0.1;
                let r = 0.9 + 0.2 * (3.0 * t).sin();
                Point2::new(r * t.cos(), r * t.sin())
            })
            .collect();
        let circle = SurroundingCircle {
            center: Point2::ZERO,
            radius: 1.2,
        };
        for s in make_sections(&pts, &circle, &SectionParams::default(), true).unwrap() {
            assert!(s.area >= 0.0);
            assert!(s.degree >= 0.0);
            assert!((0.0..=1.0 + 1e-9).contains(&s.d1));
            assert!((0.0..=1.0 + 1e-9).contains(&s.d2));
            assert!((0.0..std::f64::consts::PI).contains(&s.alpha));
        }
    }

    #[test]
    fn zero_chord_errors_without_fallback() {
        // A loop returning to its start point exactly.
        let mut pts: Vec<Point2> = (0..50)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 50.0;
                Point2::new(0.3 * t.cos(), 0.3 * t.sin())
            })
            .collect();
        pts.push(pts[0]);
        let circle = unit_circle();
        let err = make_sections(&pts, &circle, &SectionParams::default(), false);
        assert!(matches!(err, Err(Error::ZeroChord)));
        // With the fallback allowed the chord spans to the farthest point.
        let ok = make_sections(&pts, &circle, &SectionParams::default(), true).unwrap();
        assert_eq!(ok.len(), 1);
        assert_relative_eq!(ok[0].d2, 0.3, epsilon = 1e-9);
    }
}
