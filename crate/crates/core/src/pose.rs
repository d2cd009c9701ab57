//! Pose alignment: closed-form similarity Procrustes and the canonical
//! principal-axis frame used before encoding.

use serde::{Deserialize, Serialize};

use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::hungarian::{assign, Correspondence};
use crate::shape_context::{compute_histograms, CostMatrix, ScConfig};

/// Rotation + uniform scale + translation, applied as
/// `T(p) = scale · R(rotation) · p + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityTransform {
    pub rotation: f64,
    pub scale: f64,
    pub translation: Point2,
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        SimilarityTransform {
            rotation: 0.0,
            scale: 1.0,
            translation: Point2::ZERO,
        }
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        p.rotated(self.rotation) * self.scale + self.translation
    }
}

/// Least-squares similarity transform mapping `source[j]` onto `target[i]`
/// over the given `(i, j)` pairs.
///
/// Closed form via the complex cross-covariance: after centering both
/// matched sets, `scale·e^{iθ} = Σ t·conj(s) / Σ|s|²`.
pub fn fit_similarity(
    target: &[Point2],
    source: &[Point2],
    pairs: &[(usize, usize)],
) -> Result<SimilarityTransform> {
    if pairs.len() < 2 {
        return Err(Error::TooFewPairs(pairs.len()));
    }
    let k = pairs.len() as f64;
    let mut t_mean = Point2::ZERO;
    let mut s_mean = Point2::ZERO;
    for &(i, j) in pairs {
        t_mean = t_mean + target[i];
        s_mean = s_mean + source[j];
    }
    t_mean = t_mean * (1.0 / k);
    s_mean = s_mean * (1.0 / k);

    let mut num_re = 0.0;
    let mut num_im = 0.0;
    let mut den = 0.0;
    for &(i, j) in pairs {
        let t = target[i] - t_mean;
        let s = source[j] - s_mean;
        num_re += t.x * s.x + t.y * s.y;
        num_im += t.y * s.x - t.x * s.y;
        den += s.norm_sq();
    }
    if den <= 0.0 {
        return Err(Error::DegenerateCorrespondence);
    }
    let norm = num_re.hypot(num_im);
    if norm <= 0.0 {
        // Optimal scale would collapse to zero; no usable rotation either.
        return Err(Error::DegenerateCorrespondence);
    }
    let scale = norm / den;
    let rotation = num_im.atan2(num_re);
    let translation = t_mean - s_mean.rotated(rotation) * scale;
    Ok(SimilarityTransform {
        rotation,
        scale,
        translation,
    })
}

/// Root-mean-square distance between transformed source points and their
/// matched targets.
pub fn rms_residual(
    target: &[Point2],
    source: &[Point2],
    pairs: &[(usize, usize)],
    transform: &SimilarityTransform,
) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let sum_sq: f64 = pairs
        .iter()
        .map(|&(i, j)| transform.apply(source[j]).dist(target[i]).powi(2))
        .sum();
    (sum_sq / pairs.len() as f64).sqrt()
}

/// Fit the similarity transform for `corr` and return it together with the
/// fully transformed source contour.
pub fn procrustes(
    target: &Contour,
    source: &Contour,
    corr: &Correspondence,
) -> Result<(SimilarityTransform, Contour)> {
    let transform = fit_similarity(target.points(), source.points(), &corr.pairs)?;
    let aligned = source.map_points(|p| transform.apply(p))?;
    Ok((transform, aligned))
}

/// Result of shape-context alignment of contour `b` onto contour `a`.
#[derive(Debug, Clone)]
pub struct AlignedPair {
    /// `b` mapped into `a`'s frame.
    pub aligned: Contour,
    /// Final point correspondence (indices into `a` and `b`).
    pub correspondence: Correspondence,
    /// The fitted transform from `b`'s frame into `a`'s.
    pub transform: SimilarityTransform,
    /// RMS matched-point distance under the final transform.
    pub residual: f64,
}

/// Minimum-cost assignment between two histogram sets, searched over all
/// global angular-bin offsets of `b`.
///
/// A rigid rotation of a shape shifts every one of its histograms by the
/// same number of angular bins, so matching raw global-frame histograms
/// cannot see past pose: a rotation of exactly one bin width turns the true
/// correspondence into an apparent index shift. Scanning the `angular_bins`
/// cyclic shifts and keeping the cheapest assignment restores the true
/// pairing up to half a bin of residual rotation, which Procrustes then
/// absorbs. Ties prefer the smaller shift.
fn best_assignment(
    hist_a: &[crate::shape_context::ScHistogram],
    hist_b: &[crate::shape_context::ScHistogram],
    cfg: &ScConfig,
    dummy_cost: f64,
) -> Result<Correspondence> {
    let mut best: Option<Correspondence> = None;
    for shift in 0..cfg.angular_bins {
        let shifted: Vec<_> = hist_b
            .iter()
            .map(|h| h.rotated_bins(shift, cfg.angular_bins))
            .collect();
        let corr = assign(&CostMatrix::from_histograms(hist_a, &shifted)?, dummy_cost)?;
        if best
            .as_ref()
            .is_none_or(|b| corr.total_cost < b.total_cost)
        {
            best = Some(corr);
        }
    }
    Ok(best.expect("angular_bins >= 1"))
}

/// Align `b` onto `a`: shape-context histograms → χ² cost matrix →
/// assignment → Procrustes, then one refinement round (histograms
/// recomputed on the aligned contour, re-assigned, re-fit against the
/// original `b`). The refinement is kept only when it does not increase the
/// RMS residual, so the residual is non-increasing across the round.
pub fn align_pair(a: &Contour, b: &Contour, cfg: &ScConfig, dummy_cost: f64) -> Result<AlignedPair> {
    if a.len() != b.len() {
        return Err(Error::PointCountMismatch(a.len(), b.len()));
    }
    let hist_a = compute_histograms(a.points(), cfg)?;
    let hist_b = compute_histograms(b.points(), cfg)?;
    let corr1 = best_assignment(&hist_a, &hist_b, cfg, dummy_cost)?;
    let transform1 = fit_similarity(a.points(), b.points(), &corr1.pairs)?;
    let residual1 = rms_residual(a.points(), b.points(), &corr1.pairs, &transform1);

    let aligned1 = b.map_points(|p| transform1.apply(p))?;
    let hist_b2 = compute_histograms(aligned1.points(), cfg)?;
    let corr2 = best_assignment(&hist_a, &hist_b2, cfg, dummy_cost)?;
    let transform2 = fit_similarity(a.points(), b.points(), &corr2.pairs)?;
    let residual2 = rms_residual(a.points(), b.points(), &corr2.pairs, &transform2);

    let (correspondence, transform, residual) = if residual2 <= residual1 {
        (corr2, transform2, residual2)
    } else {
        (corr1, transform1, residual1)
    };
    let aligned = b.map_points(|p| transform.apply(p))?;
    Ok(AlignedPair {
        aligned,
        correspondence,
        transform,
        residual,
    })
}

/// Rotate a contour about its centroid so its principal axis lies on the
/// x-axis, with a deterministic sign rule so congruent copies land in the
/// same pose. Translation and scale are left untouched (the encoder is
/// already invariant to both).
///
/// The sign ambiguity of the axis is resolved by, in order: the third
/// moment along the axis, the third moment across it, and finally the
/// half-plane of the farthest point. Shapes symmetric enough to defeat all
/// three rules get an arbitrary but deterministic pose.
pub fn canonical_frame(contour: &Contour) -> Result<(Contour, SimilarityTransform)> {
    let c = contour.centroid();
    let pts = contour.points();
    let n = pts.len() as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in pts {
        let d = *p - c;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    let axis_angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let mut rotation = -axis_angle;

    let scale3 = ((sxx + syy) / n).powf(1.5).max(f64::MIN_POSITIVE);
    let skew_tol = 1e-9 * n * scale3;
    let skew = |rot: f64| {
        let (mut mx, mut my) = (0.0, 0.0);
        for p in pts {
            let d = (*p - c).rotated(rot);
            mx += d.x * d.x * d.x;
            my += d.y * d.y * d.y;
        }
        (mx, my)
    };
    let (mx, my) = skew(rotation);
    let flip = if mx.abs() > skew_tol {
        mx < 0.0
    } else if my.abs() > skew_tol {
        my < 0.0
    } else {
        let far = pts
            .iter()
            .map(|p| (*p - c).rotated(rotation))
            .max_by(|a, b| a.norm_sq().total_cmp(&b.norm_sq()))
            .expect("contour is non-empty");
        far.x < 0.0
    };
    if flip {
        rotation += std::f64::consts::PI;
    }

    let transform = SimilarityTransform {
        rotation,
        scale: 1.0,
        translation: c - c.rotated(rotation),
    };
    let canonical = contour.map_points(|p| transform.apply(p))?;
    Ok((canonical, transform))
}

/// Mean distance of contour points from their centroid; the scale used in
/// alignment tolerances.
pub fn mean_radius(contour: &Contour) -> f64 {
    let c = contour.centroid();
    contour.points().iter().map(|p| p.dist(c)).sum::<f64>() / contour.len() as f64
}
