//! Log-polar shape-context histograms and χ² matching costs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// Shape-context binning layout. Radial bin edges are log-spaced between
/// `r_inner` and `r_outer`, both expressed as fractions of the shape's mean
/// pairwise point distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScConfig {
    pub radial_bins: usize,
    pub angular_bins: usize,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl Default for ScConfig {
    fn default() -> Self {
        ScConfig {
            radial_bins: 5,
            angular_bins: 12,
            r_inner: 0.125,
            r_outer: 2.0,
        }
    }
}

impl ScConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radial_bins < 1 || self.angular_bins < 1 {
            return Err(Error::InvalidConfig(
                "shape context needs at least one radial and one angular bin".into(),
            ));
        }
        if !(self.r_inner > 0.0 && self.r_inner < self.r_outer && self.r_outer.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "invalid shape-context radial range [{}, {}]",
                self.r_inner, self.r_outer
            )));
        }
        Ok(())
    }

    pub fn bin_count(&self) -> usize {
        self.radial_bins * self.angular_bins
    }
}

/// Per-point histogram of the relative positions of the other points.
#[derive(Debug, Clone, PartialEq)]
pub struct ScHistogram {
    counts: Vec<u32>,
    norm: Vec<f64>,
}

impl ScHistogram {
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn norm(&self) -> &[f64] {
        &self.norm
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    /// Build directly from raw counts (normalizing by the total).
    pub fn from_counts(counts: Vec<u32>) -> Self {
        let total: u32 = counts.iter().sum();
        let denom = if total == 0 { 1.0 } else { f64::from(total) };
        let norm = counts.iter().map(|&c| f64::from(c) / denom).collect();
        ScHistogram { counts, norm }
    }

    /// The histogram this shape would produce after a global rotation by
    /// `shift` angular bins: every count moves from angular index `t` to
    /// `(t + shift) mod angular_bins` within its radial ring.
    pub fn rotated_bins(&self, shift: usize, angular_bins: usize) -> ScHistogram {
        debug_assert_eq!(self.counts.len() % angular_bins, 0);
        let mut counts = vec![0u32; self.counts.len()];
        for (k, &c) in self.counts.iter().enumerate() {
            let ring = k / angular_bins;
            let ang = (k % angular_bins + shift) % angular_bins;
            counts[ring * angular_bins + ang] = c;
        }
        ScHistogram::from_counts(counts)
    }
}

/// One shape-context histogram per point. Every other point lands in
/// exactly one bin: distances are normalized by the mean pairwise distance,
/// clamped into the innermost/outermost radial bin, and the angle is the
/// clockwise image-frame angle from the +x axis.
pub fn compute_histograms(points: &[Point2], cfg: &ScConfig) -> Result<Vec<ScHistogram>> {
    cfg.validate()?;
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }

    let mut dist_sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            dist_sum += points[i].dist(points[j]);
        }
    }
    let pair_count = (n * (n - 1) / 2) as f64;
    let mean_dist = dist_sum / pair_count;
    if mean_dist <= 0.0 {
        return Err(Error::ZeroExtent);
    }

    let edges = log_radial_edges(cfg);
    let theta = std::f64::consts::TAU / cfg.angular_bins as f64;

    let histograms = points
        .iter()
        .map(|&p| {
            let mut counts = vec![0u32; cfg.bin_count()];
            for &q in points {
                if q == p {
                    continue;
                }
                let v = q - p;
                let r = v.norm() / mean_dist;
                let radial = radial_bin(r, &edges);
                let angular = ((v.angle() / theta) as usize).min(cfg.angular_bins - 1);
                counts[radial * cfg.angular_bins + angular] += 1;
            }
            ScHistogram::from_counts(counts)
        })
        .collect();
    Ok(histograms)
}

/// Log-spaced radial edges from `r_inner` to `r_outer` (`radial_bins + 1`
/// values); binning clamps outside that range.
fn log_radial_edges(cfg: &ScConfig) -> Vec<f64> {
    let lo = cfg.r_inner.ln();
    let hi = cfg.r_outer.ln();
    (0..=cfg.radial_bins)
        .map(|t| (lo + (hi - lo) * t as f64 / cfg.radial_bins as f64).exp())
        .collect()
}

fn radial_bin(r: f64, edges: &[f64]) -> usize {
    let bins = edges.len() - 1;
    // Half-open [edges[k], edges[k+1]) with clamping below and above.
    let mut k = 0;
    while k + 1 < bins && r >= edges[k + 1] {
        k += 1;
    }
    k
}

/// Half the χ² statistic between two normalized histograms; symmetric, in
/// `[0, 1]`, zero iff the normalized vectors are equal. Bins empty in both
/// histograms contribute nothing.
pub fn chi2_cost(h: &ScHistogram, g: &ScHistogram) -> Result<f64> {
    if h.bin_count() != g.bin_count() {
        return Err(Error::DimensionMismatch(h.bin_count(), g.bin_count()));
    }
    let mut acc = 0.0;
    for (&a, &b) in h.norm.iter().zip(&g.norm) {
        let denom = a + b;
        if denom > 0.0 {
            let d = a - b;
            acc += d * d / denom;
        }
    }
    Ok(acc / 2.0)
}

/// Matrix of pairwise matching costs `C(p_i, q_j)`.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    /// χ² costs between every histogram of `a` (rows) and of `b` (columns).
    pub fn from_histograms(a: &[ScHistogram], b: &[ScHistogram]) -> Result<CostMatrix> {
        let rows = a.len();
        let cols = b.len();
        let mut entries = Vec::with_capacity(rows * cols);
        for h in a {
            for g in b {
                entries.push(chi2_cost(h, g)?);
            }
        }
        Ok(CostMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<f64>) -> Result<CostMatrix> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::InvalidConfig(format!(
                "cost matrix {rows}x{cols} does not match {} entries",
                entries.len()
            )));
        }
        Ok(CostMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hist(norm_counts: &[u32]) -> ScHistogram {
        ScHistogram::from_counts(norm_counts.to_vec())
    }

    #[test]
    fn two_point_shape_has_single_count() {
        let pts = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)];
        let hists = compute_histograms(&pts, &ScConfig::default()).unwrap();
        assert_eq!(hists.len(), 2);
        for h in &hists {
            assert_eq!(h.counts().iter().sum::<u32>(), 1);
            assert_relative_eq!(h.norm().iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn hexagon_histograms_repeat_under_the_symmetry() {
        // Angles are binned in the global frame, so the 6-fold symmetry
        // makes vertex k's histogram a cyclic shift of vertex 0's by two
        // 30-degree bins per step (not bitwise identical). A small global
        // rotation keeps relative angles off the exact bin edges.
        let cfg = ScConfig {
            radial_bins: 1,
            angular_bins: 12,
            ..ScConfig::default()
        };
        let pts: Vec<Point2> = (0..6)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 6.0 + 0.1;
                Point2::new(t.cos(), t.sin())
            })
            .collect();
        let hists = compute_histograms(&pts, &cfg).unwrap();
        for (k, h) in hists.iter().enumerate() {
            let shift = (2 * k) % 12;
            let shifted: Vec<u32> = (0..12)
                .map(|b| hists[0].counts()[(b + 12 - shift) % 12])
                .collect();
            assert_eq!(h.counts(), shifted, "vertex {k}");
        }
    }

    #[test]
    fn histogram_counts_sum_to_n_minus_one() {
        let pts: Vec<Point2> = (0..10)
            .map(|i| {
                let x = (i as f64 * 0.7).sin() * 3.0;
                let y = (i as f64 * 1.3).cos() * 2.0;
                Point2::new(x, y)
            })
            .collect();
        let hists = compute_histograms(&pts, &ScConfig::default()).unwrap();
        for h in &hists {
            assert_eq!(h.counts().iter().sum::<u32>(), 9);
        }
    }

    #[test]
    fn chi2_of_identical_is_zero() {
        let h = hist(&[3, 1, 0, 4]);
        assert_eq!(chi2_cost(&h, &h).unwrap(), 0.0);
    }

    #[test]
    fn chi2_of_disjoint_is_one() {
        let h = hist(&[1, 0]);
        let g = hist(&[0, 1]);
        assert_relative_eq!(chi2_cost(&h, &g).unwrap(), 1.0);
    }

    #[test]
    fn chi2_hand_computed_value() {
        // h = (0.5, 0.5), g = (1, 0) -> 1/2 * [(0.25/1.5) + (0.25/0.5)] = 1/3
        let h = hist(&[1, 1]);
        let g = hist(&[2, 0]);
        assert_relative_eq!(chi2_cost(&h, &g).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn chi2_dimension_mismatch() {
        let h = hist(&[1, 0]);
        let g = hist(&[1, 0, 0]);
        assert!(matches!(
            chi2_cost(&h, &g),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn chi2_symmetric_and_bounded() {
        let mut seed = 0x1234_5678_u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            (seed >> 33) as u32 % 7
        };
        for _ in 0..1000 {
            let h = hist(&(0..8).map(|_| next()).collect::<Vec<_>>());
            let g = hist(&(0..8).map(|_| next()).collect::<Vec<_>>());
            let hg = chi2_cost(&h, &g).unwrap();
            let gh = chi2_cost(&g, &h).unwrap();
            assert_eq!(hg, gh);
            assert!((0.0..=1.0).contains(&hg));
            if h.norm() == g.norm() {
                assert_eq!(hg, 0.0);
            } else {
                assert!(hg > 0.0);
            }
        }
    }
}
