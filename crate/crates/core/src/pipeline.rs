//! End-to-end composition of the encoding and matching stages under one
//! [`RunConfig`].

use crate::config::{AlignMode, RunConfig};
use crate::contour::Contour;
use crate::encoding::{encode_shape, encode_shape_trace, EncodeTrace, SymbolString};
use crate::error::{Error, Result};
use crate::pose::{align_pair, canonical_frame, AlignedPair};
use crate::retrieval::{Index, ShapeRecord};

/// Resample to the configured density and, in canonical mode, rotate into
/// the principal-axis frame. This is the preprocessing every contour gets
/// before encoding.
pub fn prepare_contour(contour: &Contour, cfg: &RunConfig) -> Result<Contour> {
    let resampled = contour.resample(cfg.resample_n)?;
    match cfg.align_mode {
        AlignMode::Canonical => Ok(canonical_frame(&resampled)?.0),
        AlignMode::Pairwise => Ok(resampled),
    }
}

/// Full encode path: prepare, then transform into the symbol string.
pub fn encode_contour(contour: &Contour, cfg: &RunConfig) -> Result<SymbolString> {
    cfg.validate()?;
    let prepared = prepare_contour(contour, cfg)?;
    encode_shape(&prepared, &cfg.encoder())
}

/// [`encode_contour`] keeping the per-sector trace for inspection dumps.
pub fn encode_contour_trace(contour: &Contour, cfg: &RunConfig) -> Result<EncodeTrace> {
    cfg.validate()?;
    let prepared = prepare_contour(contour, cfg)?;
    encode_shape_trace(&prepared, &cfg.encoder())
}

/// Two-contour matching in the pairwise narrative: resample both, align
/// `b` onto `a` by shape context + Procrustes, encode both, align the
/// token strings.
pub struct PairwiseMatch {
    pub similarity: f64,
    pub score: f64,
    pub symbols_a: SymbolString,
    pub symbols_b: SymbolString,
    pub alignment: AlignedPair,
}

pub fn match_pair(a: &Contour, b: &Contour, cfg: &RunConfig) -> Result<PairwiseMatch> {
    cfg.validate()?;
    let ra = a.resample(cfg.resample_n)?;
    let rb = b.resample(cfg.resample_n)?;
    let aligned = align_pair(&ra, &rb, &cfg.sc, cfg.dummy_cost)?;
    let symbols_a = encode_shape(&ra, &cfg.encoder())?;
    let symbols_b = encode_shape(&aligned.aligned, &cfg.encoder())?;
    let f = crate::alignment::nw_fill(symbols_a.tokens(), symbols_b.tokens(), &cfg.score);
    let score = f.final_score();
    let similarity =
        crate::alignment::similarity(symbols_a.tokens(), symbols_b.tokens(), &cfg.score);
    Ok(PairwiseMatch {
        similarity,
        score,
        symbols_a,
        symbols_b,
        alignment: aligned,
    })
}

/// Encode a batch of labeled contours into a fresh index.
pub fn build_index(
    items: &[(String, Option<String>, Contour)],
    cfg: &RunConfig,
    store_contours: bool,
) -> Result<Index> {
    cfg.validate()?;
    let fingerprint = cfg.fingerprint();
    let mut index = Index::new(fingerprint.clone());
    for (id, label, contour) in items {
        let symbols = encode_contour(contour, cfg)?;
        index.add(ShapeRecord {
            id: id.clone(),
            label: label.clone(),
            symbols,
            fingerprint: fingerprint.clone(),
            contour: store_contours.then(|| contour.clone()),
        })?;
    }
    Ok(index)
}

/// Query similarities in pairwise-alignment mode: the query is aligned to
/// each stored contour and both are re-encoded per pair. Requires stored
/// contours on every record.
pub fn pairwise_query_scores(
    index: &Index,
    query: &Contour,
    cfg: &RunConfig,
) -> Result<Vec<(String, Option<String>, f64)>> {
    index
        .records()
        .iter()
        .map(|r| {
            let target = r.contour.as_ref().ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "record {:?} has no stored contour; rebuild the index with contours \
                     to use pairwise alignment",
                    r.id
                ))
            })?;
            let m = match_pair(target, query, cfg)?;
            Ok((r.id.clone(), r.label.clone(), m.similarity))
        })
        .collect()
}

/// Re-encode an index (which must store contours) under a different angle
/// bin count; used by the angle-bin sweep evaluation.
pub fn reencode_with_angle_bins(index: &Index, cfg: &RunConfig, angle_bins: usize) -> Result<Index> {
    let mut swept_cfg = cfg.clone();
    swept_cfg.quant.angle_bins = angle_bins;
    swept_cfg.validate()?;
    let fingerprint = swept_cfg.fingerprint();
    let mut out = Index::new(fingerprint.clone());
    for r in index.records() {
        let contour = r.contour.as_ref().ok_or_else(|| {
            Error::InvalidConfig(format!(
                "record {:?} has no stored contour; the angle-bin sweep must re-encode",
                r.id
            ))
        })?;
        out.add(ShapeRecord {
            id: r.id.clone(),
            label: r.label.clone(),
            symbols: encode_contour(contour, &swept_cfg)?,
            fingerprint: fingerprint.clone(),
            contour: Some(contour.clone()),
        })?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    fn blob(seed_phase: f64) -> Contour {
        let pts = (0..160)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 160.0 + 0.07;
                let r = 1.0
                    + 0.24 * (2.0 * t + seed_phase).cos()
                    + 0.15 * (3.0 * t + 0.8).sin();
                Point2::new(r * t.cos(), r * t.sin())
            })
            .collect();
        Contour::new(pts).unwrap()
    }

    #[test]
    fn canonical_encoding_is_rotation_invariant_for_clean_shapes() {
        let cfg = RunConfig::default();
        let c = blob(0.3);
        let base = encode_contour(&c, &cfg).unwrap();
        let rotated = c.map_points(|p| p.rotated(1.1)).unwrap();
        let got = encode_contour(&rotated, &cfg).unwrap();
        assert_eq!(base, got);
    }

    #[test]
    fn match_pair_of_identical_shapes_is_one() {
        let cfg = RunConfig {
            resample_n: 64,
            ..RunConfig::default()
        };
        let c = blob(0.9);
        let m = match_pair(&c, &c, &cfg).unwrap();
        assert_eq!(m.similarity, 1.0);
        assert_eq!(m.symbols_a, m.symbols_b);
    }

    #[test]
    fn build_and_query_round_trip() {
        let cfg = RunConfig::default();
        let items: Vec<(String, Option<String>, Contour)> = (0..4)
            .map(|i| {
                (
                    format!("s{i}"),
                    Some(format!("c{}", i % 2)),
                    blob(i as f64 * 0.7),
                )
            })
            .collect();
        let index = build_index(&items, &cfg, true).unwrap();
        assert_eq!(index.len(), 4);
        let q = encode_contour(&items[2].2, &cfg).unwrap();
        let result = index.query_topk(&q, 2, &cfg.score, false).unwrap();
        assert_eq!(result.hits[0].id, "s2");
        assert_eq!(result.hits[0].similarity, 1.0);
    }

    #[test]
    fn pairwise_query_needs_contours() {
        let cfg = RunConfig::default();
        let items = vec![("a".to_string(), None, blob(0.0))];
        let without = build_index(&items, &cfg, false).unwrap();
        assert!(pairwise_query_scores(&without, &items[0].2, &cfg).is_err());
        let with = build_index(&items, &cfg, true).unwrap();
        let scores = pairwise_query_scores(&with, &items[0].2, &cfg).unwrap();
        assert_eq!(scores.len(), 1);
        assert_eq!(scores[0].2, 1.0);
    }

    #[test]
    fn angle_sweep_reencodes() {
        let cfg = RunConfig::default();
        let items = vec![
            ("a".to_string(), Some("x".to_string()), blob(0.0)),
            ("b".to_string(), Some("y".to_string()), blob(1.3)),
        ];
        let index = build_index(&items, &cfg, true).unwrap();
        let swept = reencode_with_angle_bins(&index, &cfg, 3).unwrap();
        assert_eq!(swept.len(), 2);
        assert_ne!(swept.fingerprint(), index.fingerprint());
        for r in swept.records() {
            assert!(r.symbols.tokens().iter().all(|t| {
                t.family() != crate::encoding::Family::Angle || t.rank() <= 3
            }));
        }
    }
}
