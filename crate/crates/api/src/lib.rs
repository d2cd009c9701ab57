//! Request and response bodies of the shapeseq HTTP API.
//!
//! Geometry and result types reuse the core serde forms: contours travel as
//! `{"points": [[x, y], ...], "closed": true}` and symbol strings as their
//! whitespace text form. The index document posted to `/index/load` and
//! returned by `/index/dump` is exactly the on-disk index file format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use shapeseq_core::pose::SimilarityTransform;
use shapeseq_core::retrieval::{BullseyeReport, QueryHit};
use shapeseq_core::{Contour, EncodeTrace, LabeledContour, ScoredOp};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub version: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigResponse {
    pub fingerprint: String,
    /// The effective config as `key=value` lines.
    pub kv: String,
}

/// Boolean pixel grid, row-major; the JSON mask file format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaskGrid {
    pub rows: Vec<Vec<bool>>,
}

/// Encode one shape given either a contour or a binary mask.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodeRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contour: Option<Contour>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<MaskGrid>,
    /// Also return the per-sector/per-section trace.
    #[serde(default)]
    pub trace: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodeResponse {
    /// Symbol string in canonical text form.
    pub tokens: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<EncodeTrace>,
}

/// Align two symbol strings (text form).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlignRequest {
    pub a: String,
    pub b: String,
    /// Also return the filled DP matrix (row 0 and column 0 included).
    #[serde(default)]
    pub dump_matrix: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlignResponse {
    pub score: f64,
    pub normalized: f64,
    pub ops: Vec<ScoredOp>,
    /// Token rows of the alignment, gaps as `-`.
    pub row_a: Vec<String>,
    pub row_b: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

/// End-to-end two-contour match (pairwise shape-context alignment, then
/// token alignment).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchRequest {
    pub a: Contour,
    pub b: Contour,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchResponse {
    pub similarity: f64,
    pub score: f64,
    pub tokens_a: String,
    pub tokens_b: String,
    /// Shape-alignment trace: matched point pairs, fitted transform, RMS
    /// residual.
    pub pairs: Vec<(usize, usize)>,
    pub transform: SimilarityTransform,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenRequest {
    pub class_count: usize,
    pub per_class: usize,
    pub noise_level: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenResponse {
    pub shapes: Vec<LabeledContour>,
}

/// Build a fresh in-memory index from contours (encoded server side).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexBuildRequest {
    pub records: Vec<IndexBuildRecord>,
    /// Keep the input contours in the index (needed for `--pairwise-align`
    /// queries and angle-bin sweeps).
    #[serde(default)]
    pub store_contours: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexBuildRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub contour: Contour,
}

/// Add one record to the loaded index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexAddRequest {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub contour: Contour,
    #[serde(default)]
    pub store_contour: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexInfoResponse {
    pub size: usize,
    pub fingerprint: String,
    pub version: u32,
    /// Class label -> record count.
    pub labels: BTreeMap<String, usize>,
    /// Whether every record carries its contour.
    pub stores_contours: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contour: Option<Contour>,
    /// Pre-encoded symbol string (text form) as an alternative to a contour.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<String>,
    pub k: usize,
    /// Align the query to every stored contour pairwise instead of using
    /// the canonical frame.
    #[serde(default)]
    pub pairwise: bool,
    /// Skip records whose length-ratio bound cannot reach the current
    /// k-th best score (identical results, fewer alignments).
    #[serde(default)]
    pub prefilter: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryResponse {
    pub hits: Vec<QueryHit>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// Re-encode the index at each of these angle-bin counts and report a
    /// bulls-eye score per count (requires stored contours).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_bin_sweep: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub angle_bins: usize,
    pub bullseye: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalResponse {
    pub report: BullseyeReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepEntry>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: String,
}
