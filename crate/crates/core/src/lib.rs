//! Shape contours encoded as symbol strings, compared by dynamic programming.
//!
//! Pipeline: contour extraction → resampling → (optional pose alignment) →
//! angular-radial partitioning → inflexion-based sectioning → five-token
//! quantization per section → Needleman-Wunsch token alignment → ranked
//! retrieval.

pub mod alignment;
pub mod arp;
pub mod config;
pub mod contour;
pub mod encoding;
pub mod error;
pub mod geometry;
pub mod hungarian;
pub mod mask;
pub mod pipeline;
pub mod pose;
pub mod sections;
pub mod retrieval;
pub mod shape_context;
pub mod synth;

pub use alignment::{align, nw_fill, similarity, traceback, AlignOp, Alignment, DpMatrix,
    ScoreTable, ScoredOp};
pub use arp::{partition_contour, sector_of_point, surrounding_circle, ArpConfig,
    CircleCenter, PointRun, SectorId, SectorSlice, SurroundingCircle};
pub use config::{AlignMode, RunConfig};
pub use contour::{Contour, NormalizationRecord, Orientation};
pub use encoding::{encode_shape, encode_shape_trace, quantize_section, EncodeTrace,
    EncoderConfig, Family, QuantizerConfig, SymbolString, Token};
pub use error::{Error, Result};
pub use geometry::Point2;
pub use hungarian::{assign, Correspondence};
pub use mask::{trace_boundary, BinaryMask};
pub use sections::{detect_inflexions, make_sections, Section, SectionKind, SectionParams};
pub use pipeline::{build_index, encode_contour, encode_contour_trace, match_pair,
    pairwise_query_scores, prepare_contour, reencode_with_angle_bins, PairwiseMatch};
pub use pose::{align_pair, canonical_frame, procrustes, AlignedPair, SimilarityTransform};
pub use retrieval::{BullseyeReport, Index, QueryHit, QueryResult, ShapeRecord};
pub use shape_context::{chi2_cost, compute_histograms, CostMatrix, ScConfig, ScHistogram};
pub use synth::{encode_margins, gen_synthetic, LabeledContour};
