//! The shapeseq HTTP service: encoding, alignment, matching, synthetic
//! data and index retrieval over JSON.
//!
//! The service owns one [`RunConfig`], fixed at startup so every symbol it
//! produces shares a single fingerprint, and at most one in-memory index.
//! Index persistence belongs to clients: `/index/dump` returns the exact
//! on-disk index document and `/index/load` accepts it.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};

use shapeseq_api as api;
use shapeseq_core::alignment::{nw_fill, traceback, AlignOp};
use shapeseq_core::retrieval::{Index, QueryHit, QueryResult};
use shapeseq_core::{
    encode_contour, encode_contour_trace, gen_synthetic, match_pair, pairwise_query_scores,
    reencode_with_angle_bins, trace_boundary, BinaryMask, Contour, Error as CoreError, RunConfig,
    ShapeRecord, SymbolString,
};

/// Shared service state.
pub struct AppState {
    config: RunConfig,
    fingerprint: String,
    index: RwLock<Option<Arc<Index>>>,
}

impl AppState {
    pub fn new(config: RunConfig) -> Arc<AppState> {
        let fingerprint = config.fingerprint();
        Arc::new(AppState {
            config,
            fingerprint,
            index: RwLock::new(None),
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    fn current_index(&self) -> Result<Arc<Index>, ApiError> {
        self.index
            .read()
            .expect("index lock")
            .clone()
            .ok_or_else(|| ApiError::not_found("no index loaded"))
    }

    fn install_index(&self, index: Index) {
        *self.index.write().expect("index lock") = Some(Arc::new(index));
    }

    /// Install an index before serving (startup preload path).
    pub fn preload(&self, index: Index) {
        self.install_index(index);
    }
}

/// Build the application router.
pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/config", get(config))
        .route("/encode", post(encode))
        .route("/align", post(align))
        .route("/match", post(match_shapes))
        .route("/gen", post(gen))
        .route("/index/load", post(index_load))
        .route("/index/dump", get(index_dump))
        .route("/index/build", post(index_build))
        .route("/index/add", post(index_add))
        .route("/index/info", get(index_info))
        .route("/query", post(query))
        .route("/eval", post(eval))
        .with_state(state)
}

/// Error with an HTTP status, rendered as `{"error": "..."}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> ApiError {
        ApiError {
            status: StatusCode::NOT_FOUND,
            message: message.into(),
        }
    }
}

impl From<CoreError> for ApiError {
    fn from(err: CoreError) -> ApiError {
        let status = match &err {
            CoreError::DuplicateId(_) | CoreError::FingerprintMismatch { .. } => {
                StatusCode::CONFLICT
            }
            CoreError::EmptyIndex => StatusCode::NOT_FOUND,
            CoreError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError {
            status,
            message: err.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        tracing::debug!(status = %self.status, "request failed: {}", self.message);
        (
            self.status,
            Json(api::ErrorResponse {
                error: self.message,
            }),
        )
            .into_response()
    }
}

/// Run CPU-bound work off the async executor.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        message: format!("worker task failed: {e}"),
    })?
}

async fn healthz() -> Json<api::HealthResponse> {
    Json(api::HealthResponse {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

async fn config(State(state): State<Arc<AppState>>) -> Json<api::ConfigResponse> {
    Json(api::ConfigResponse {
        fingerprint: state.fingerprint.clone(),
        kv: state.config.to_kv_text(),
    })
}

fn contour_from_request(
    contour: Option<Contour>,
    mask: Option<api::MaskGrid>,
) -> Result<Contour, ApiError> {
    match (contour, mask) {
        (Some(c), None) => Ok(c),
        (None, Some(grid)) => {
            let rows = serde_json::to_vec(&grid).expect("grid serializes");
            let mask = BinaryMask::from_json(&rows)?;
            Ok(trace_boundary(&mask)?)
        }
        (Some(_), Some(_)) => Err(ApiError::bad_request(
            "provide either a contour or a mask, not both",
        )),
        (None, None) => Err(ApiError::bad_request("provide a contour or a mask")),
    }
}

async fn encode(
    State(state): State<Arc<AppState>>,
    Json(req): Json<api::EncodeRequest>,
) -> Result<Json<api::EncodeResponse>, ApiError> {
    blocking(move || {
        let contour = contour_from_request(req.contour, req.mask)?;
        let cfg = &state.config;
        if req.trace {
            let trace = encode_contour_trace(&contour, cfg)?;
            Ok(Json(api::EncodeResponse {
                tokens: trace.symbols.to_text(),
                trace: Some(trace),
            }))
        } else {
            Ok(Json(api::EncodeResponse {
                tokens: encode_contour(&contour, cfg)?.to_text(),
                trace: None,
            }))
        }
    })
    .await
}

async fn align(
    State(state): State<Arc<AppState>>,
    Json(req): Json<api::AlignRequest>,
) -> Result<Json<api::AlignResponse>, ApiError> {
    blocking(move || {
        let a = SymbolString::parse(&req.a)?;
        let b = SymbolString::parse(&req.b)?;
        let table = &state.config.score;
        let f = nw_fill(a.tokens(), b.tokens(), table);
        let alignment = traceback(&f, a.tokens(), b.tokens(), table)?;
        let mut row_a = Vec::with_capacity(alignment.ops.len());
        let mut row_b = Vec::with_capacity(alignment.ops.len());
        for op in &alignment.ops {
            match op.op {
                AlignOp::Match { a_idx, b_idx } => {
                    row_a.push(a.tokens()[a_idx].name());
                    row_b.push(b.tokens()[b_idx].name());
                }
                AlignOp::GapInA { b_idx } => {
                    row_a.push("-".into());
                    row_b.push(b.tokens()[b_idx].name());
                }
                AlignOp::GapInB { a_idx } => {
                    row_a.push(a.tokens()[a_idx].name());
                    row_b.push("-".into());
                }
            }
        }
        let matrix = req.dump_matrix.then(|| {
            (0..f.rows())
                .map(|i| (0..f.cols()).map(|j| f.get(i, j)).collect())
                .collect()
        });
        Ok(Json(api::AlignResponse {
            score: alignment.score,
            normalized: alignment.normalized,
            ops: alignment.ops,
            row_a,
            row_b,
            matrix,
        }))
    })
    .await
}

async fn match_shapes(
    State(state): State<Arc<AppState>>,
    Json(req): Json<api::MatchRequest>,
) -> Result<Json<api::MatchResponse>, ApiError> {
    blocking(move || {
        let m = match_pair(&req.a, &req.b, &state.config)?;
        Ok(Json(api::MatchResponse {
            similarity: m.similarity,
            score: m.score,
            tokens_a: m.symbols_a.to_text(),
            tokens_b: m.symbols_b.to_text(),
            pairs: m.alignment.correspondence.pairs.clone(),
            transform: m.alignment.transform,
            residual: m.alignment.residual,
        }))
    })
    .await
}

async fn gen(
    State(state): State<Arc<AppState>>,
    Json(req): Json<api::GenRequest>,
) -> Result<Json<api::GenResponse>, ApiError> {
    blocking(move || {
        let shapes = gen_synthetic(
            req.class_count,
            req.per_class,
            req.noise_level,
            req.seed,
            &state.config,
        )?;
        Ok(Json(api::GenResponse { shapes }))
    })
    .await
}

async fn index_load(
    State(state): State<Arc<AppState>>,
    body: String,
) -> Result<StatusCode, ApiError> {
    blocking(move || {
        let index = Index::from_json(&body)?;
        if index.fingerprint() != state.fingerprint {
            return Err(CoreError::FingerprintMismatch {
                record: index.fingerprint().to_string(),
                index: state.fingerprint.clone(),
            }
            .into());
        }
        state.install_index(index);
        Ok(StatusCode::NO_CONTENT)
    })
    .await
}

async fn index_dump(State(state): State<Arc<AppState>>) -> Result<String, ApiError> {
    let index = state.current_index()?;
    Ok(index.to_json()?)
}

async fn index_build(
    State(state): State<Arc<AppState>>,
    Json(req): Json<api::IndexBuildRequest>,
) -> Result<Json<api::IndexInfoResponse>, ApiError> {
    blocking(move || {
        let items: Vec<(String, Option<String>, Contour)> = req
            .records
            .into_iter()
            .map(|r| (r.id, r.label, r.contour))
            .collect();
        let index = shapeseq_core::build_index(&items, &state.config, req.store_contours)?;
        let info = info_for(&index);
        state.install_index(index);
        Ok(Json(info))
    })
    .await
}

async fn index_add(
    State(state): State<Arc<AppState>>,
    Json(req): Json<api::IndexAddRequest>,
) -> Result<Json<api::IndexInfoResponse>, ApiError> {
    blocking(move || {
        let current = state.current_index()?;
        let symbols = encode_contour(&req.contour, &state.config)?;
        let mut next = (*current).clone();
        next.add(ShapeRecord {
            id: req.id,
            label: req.label,
            symbols,
            fingerprint: state.fingerprint.clone(),
            contour: req.store_contour.then_some(req.contour),
        })?;
        let info = info_for(&next);
        state.install_index(next);
        Ok(Json(info))
    })
    .await
}

async fn index_info(
    State(state): State<Arc<AppState>>,
) -> Result<Json<api::IndexInfoResponse>, ApiError> {
    let index = state.current_index()?;
    Ok(Json(info_for(&index)))
}

fn info_for(index: &Index) -> api::IndexInfoResponse {
    let mut labels: BTreeMap<String, usize> = BTreeMap::new();
    for r in index.records() {
        if let Some(label) = &r.label {
            *labels.entry(label.clone()).or_insert(0) += 1;
        }
    }
    api::IndexInfoResponse {
        size: index.len(),
        fingerprint: index.fingerprint().to_string(),
        version: shapeseq_core::retrieval::INDEX_FORMAT_VERSION,
        labels,
        stores_contours: !index.is_empty() && index.records().iter().all(|r| r.contour.is_some()),
    }
}

async fn query(
    State(state): State<Arc<AppState>>,
    Json(req): Json<api::QueryRequest>,
) -> Result<Json<api::QueryResponse>, ApiError> {
    blocking(move || {
        let index = state.current_index()?;
        if req.k == 0 {
            return Err(ApiError::bad_request("k must be >= 1"));
        }
        let result = if req.pairwise {
            let contour = req.contour.as_ref().ok_or_else(|| {
                ApiError::bad_request("pairwise queries need a contour, not tokens")
            })?;
            let mut hits: Vec<QueryHit> = pairwise_query_scores(&index, contour, &state.config)?
                .into_iter()
                .map(|(id, label, similarity)| QueryHit {
                    id,
                    label,
                    similarity,
                })
                .collect();
            hits.sort_by(|x, y| {
                y.similarity
                    .total_cmp(&x.similarity)
                    .then_with(|| x.id.cmp(&y.id))
            });
            hits.truncate(req.k);
            QueryResult { hits }
        } else {
            let symbols = match (&req.contour, &req.tokens) {
                (Some(c), None) => encode_contour(c, &state.config)?,
                (None, Some(t)) => SymbolString::parse(t)?,
                (Some(_), Some(_)) => {
                    return Err(ApiError::bad_request(
                        "provide either a contour or tokens, not both",
                    ))
                }
                (None, None) => {
                    return Err(ApiError::bad_request("provide a contour or tokens"))
                }
            };
            index.query_topk(&symbols, req.k, &state.config.score, req.prefilter)?
        };
        Ok(Json(api::QueryResponse { hits: result.hits }))
    })
    .await
}

async fn eval(
    State(state): State<Arc<AppState>>,
    Json(req): Json<api::EvalRequest>,
) -> Result<Json<api::EvalResponse>, ApiError> {
    blocking(move || {
        let index = state.current_index()?;
        let report = index.bullseye(req.depth, &state.config.score)?;
        let sweep = match req.angle_bin_sweep {
            None => None,
            Some(bins) => {
                let mut entries = Vec::with_capacity(bins.len());
                for k in bins {
                    let swept = reencode_with_angle_bins(&index, &state.config, k)?;
                    let swept_report = swept.bullseye(req.depth, &state.config.score)?;
                    entries.push(api::SweepEntry {
                        angle_bins: k,
                        bullseye: swept_report.score,
                    });
                }
                Some(entries)
            }
        };
        Ok(Json(api::EvalResponse { report, sweep }))
    })
    .await
}
