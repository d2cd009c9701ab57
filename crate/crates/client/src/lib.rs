//! Thin blocking client for the shapeseq HTTP API.

use serde::de::DeserializeOwned;
use serde::Serialize;
use shapeseq_api as api;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Http(#[from] reqwest::Error),

    #[error("server returned {status}: {message}")]
    Api { status: u16, message: String },
}

pub type Result<T> = std::result::Result<T, ClientError>;

/// One service endpoint. Methods map 1:1 onto routes; non-2xx responses
/// surface as [`ClientError::Api`] with the server's message.
pub struct ShapeseqClient {
    base: String,
    http: reqwest::blocking::Client,
}

impl ShapeseqClient {
    /// `base_url` like `http://127.0.0.1:7878`, with or without a trailing
    /// slash. No timeout is set; evaluation calls can run long.
    pub fn new(base_url: &str) -> Result<ShapeseqClient> {
        let http = reqwest::blocking::Client::builder()
            .timeout(None)
            .build()?;
        Ok(ShapeseqClient {
            base: base_url.trim_end_matches('/').to_string(),
            http,
        })
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn check(response: reqwest::blocking::Response) -> Result<reqwest::blocking::Response> {
        let status = response.status();
        if status.is_success() {
            return Ok(response);
        }
        let message = response
            .json::<api::ErrorResponse>()
            .map(|e| e.error)
            .unwrap_or_else(|_| status.to_string());
        Err(ClientError::Api {
            status: status.as_u16(),
            message,
        })
    }

    fn get_json<T: DeserializeOwned>(&self, path: &str) -> Result<T> {
        let resp = Self::check(self.http.get(format!("{}{path}", self.base)).send()?)?;
        Ok(resp.json()?)
    }

    fn post_json<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        let resp = Self::check(
            self.http
                .post(format!("{}{path}", self.base))
                .json(body)
                .send()?,
        )?;
        Ok(resp.json()?)
    }

    pub fn healthz(&self) -> Result<api::HealthResponse> {
        self.get_json("/healthz")
    }

    pub fn config(&self) -> Result<api::ConfigResponse> {
        self.get_json("/config")
    }

    pub fn encode(&self, req: &api::EncodeRequest) -> Result<api::EncodeResponse> {
        self.post_json("/encode", req)
    }

    pub fn align(&self, req: &api::AlignRequest) -> Result<api::AlignResponse> {
        self.post_json("/align", req)
    }

    pub fn match_shapes(&self, req: &api::MatchRequest) -> Result<api::MatchResponse> {
        self.post_json("/match", req)
    }

    pub fn gen(&self, req: &api::GenRequest) -> Result<api::GenResponse> {
        self.post_json("/gen", req)
    }

    /// Upload a full index document (the on-disk file format).
    pub fn index_load(&self, index_json: &str) -> Result<()> {
        Self::check(
            self.http
                .post(format!("{}/index/load", self.base))
                .body(index_json.to_string())
                .send()?,
        )?;
        Ok(())
    }

    /// Download the loaded index as its on-disk document.
    pub fn index_dump(&self) -> Result<String> {
        let resp = Self::check(self.http.get(format!("{}/index/dump", self.base)).send()?)?;
        Ok(resp.text()?)
    }

    pub fn index_build(&self, req: &api::IndexBuildRequest) -> Result<api::IndexInfoResponse> {
        self.post_json("/index/build", req)
    }

    pub fn index_add(&self, req: &api::IndexAddRequest) -> Result<api::IndexInfoResponse> {
        self.post_json("/index/add", req)
    }

    pub fn index_info(&self) -> Result<api::IndexInfoResponse> {
        self.get_json("/index/info")
    }

    pub fn query(&self, req: &api::QueryRequest) -> Result<api::QueryResponse> {
        self.post_json("/query", req)
    }

    pub fn eval(&self, req: &api::EvalRequest) -> Result<api::EvalResponse> {
        self.post_json("/eval", req)
    }
}
