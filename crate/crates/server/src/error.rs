//! The JSON error envelope `{code, message, detail?}` and conversions from
//! the core error types.

use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{FromRequest, FromRequestParts};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use circos_core::corpus::CorpusError;
use circos_core::dag::DagError;
use circos_core::render::{DataError, LayoutError};
use circos_core::{ParseError, RecommendError, RenderError, RetrievalError};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError { status, code, message: message.into(), detail: None }
    }

    pub fn with_detail(mut self, detail: Value) -> ApiError {
        self.detail = Some(detail);
        self
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn empty_corpus() -> ApiError {
        ApiError::new(StatusCode::CONFLICT, "empty_corpus", "the corpus has no records")
    }

    /// Logged in full; the client only sees a generic message.
    pub fn internal(message: impl Into<String>) -> ApiError {
        tracing::error!("{}", message.into());
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", "internal server error")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<ParseError> for ApiError {
    fn from(e: ParseError) -> Self {
        ApiError::bad_request("invalid_config", e.to_string()).with_detail(json!({
            "kind": e.code(),
            "offset": e.offset(),
        }))
    }
}

impl From<CorpusError> for ApiError {
    fn from(e: CorpusError) -> Self {
        match &e {
            CorpusError::MalformedStream { line, .. } => {
                ApiError::bad_request("malformed_stream", e.to_string()).with_detail(json!({ "line": line }))
            }
            CorpusError::NotFound(_) => ApiError::not_found(e.to_string()),
            CorpusError::EmptyCorpus => ApiError::empty_corpus(),
            CorpusError::Io { .. } => ApiError::internal(e.to_string()),
        }
    }
}

impl From<RetrievalError> for ApiError {
    fn from(e: RetrievalError) -> Self {
        match &e {
            RetrievalError::EmptyCorpus => ApiError::empty_corpus(),
            RetrievalError::InvalidK => ApiError::bad_request("invalid_k", e.to_string()),
            RetrievalError::StaleIndex { .. } => ApiError::new(StatusCode::CONFLICT, "stale_index", e.to_string()),
            RetrievalError::ProviderUnavailable(_)
            | RetrievalError::DimensionMismatch(_)
            | RetrievalError::Record { .. } => {
                ApiError::new(StatusCode::BAD_GATEWAY, "provider_unavailable", e.to_string())
            }
        }
    }
}

impl From<RecommendError> for ApiError {
    fn from(e: RecommendError) -> Self {
        match e {
            RecommendError::GenerationInvalid { ref raw, ref last_error } => {
                let detail = json!({ "attempts": raw.len(), "lastError": last_error, "responses": raw });
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "generation_invalid", e.to_string()).with_detail(detail)
            }
            RecommendError::ProviderUnavailable(_) => {
                ApiError::new(StatusCode::BAD_GATEWAY, "provider_unavailable", e.to_string())
            }
            RecommendError::EmptyCorpus => ApiError::empty_corpus(),
            RecommendError::NotFound(_) => ApiError::not_found(e.to_string()),
            RecommendError::Retrieval(inner) => inner.into(),
        }
    }
}

impl From<DagError> for ApiError {
    fn from(e: DagError) -> Self {
        match e {
            DagError::EmptyInput => ApiError::empty_corpus(),
            DagError::NodeNotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "node_not_found", e.to_string()),
            DagError::Unreachable(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "unreachable", e.to_string()),
        }
    }
}

impl From<DataError> for ApiError {
    fn from(e: DataError) -> Self {
        match &e {
            DataError::NotFound(_) => ApiError::not_found(e.to_string()),
            DataError::UnknownKind(_) => ApiError::bad_request("unknown_kind", e.to_string()),
            DataError::Csv { line, .. } | DataError::Invalid { line, .. } | DataError::UnknownBlock { line, .. } => {
                ApiError::bad_request("invalid_data", e.to_string()).with_detail(json!({ "line": line }))
            }
            DataError::DuplicateBlock(_) | DataError::Empty => ApiError::bad_request("invalid_data", e.to_string()),
        }
    }
}

impl From<LayoutError> for ApiError {
    fn from(e: LayoutError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "layout_error", e.to_string())
    }
}

impl From<RenderError> for ApiError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::Layout(l) => l.into(),
            RenderError::Data(d) => d.into(),
            RenderError::NoSuchTrack(_) => ApiError::new(StatusCode::NOT_FOUND, "track_not_found", e.to_string()),
            RenderError::IncompatibleDataset { .. } => ApiError::bad_request("incompatible_dataset", e.to_string()),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new(e.status(), "invalid_json", e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::bad_request("invalid_query", e.body_text())
    }
}

impl From<PathRejection> for ApiError {
    fn from(e: PathRejection) -> Self {
        ApiError::bad_request("invalid_path", e.body_text())
    }
}

/// `Json` whose rejections use the envelope.
#[derive(FromRequest)]
#[from_request(via(axum::Json), rejection(ApiError))]
pub struct ApiJson<T>(pub T);

#[derive(FromRequestParts)]
#[from_request(via(axum::extract::Query), rejection(ApiError))]
pub struct ApiQuery<T>(pub T);

#[derive(FromRequestParts)]
#[from_request(via(axum::extract::Path), rejection(ApiError))]
pub struct ApiPath<T>(pub T);
