use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;

use mvcolor_core::{EditError, GraphError, OptimizeError, SpecError};

/// An error response: status plus a machine-readable code and a message.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError { status, code, message: message.into() }
    }

    pub fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "malformed_body", message)
    }

    pub fn not_found(code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn busy() -> ApiError {
        ApiError::new(StatusCode::CONFLICT, "optimize_running", "an optimization is running for this session")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

impl From<SpecError> for ApiError {
    fn from(e: SpecError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string())
    }
}

impl From<OptimizeError> for ApiError {
    fn from(e: OptimizeError) -> Self {
        match e {
            OptimizeError::InvalidConfig(_) => ApiError::new(StatusCode::BAD_REQUEST, "invalid_config", e.to_string()),
            OptimizeError::NoPalettes => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "no_palettes", e.to_string()),
            OptimizeError::AllRejected => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "all_rejected", e.to_string()),
        }
    }
}

impl From<EditError> for ApiError {
    fn from(e: EditError) -> Self {
        match e {
            EditError::UnknownView(_) => ApiError::not_found("unknown_view", e.to_string()),
            EditError::UnknownEntity { .. } => ApiError::not_found("unknown_entity", e.to_string()),
            EditError::DerivedEntity { .. } => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "derived_entity", e.to_string()),
            EditError::NoSelection => ApiError::new(StatusCode::CONFLICT, "no_selection", e.to_string()),
            EditError::Decode(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "decode_failed", e.to_string()),
        }
    }
}
