use archiguesser_core::api::ErrorBody;
use archiguesser_core::engine::EngineError;
use archiguesser_core::scoring::ScoringError;
use archiguesser_vision::VisionError;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;

/// Error response: a status code and an `{error, detail}` body.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub error: &'static str,
    pub detail: String,
}

impl ApiError {
    pub fn new(status: StatusCode, error: &'static str, detail: impl Into<String>) -> Self {
        ApiError {
            status,
            error,
            detail: detail.into(),
        }
    }

    pub fn bad_request(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", detail)
    }

    pub fn unprocessable(error: &'static str, detail: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, error, detail)
    }

    pub fn internal(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", detail)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::error!(status = %self.status, detail = %self.detail, "request failed");
        }
        let body = ErrorBody {
            error: self.error.to_string(),
            detail: self.detail,
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let detail = e.to_string();
        let (status, error) = match &e {
            EngineError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            EngineError::Validation(_) => (StatusCode::BAD_REQUEST, "validation"),
            EngineError::UnknownPlayer(_) => (StatusCode::BAD_REQUEST, "unknown_player"),
            EngineError::Scoring(ScoringError::ModeMismatch { .. }) => {
                (StatusCode::BAD_REQUEST, "mode_mismatch")
            }
            EngineError::Scoring(_) => (StatusCode::BAD_REQUEST, "invalid_guess"),
            EngineError::Phase { .. } => (StatusCode::CONFLICT, "phase"),
            EngineError::DuplicateGuess { .. } => (StatusCode::CONFLICT, "duplicate_guess"),
            EngineError::Conflict(_) => (StatusCode::CONFLICT, "conflict"),
            EngineError::Generation(_) => (StatusCode::BAD_GATEWAY, "generation"),
            EngineError::Log(_) | EngineError::Io(_) => {
                (StatusCode::INTERNAL_SERVER_ERROR, "internal")
            }
        };
        ApiError::new(status, error, detail)
    }
}

impl From<VisionError> for ApiError {
    fn from(e: VisionError) -> Self {
        let detail = e.to_string();
        match e {
            VisionError::ImageFormat(_) => {
                ApiError::new(StatusCode::UNSUPPORTED_MEDIA_TYPE, "unsupported_frame", detail)
            }
            VisionError::MissingCorners(_) => ApiError::unprocessable("missing_corners", detail),
            VisionError::Degenerate(_) | VisionError::OutsideBoard { .. } => {
                ApiError::unprocessable("uncalibratable_board", detail)
            }
            _ => ApiError::internal(detail),
        }
    }
}
