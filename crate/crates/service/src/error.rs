use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use boundline::Error;
use serde_json::json;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::ImageNotFound(_) | Error::WorldFileNotFound(_) | Error::UnknownNode(_) => StatusCode::NOT_FOUND,
            Error::NoPath(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Error::State(_) => StatusCode::CONFLICT,
            Error::WorldFileParse { .. }
            | Error::Format(_)
            | Error::TooSmall { .. }
            | Error::SingularTransform(_)
            | Error::Dimension(_)
            | Error::Parameter(_)
            | Error::UndefinedMeasure(_)
            | Error::Domain(_)
            | Error::EmptyReference
            | Error::GeoJson(_)
            | Error::Json(_)
            | Error::Image(_) => StatusCode::BAD_REQUEST,
            Error::EigenNoConvergence { .. } | Error::Topology { .. } | Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

pub type ApiResult<T> = std::result::Result<T, ApiError>;
