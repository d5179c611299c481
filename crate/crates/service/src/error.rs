use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;

use crate::api::{ErrorBody, FieldError};

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody { error: code.into(), message: message.into(), field: None, incident_id: None },
        }
    }

    pub fn field(status: StatusCode, code: &str, field: &str, message: impl Into<String>) -> Self {
        let mut e = ApiError::new(status, code, message);
        e.body.field = Some(field.to_string());
        e
    }

    pub fn not_ready() -> Self {
        ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "not_ready", "models are still loading")
    }

    pub fn unknown_model(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "unknown_model", format!("no model with id '{id}'"))
    }

    /// Logs the details server-side and returns only an incident id.
    pub fn internal(detail: impl std::fmt::Display) -> Self {
        let id = uuid::Uuid::new_v4().to_string();
        log::error!("incident {id}: {detail}");
        let mut e = ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "internal",
            "prediction failed; quote the incident id when reporting",
        );
        e.body.incident_id = Some(id);
        e
    }
}

impl From<FieldError> for ApiError {
    fn from(e: FieldError) -> Self {
        ApiError::field(StatusCode::UNPROCESSABLE_ENTITY, "invalid_field", &e.field, e.message)
    }
}

impl From<gpsurr_core::Error> for ApiError {
    fn from(e: gpsurr_core::Error) -> Self {
        use gpsurr_core::Error as E;
        let unprocessable = StatusCode::UNPROCESSABLE_ENTITY;
        match &e {
            E::UnknownFeature { name, .. } => {
                ApiError::field(unprocessable, "unknown_feature", name, e.to_string())
            }
            E::MissingFeatures { missing, .. } => {
                ApiError::field(unprocessable, "missing_features", &missing.join(","), e.to_string())
            }
            E::NonFinite(what) => ApiError::field(unprocessable, "non_finite", what, e.to_string()),
            E::DimensionMismatch { .. } | E::InvalidArgument(_) | E::EmptyInput(_) => {
                ApiError::new(unprocessable, "invalid_request", e.to_string())
            }
            _ => ApiError::internal(e),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
