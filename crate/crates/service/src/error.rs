use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use mcaw_core::schema::ValidationReport;
use mcaw_core::{Error, ErrorClass};
use serde::Serialize;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
    pub validation: Option<ValidationReport>,
}

#[derive(Serialize)]
struct Body<'a> {
    error: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<&'a ValidationReport>,
}

impl ApiError {
    pub fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
            validation: None,
        }
    }

    pub fn not_found(kind: &str, id: &str) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            message: format!("unknown {kind} id {id:?}"),
            validation: None,
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e.class() {
            ErrorClass::Usage | ErrorClass::Data => StatusCode::BAD_REQUEST,
            ErrorClass::Degenerate => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self {
            status,
            message: e.to_string(),
            validation: None,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = mcaw_core::report::to_json(&Body {
            error: &self.message,
            validation: self.validation.as_ref(),
        });
        (
            self.status,
            [(axum::http::header::CONTENT_TYPE, "application/json")],
            body,
        )
            .into_response()
    }
}
