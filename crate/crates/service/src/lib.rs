//! HTTP/JSON front end for the mcaw pipeline.
//!
//! Datasets and fitted models live in an in-memory store keyed by random
//! 128-bit tokens. Stored values never change, so every model endpoint is
//! cacheable.

mod api;
mod error;
mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::DefaultBodyLimit;
use axum::http::{HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::CorsLayer;

pub use error::ApiError;
pub use store::{DatasetEntry, ModelEntry, Store};

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_MAX_UPLOAD: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub port: u16,
    pub max_upload: usize,
    pub ui_origin: Option<String>,
    pub snapshot_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            port: DEFAULT_PORT,
            max_upload: DEFAULT_MAX_UPLOAD,
            ui_origin: None,
            snapshot_dir: None,
        }
    }
}

impl ServiceConfig {
    /// Reads MCAW_PORT, MCAW_MAX_UPLOAD, MCAW_UI_ORIGIN and MCAW_SNAPSHOT_DIR.
    pub fn from_env() -> Result<Self, String> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        let mut c = Self::default();
        if let Some(p) = get("MCAW_PORT") {
            c.port = p.parse().map_err(|_| format!("MCAW_PORT {p:?} is not a port"))?;
        }
        if let Some(m) = get("MCAW_MAX_UPLOAD") {
            c.max_upload = m
                .parse()
                .map_err(|_| format!("MCAW_MAX_UPLOAD {m:?} is not a byte count"))?;
        }
        c.ui_origin = get("MCAW_UI_ORIGIN").filter(|s| !s.is_empty());
        c.snapshot_dir = get("MCAW_SNAPSHOT_DIR").filter(|s| !s.is_empty()).map(PathBuf::from);
        Ok(c)
    }
}

pub fn router(config: &ServiceConfig) -> Router {
    let store = Arc::new(Store::new(config.snapshot_dir.clone()));
    let mut app = Router::new()
        .route("/healthz", get(api::healthz))
        .route("/api/datasets", post(api::upload_dataset))
        .route("/api/datasets/{id}", get(api::get_dataset))
        .route("/api/datasets/{id}/mca", post(api::fit_model))
        .route("/api/datasets/{id}/frequencies", get(api::frequencies))
        .route("/api/datasets/{id}/rates", get(api::rates))
        .route("/api/datasets/{id}/proportions", get(api::proportions))
        .route("/api/models/{id}", get(api::get_model))
        .route("/api/models/{id}/eigenvalues", get(api::eigenvalues))
        .route("/api/models/{id}/coordinates", get(api::coordinates))
        .route("/api/models/{id}/cos2", get(api::cos2))
        .route("/api/models/{id}/contributions", get(api::contributions))
        .route("/api/models/{id}/eta2", get(api::eta2))
        .route("/api/models/{id}/dimdesc", get(api::dimdesc))
        .route("/api/models/{id}/ellipses", get(api::ellipses))
        .route("/api/models/{id}/rates", get(api::model_rates))
        .route("/api/models/{id}/supplementary", post(api::supplementary))
        .layer(DefaultBodyLimit::max(config.max_upload))
        .with_state(store);
    if let Some(origin) = &config.ui_origin {
        if let Ok(v) = HeaderValue::from_str(origin) {
            app = app.layer(
                CorsLayer::new()
                    .allow_origin(v)
                    .allow_methods([Method::GET, Method::POST])
                    .allow_headers([axum::http::header::CONTENT_TYPE]),
            );
        }
    }
    app
}

pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let addr = SocketAddr::from(([127, 0, 0, 1], config.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, max_upload = config.max_upload, "listening");
    axum::serve(listener, router(&config)).await
}
