//! HTTP API over one loaded netlist.
//!
//! Every mutating route calls exactly one netlist operation; reads and
//! analyses return the same JSON the command line prints with `--json`.
//! Long analyses run as jobs (`POST /api/analyses/{kind}`, then poll
//! `GET /api/analyses/{job}`); mutations are refused with `409` while one is
//! running. The route table and payloads are listed in `API.md`.

mod routes;
mod session;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use gatescope::netlist::Netlist;

pub use routes::router;
pub use session::{Job, JobStatus, Session};

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Internal(String),
}

impl ApiError {
    fn status(&self) -> StatusCode {
        match self {
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}

impl From<gatescope::netlist::NetlistError> for ApiError {
    fn from(e: gatescope::netlist::NetlistError) -> Self {
        ApiError::BadRequest(e.to_string())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub addr: SocketAddr,
    /// Directory served at `/` instead of the built-in page.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            addr: SocketAddr::from(([127, 0, 0, 1], 8080)),
            static_dir: None,
        }
    }
}

/// Bind and serve until the task is dropped.
pub async fn serve(config: ServerConfig, netlist: Netlist) -> Result<(), ServerError> {
    let listener = tokio::net::TcpListener::bind(config.addr)
        .await
        .map_err(|source| ServerError::Bind {
            addr: config.addr,
            source,
        })?;
    log::info!(target: "api", "listening on http://{}", listener.local_addr()?);
    let app = router(Session::new(netlist), config.static_dir);
    axum::serve(listener, app).await?;
    Ok(())
}

pub type SharedSession = Arc<Session>;
