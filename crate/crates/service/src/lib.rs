//! HTTP/JSON front end over the `tunespace` library.
//!
//! One-shot endpoints (`/solve`, `/validate`, `/stats`, `/generate`,
//! `/bench`) take a problem document and return a result. `/spaces` resolves
//! a problem once and keeps the indexed space in memory under a UUID for
//! neighbor, sampling, index and bounds queries. Wire types live in
//! [`tunespace_client::api`].
//!
//! Solving runs on the blocking pool. Benchmarks are serialized so that two
//! runs never time each other.

mod error;
mod routes;
mod store;

use std::future::Future;
use std::sync::Arc;

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post};
use axum::Router;
use tokio::net::TcpListener;
use tokio::sync::Mutex;

pub use error::ApiError;
pub use store::Session;

use store::Store;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Resolved spaces kept at once; creating more fails until one is deleted.
    pub max_spaces: usize,
    /// Largest Cartesian size the brute-force oracle will enumerate.
    pub oracle_limit: u128,
    pub body_limit: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            max_spaces: 64,
            oracle_limit: tunespace::bench::ORACLE_LIMIT,
            body_limit: 64 << 20,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    config: Arc<ServiceConfig>,
    store: Arc<Store>,
    bench_lock: Arc<Mutex<()>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState {
            store: Arc::new(Store::new(config.max_spaces)),
            config: Arc::new(config),
            bench_lock: Arc::new(Mutex::new(())),
        }
    }
}

impl Default for AppState {
    fn default() -> Self {
        AppState::new(ServiceConfig::default())
    }
}

pub fn router(state: AppState) -> Router {
    let limit = state.config.body_limit;
    Router::new()
        .route("/health", get(routes::health))
        .route("/solve", post(routes::solve))
        .route("/validate", post(routes::validate))
        .route("/stats", post(routes::stats))
        .route("/generate", post(routes::generate))
        .route("/bench", post(routes::bench))
        .route("/spaces", post(routes::create_space))
        .route("/spaces/{id}", get(routes::space_info).delete(routes::delete_space))
        .route("/spaces/{id}/export", get(routes::export))
        .route("/spaces/{id}/neighbors", post(routes::neighbors))
        .route("/spaces/{id}/sample", post(routes::sample))
        .route("/spaces/{id}/index", post(routes::index_of))
        .route("/spaces/{id}/bounds", post(routes::bounds))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    serve_until(listener, state, std::future::pending()).await
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve_until(
    listener: TcpListener,
    state: AppState,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(%addr, "listening");
    }
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}
