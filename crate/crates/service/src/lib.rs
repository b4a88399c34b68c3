//! Axum routes over [`pqbench_core::api`]. Timing runs are serialized so two
//! benchmarks never share the CPU.

use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tokio::net::TcpListener;
use tokio::sync::Mutex;

use pqbench_core::api::{self, ApiError, BenchRequest, ErrorKind, ReportRequest, SecurityLevelRequest, TlsMeasureRequest};
use pqbench_core::registry::Registry;

pub struct AppState {
    pub registry: Registry,
    bench_lock: Mutex<()>,
}

impl AppState {
    pub fn new(registry: Registry) -> Arc<Self> {
        Arc::new(AppState {
            registry,
            bench_lock: Mutex::new(()),
        })
    }
}

/// JSON error body with a status derived from the error kind.
pub struct HttpError(pub ApiError);

impl From<ApiError> for HttpError {
    fn from(e: ApiError) -> Self {
        HttpError(e)
    }
}

impl IntoResponse for HttpError {
    fn into_response(self) -> Response {
        let status = match self.0.kind {
            ErrorKind::BadRequest => StatusCode::BAD_REQUEST,
            ErrorKind::NotFound => StatusCode::NOT_FOUND,
            ErrorKind::Failed => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(self.0)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, HttpError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/schemes", get(schemes))
        .route("/registry/{name}", get(registry_entry))
        .route("/assess/{name}", get(assess))
        .route("/security-level", post(security_level))
        .route("/nist-level/{level}", get(nist_level))
        .route("/bench/kem", post(bench_kem))
        .route("/bench/sig", post(bench_sig))
        .route("/tls/measure", post(tls_measure))
        .route("/report", post(report))
        .with_state(state)
}

pub async fn serve(listener: TcpListener, registry: Registry) -> std::io::Result<()> {
    axum::serve(listener, router(AppState::new(registry))).await
}

async fn schemes(State(s): State<Arc<AppState>>) -> Json<api::SchemeList> {
    Json(api::schemes(&s.registry))
}

async fn registry_entry(State(s): State<Arc<AppState>>, Path(name): Path<String>) -> ApiResult<pqbench_core::registry::SchemeMetadata> {
    Ok(Json(api::lookup(&s.registry, &name)?))
}

async fn assess(State(s): State<Arc<AppState>>, Path(name): Path<String>) -> ApiResult<pqbench_core::registry::SecurityAssessment> {
    Ok(Json(api::assess(&s.registry, &name)?))
}

async fn security_level(Json(req): Json<SecurityLevelRequest>) -> ApiResult<api::SecurityLevel> {
    Ok(Json(api::security_level(req)?))
}

async fn nist_level(Path(level): Path<u8>) -> ApiResult<pqbench_core::registry::AlgoClass> {
    Ok(Json(api::nist_level(level)?))
}

/// Runs `f` on the blocking pool while holding the bench lock.
async fn exclusive<T, F>(state: &AppState, f: F) -> Result<T, HttpError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    let _guard = state.bench_lock.lock().await;
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| HttpError(ApiError::failed(format!("worker failed: {e}"))))?
        .map_err(HttpError)
}

async fn bench_kem(State(s): State<Arc<AppState>>, Json(req): Json<BenchRequest>) -> ApiResult<Vec<pqbench_core::bench::BenchRecord>> {
    tracing::info!(scheme = %req.scheme, "bench kem");
    Ok(Json(exclusive(&s, move || api::bench_kem(&req)).await?))
}

async fn bench_sig(State(s): State<Arc<AppState>>, Json(req): Json<BenchRequest>) -> ApiResult<Vec<pqbench_core::bench::BenchRecord>> {
    tracing::info!(scheme = %req.scheme, "bench sig");
    Ok(Json(exclusive(&s, move || api::bench_sig(&req)).await?))
}

async fn tls_measure(State(s): State<Arc<AppState>>, Json(req): Json<TlsMeasureRequest>) -> ApiResult<api::TlsMeasureResponse> {
    tracing::info!(suite = %req.suite, "tls measure");
    let state = s.clone();
    Ok(Json(exclusive(&s, move || api::tls_measure(&state.registry, &req)).await?))
}

async fn report(Json(req): Json<ReportRequest>) -> ApiResult<api::ReportResponse> {
    Ok(Json(api::report(&req)?))
}
