//! HTTP/JSON service over the exact real engine.
//!
//! Compiled trees are cached per canonical expression, so expansions done
//! for one request are reused by every later request on the same
//! expression. All computation runs on the blocking thread pool.

use std::collections::{HashMap, VecDeque};
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Instant;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::Mutex;
use tokio::net::TcpListener;

use sdreal_core::ctree::{apply, eval_at, eval_at_counted};
use sdreal_core::dsl;
use sdreal_core::integrate::integral;
use sdreal_core::oracle::logistic_f64;
use sdreal_core::rational::{self, Rational};
use sdreal_core::render::{render_ascii, render_dot};
use sdreal_core::sdstream::{rational_stream, render_digits};
use sdreal_core::{CTree, CoreError, FuncExpr};
use sdreal_proto::*;

/// Trees kept in the cache before the oldest is dropped.
pub const CACHE_CAPACITY: usize = 64;

const DEMO_EXPR: &str = "pow(logistic(2), 100)";
const DEMO_START: &str = "7/10";
const DEMO_ITERATIONS: u32 = 100;
const DEMO_PREC: u32 = 100;

#[derive(Clone, Default)]
pub struct AppState {
    cache: Arc<TreeCache>,
}

impl AppState {
    pub fn new() -> AppState {
        AppState::default()
    }
}

#[derive(Default)]
struct TreeCache {
    inner: Mutex<CacheInner>,
}

#[derive(Default)]
struct CacheInner {
    trees: HashMap<String, CTree>,
    order: VecDeque<String>,
}

impl TreeCache {
    fn get_or_build(&self, e: &FuncExpr) -> Result<CTree, CoreError> {
        let key = e.to_string();
        let mut inner = self.inner.lock();
        if let Some(t) = inner.trees.get(&key) {
            return Ok(t.clone());
        }
        // building is lazy and cheap; expansion happens on use
        let t = dsl::to_tree(e)?;
        if inner.order.len() >= CACHE_CAPACITY {
            if let Some(old) = inner.order.pop_front() {
                inner.trees.remove(&old);
            }
        }
        inner.order.push_back(key.clone());
        inner.trees.insert(key, t.clone());
        Ok(t)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route(EVAL, post(eval))
        .route(DIGITS, post(digits))
        .route(INTEGRATE, post(integrate))
        .route(TREE, post(tree))
        .route(BENCH, post(bench))
        .route(FLOAT_DEMO, get(float_demo))
        .route(HEALTH, get(|| async { "ok" }))
        .with_state(state)
}

/// Serves until the listener fails or `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(%addr, "listening");
    }
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}

/// Binds `addr` and serves in a background task, returning the bound address.
pub async fn spawn(addr: SocketAddr) -> std::io::Result<SocketAddr> {
    let listener = TcpListener::bind(addr).await?;
    let bound = listener.local_addr()?;
    tokio::spawn(serve(listener, AppState::new(), std::future::pending()));
    Ok(bound)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody { kind: ErrorKind::BadRequest, message: message.into(), position: None },
        }
    }

    fn internal(message: impl Into<String>) -> ApiError {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            body: ErrorBody { kind: ErrorKind::Internal, message: message.into(), position: None },
        }
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> ApiError {
        let message = e.to_string();
        let (kind, position) = match &e {
            CoreError::Syntax { position, .. } => (ErrorKind::Syntax, Some(*position)),
            CoreError::Range { position, .. } => (ErrorKind::Range, Some(*position)),
            CoreError::Domain(_) => (ErrorKind::Domain, None),
            CoreError::Arity { .. } | CoreError::IndexOutOfRange { .. } => (ErrorKind::Arity, None),
            CoreError::ResourceLimit(_) => (ErrorKind::ResourceLimit, None),
        };
        let status = if kind.is_user_error() {
            StatusCode::BAD_REQUEST
        } else {
            StatusCode::SERVICE_UNAVAILABLE
        };
        ApiError { status, body: ErrorBody { kind, message, position } }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> ApiError {
        ApiError::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn check_option(name: &str, value: u32) -> Result<usize, ApiError> {
    if (1..=MAX_OPTION).contains(&value) {
        Ok(value as usize)
    } else {
        Err(ApiError::bad_request(format!("{name} must be between 1 and {MAX_OPTION}, got {value}")))
    }
}

fn parse_point(text: &str) -> Result<Rational, ApiError> {
    let q = rational::parse(text)?;
    if !rational::in_unit_interval(&q) {
        return Err(CoreError::domain(format!("{} lies outside [-1, 1]", rational::render(&q))).into());
    }
    Ok(q)
}

/// Parses `expr` and fetches its tree from the cache.
fn compile(state: &AppState, expr: &str) -> Result<(FuncExpr, CTree), ApiError> {
    let e = dsl::parse(expr)?;
    let t = state.cache.get_or_build(&e)?;
    Ok((e, t))
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("computation failed: {e}")))?
}

async fn eval(
    State(state): State<AppState>,
    req: Result<Json<EvalRequest>, JsonRejection>,
) -> ApiResult<EvalResponse> {
    let Json(req) = req?;
    let prec = check_option("prec", req.prec)?;
    let places = req.decimal.map(|d| check_option("decimal", d)).transpose()?;
    let x = parse_point(&req.at)?;
    let (e, t) = compile(&state, &req.expr)?;
    let value = blocking(move || Ok(eval_at(&t, &x, prec)?)).await?;
    Ok(Json(EvalResponse {
        expr: e.to_string(),
        decimal: places.map(|p| rational::to_decimal(&value, p)),
        value: rational::render(&value),
        prec: req.prec,
    }))
}

async fn digits(
    State(state): State<AppState>,
    req: Result<Json<DigitsRequest>, JsonRejection>,
) -> ApiResult<DigitsResponse> {
    let Json(req) = req?;
    let count = check_option("count", req.count)?;
    let x = parse_point(&req.at)?;
    let (e, t) = compile(&state, &req.expr)?;
    let digits = blocking(move || {
        let out = apply(&t, &[rational_stream(&x)?])?;
        Ok(render_digits(&out.prefix(count)))
    })
    .await?;
    Ok(Json(DigitsResponse { expr: e.to_string(), digits }))
}

async fn integrate(
    State(state): State<AppState>,
    req: Result<Json<IntegrateRequest>, JsonRejection>,
) -> ApiResult<IntegrateResponse> {
    let Json(req) = req?;
    let k = check_option("prec", req.prec)?;
    let (e, t) = compile(&state, &req.expr)?;
    let r = blocking(move || Ok(integral(&t, k)?)).await?;
    Ok(Json(IntegrateResponse {
        expr: e.to_string(),
        value: rational::render(&r.value),
        error_bound: rational::render(&r.error_bound),
        nodes_visited: r.nodes_visited,
    }))
}

async fn tree(
    State(state): State<AppState>,
    req: Result<Json<TreeRequest>, JsonRejection>,
) -> ApiResult<TreeResponse> {
    let Json(req) = req?;
    let (e, t) = compile(&state, &req.expr)?;
    let depth = req.depth as usize;
    let format = req.format;
    let render = blocking(move || {
        Ok(match format {
            TreeFormat::Ascii => render_ascii(&t, depth)?,
            TreeFormat::Dot => render_dot(&t, depth)?,
        })
    })
    .await?;
    Ok(Json(TreeResponse { expr: e.to_string(), render }))
}

async fn bench(
    State(state): State<AppState>,
    req: Result<Json<BenchRequest>, JsonRejection>,
) -> ApiResult<BenchResponse> {
    let Json(req) = req?;
    let prec = check_option("prec", req.prec)?;
    let repeat = check_option("repeat", req.repeat)?;
    let x = parse_point(&req.at)?;
    let (e, t) = compile(&state, &req.expr)?;
    // all repetitions on one thread, so the expansion counter sees them all
    let (value, runs) = blocking(move || {
        let mut runs = Vec::with_capacity(repeat);
        let mut value = None;
        for _ in 0..repeat {
            let start = Instant::now();
            let (v, expansions) = eval_at_counted(&t, &x, prec)?;
            let wall_micros = start.elapsed().as_micros() as u64;
            runs.push(BenchRun { wall_micros, expansions });
            value = Some(v);
        }
        Ok((value.expect("repeat is at least 1"), runs))
    })
    .await?;
    Ok(Json(BenchResponse { expr: e.to_string(), value: rational::render(&value), runs }))
}

async fn float_demo(State(state): State<AppState>) -> ApiResult<FloatDemoResponse> {
    let (_, t) = compile(&state, DEMO_EXPR)?;
    let x = rational::parse(DEMO_START)?;
    let exact = blocking(move || Ok(eval_at(&t, &x, DEMO_PREC as usize)?)).await?;
    Ok(Json(FloatDemoResponse {
        iterations: DEMO_ITERATIONS,
        start: DEMO_START.to_string(),
        float: logistic_f64(2.0, 0.7, DEMO_ITERATIONS as usize),
        exact: rational::render(&exact),
        exact_prec: DEMO_PREC,
        exact_decimal: rational::to_decimal(&exact, 16),
    }))
}
