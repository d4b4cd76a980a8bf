//! HTTP API for interactive labeling sessions.
//!
//! | route | |
//! |---|---|
//! | `POST /session` | raw image bytes; returns the superpixel boundary overlay and region graph |
//! | `POST /session/{id}/seeds` | seed list, replaces the session's seeds |
//! | `POST /session/{id}/run` | runs the pipeline; returns walks, splines and an overlay |
//! | `POST /session/{id}/accept` | writes the accepted objects in dataset layout |
//! | `GET /session/{id}/export` | accepted splines and masks |
//!
//! Every body is JSON with `"version": 1`; errors are `{"version": 1, "error": ..}`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use cablewalk::graph::{build_graph_with, GraphDocument};
use cablewalk::model::SegmentationResult;
use cablewalk::pipeline::{render_overlay, SplinesDocument, WalksDocument};
use cablewalk::{segment, slic_segment, Error, Image, PipelineConfig, PipelineOutput, Point2};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::Mutex;

use crate::output::write_segmentation;
use crate::seeds::SeedsInput;

const BODY_LIMIT: usize = 64 << 20;
const BOUNDARY_COLOR: [u8; 3] = [255, 255, 0];

struct Session {
    image: Arc<Image>,
    seeds: Vec<Point2>,
    output: Option<Arc<PipelineOutput>>,
    accepted: Option<SegmentationResult>,
}

/// Server-wide state: the pipeline config and the live sessions.
#[derive(Clone)]
pub struct AppState {
    config: Arc<PipelineConfig>,
    out_dir: PathBuf,
    sessions: Arc<Mutex<HashMap<String, Arc<Mutex<Session>>>>>,
}

impl AppState {
    pub fn new(config: PipelineConfig, out_dir: PathBuf) -> Self {
        Self { config: Arc::new(config), out_dir, sessions: Arc::default() }
    }

    async fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .lock()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown session {id}")))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn bad_request(message: impl ToString) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message.to_string())
    }

    fn internal(message: impl ToString) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message.to_string())
    }

    fn pipeline(err: Error) -> Self {
        match err {
            Error::InvalidImage(_)
            | Error::Codec(_)
            | Error::InsufficientSeeds { .. }
            | Error::SeedOutOfBounds { .. }
            | Error::InvalidParameter(_) => Self::bad_request(err),
            _ => Self::internal(err),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "version": 1, "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(ApiError::internal)?
}

fn png_base64(png: cablewalk::Result<Vec<u8>>) -> Result<String, ApiError> {
    png.map(|bytes| BASE64.encode(bytes)).map_err(ApiError::internal)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub version: u32,
    pub session_id: String,
    pub width: u32,
    pub height: u32,
    pub region_count: usize,
    /// PNG, base64.
    pub boundary_overlay_png: String,
    pub graph: GraphDocument,
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> ApiResult<SessionCreated> {
    let config = state.config.clone();
    let (image, created) = blocking(move || {
        let image = Image::decode(&body).map_err(ApiError::bad_request)?;
        let (w, h) = (image.width(), image.height());
        let map = slic_segment(&image, &config.slic_params(w, h)).map_err(ApiError::pipeline)?;
        let graph = build_graph_with(&image, &map, config.histogram_bins, config.graph_order, config.execution)
            .map_err(ApiError::pipeline)?;
        let created = SessionCreated {
            version: 1,
            session_id: uuid::Uuid::new_v4().to_string(),
            width: w,
            height: h,
            region_count: map.region_count(),
            boundary_overlay_png: png_base64(map.boundary_overlay(&image, BOUNDARY_COLOR).encode_png())?,
            graph: graph.to_document(),
        };
        Ok((image, created))
    })
    .await?;
    let session = Session { image: Arc::new(image), seeds: Vec::new(), output: None, accepted: None };
    state.sessions.lock().await.insert(created.session_id.clone(), Arc::new(Mutex::new(session)));
    Ok(Json(created))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SeedsAccepted {
    pub version: u32,
    pub seeds: Vec<Point2>,
}

async fn set_seeds(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Json(input): Json<SeedsInput>,
) -> ApiResult<SeedsAccepted> {
    let session = state.session(&id).await?;
    let mut session = session.lock().await;
    let seeds = input.points().map_err(ApiError::bad_request)?;
    let (w, h) = (session.image.width() as f64, session.image.height() as f64);
    if let Some(p) =
        seeds.iter().find(|p| !(p.is_finite() && p.x > -0.5 && p.y > -0.5 && p.x < w - 0.5 && p.y < h - 0.5))
    {
        return Err(ApiError::bad_request(Error::SeedOutOfBounds { x: p.x, y: p.y }));
    }
    session.seeds = seeds.clone();
    session.output = None;
    session.accepted = None;
    Ok(Json(SeedsAccepted { version: 1, seeds }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunResponse {
    pub version: u32,
    /// False when no walk connected two seeds; `splines` is then empty.
    pub closed: bool,
    pub walks: WalksDocument,
    pub splines: SplinesDocument,
    /// PNG, base64.
    pub overlay_png: String,
}

async fn run_session(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<RunResponse> {
    let session = state.session(&id).await?;
    let mut session = session.lock().await;
    let (image, seeds, config) = (session.image.clone(), session.seeds.clone(), state.config.clone());
    let (output, response) = blocking(move || {
        let output = segment(&image, &seeds, &config).map_err(ApiError::pipeline)?;
        let response = RunResponse {
            version: 1,
            closed: output.any_closed(),
            walks: WalksDocument::new(&output, &config.walker_params(), false),
            splines: SplinesDocument::new(&output.result, config.spline.sample_gap_px),
            overlay_png: png_base64(render_overlay(&image, &output).encode_png())?,
        };
        Ok((output, response))
    })
    .await?;
    session.output = Some(Arc::new(output));
    session.accepted = None;
    Ok(Json(response))
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct AcceptRequest {
    /// Indices into the run's splines; all objects when absent.
    #[serde(default)]
    pub objects: Option<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AcceptResponse {
    pub version: u32,
    pub directory: PathBuf,
    pub objects: usize,
}

async fn accept(State(state): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<AcceptResponse> {
    let request: AcceptRequest = if body.is_empty() {
        AcceptRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(ApiError::bad_request)?
    };
    let session = state.session(&id).await?;
    let mut session = session.lock().await;
    let output =
        session.output.clone().ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "session has not been run"))?;
    let objects = &output.result.objects;
    let picked = match &request.objects {
        None => objects.clone(),
        Some(indices) => {
            let mut picked = Vec::with_capacity(indices.len());
            for &k in indices {
                let o = objects
                    .get(k)
                    .ok_or_else(|| ApiError::bad_request(format!("no object {k}; run produced {}", objects.len())))?;
                picked.push(o.clone());
            }
            picked
        }
    };
    let (image, config) = (session.image.clone(), state.config.clone());
    let dir = state.out_dir.join(&id);
    let (result, dir) = blocking(move || {
        let result = SegmentationResult::new(image.width(), image.height(), picked).map_err(ApiError::internal)?;
        write_segmentation(&dir, &image, &output, &result, &config, false).map_err(ApiError::internal)?;
        Ok((result, dir))
    })
    .await?;
    let count = result.objects.len();
    session.accepted = Some(result);
    Ok(Json(AcceptResponse { version: 1, directory: dir, objects: count }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ExportResponse {
    pub version: u32,
    pub width: u32,
    pub height: u32,
    pub splines: SplinesDocument,
    /// PNG, base64, one per spline.
    pub masks_png: Vec<String>,
    pub union_mask_png: String,
}

async fn export(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<ExportResponse> {
    let session = state.session(&id).await?;
    let session = session.lock().await;
    let result =
        session.accepted.as_ref().ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "nothing accepted yet"))?;
    Ok(Json(ExportResponse {
        version: 1,
        width: result.width,
        height: result.height,
        splines: SplinesDocument::new(result, state.config.spline.sample_gap_px),
        masks_png: result.objects.iter().map(|o| png_base64(o.mask.encode_png())).collect::<Result<_, _>>()?,
        union_mask_png: png_base64(result.union.encode_png())?,
    }))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/session", post(create_session))
        .route("/session/{id}/seeds", post(set_seeds))
        .route("/session/{id}/run", post(run_session))
        .route("/session/{id}/accept", post(accept))
        .route("/session/{id}/export", get(export))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
