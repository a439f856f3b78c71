use archiguesser_core::api::{
    CatalogOverview, CreateSessionRequest, GuessRequest, GuessResponse, LeaderboardEntry,
    RevealPayload, RoundSummary, SessionSummary, StyleToken,
};
use archiguesser_core::calendar::{SLIDER_MAX_YEAR, SLIDER_MIN_YEAR};
use axum::body::Bytes;
use axum::extract::{FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Redirect, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use tower_http::services::ServeDir;

use crate::error::ApiError;
use crate::frame::{FrameReader, FRAME_MEDIA_TYPES};
use crate::{ws, AppState};

pub fn router(state: AppState) -> Router {
    let ui = ServeDir::new(&state.ui_dir).append_index_html_on_directories(true);
    Router::new()
        .route("/api/health", get(health))
        .route("/api/catalog", get(catalog_overview))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/rounds", post(start_round))
        .route("/api/sessions/{id}/rounds/{n}", get(get_round))
        .route("/api/sessions/{id}/rounds/{n}/present", post(present_round))
        .route("/api/sessions/{id}/rounds/{n}/guess", post(submit_guess))
        .route("/api/sessions/{id}/rounds/{n}/reveal", get(reveal))
        .route("/api/sessions/{id}/events", get(ws::events))
        .route("/api/leaderboard", get(leaderboard))
        .route("/api/assets/{key}", get(asset))
        .route("/ui", get(|| async { Redirect::permanent("/ui/") }))
        .nest_service("/ui/", ui)
        .with_state(state)
}

/// JSON body parsed with serde, malformed input answered with 400.
fn parse_json<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

/// Runs engine work that may block (generation, vision) off the async workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn catalog_overview(State(state): State<AppState>) -> Json<CatalogOverview> {
    let catalog = state.catalog();
    let tokens = catalog
        .tokens()
        .iter()
        .filter_map(|t| {
            catalog.style_by_id(&t.style_id).ok().map(|s| StyleToken {
                marker_id: t.marker_id,
                style_id: s.id.clone(),
                name: s.name.clone(),
            })
        })
        .collect();
    Json(CatalogOverview {
        tokens,
        landmark_count: catalog.landmarks().len(),
        slider_min_year: SLIDER_MIN_YEAR,
        slider_max_year: SLIDER_MAX_YEAR,
    })
}

async fn create_session(
    State(state): State<AppState>,
    body: Bytes,
) -> Result<(StatusCode, Json<SessionSummary>), ApiError> {
    let request: CreateSessionRequest = parse_json(&body)?;
    let seed = state.next_seed();
    let summary = state.engine.create_session_from(&request, seed)?;
    tracing::info!(session = %summary.session_id, mode = ?summary.mode, seed = summary.seed, "session created");
    Ok((StatusCode::CREATED, Json(summary)))
}

async fn get_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionSummary>, ApiError> {
    Ok(Json(state.engine.session(&id)?))
}

async fn start_round(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<(StatusCode, Json<RoundSummary>), ApiError> {
    let engine = state.engine.clone();
    let round = blocking(move || Ok(engine.start_round(&id)?)).await?;
    Ok((StatusCode::CREATED, Json(round)))
}

async fn get_round(
    State(state): State<AppState>,
    Path((id, n)): Path<(String, u32)>,
) -> Result<Json<RoundSummary>, ApiError> {
    Ok(Json(state.engine.round(&id, n)?))
}

async fn present_round(
    State(state): State<AppState>,
    Path((id, n)): Path<(String, u32)>,
) -> Result<Json<RoundSummary>, ApiError> {
    Ok(Json(state.engine.present_round(&id, n)?))
}

fn is_multipart(headers: &HeaderMap) -> bool {
    headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"))
}

async fn submit_guess(
    State(state): State<AppState>,
    Path((id, n)): Path<(String, u32)>,
    request: Request,
) -> Result<Json<GuessResponse>, ApiError> {
    if !is_multipart(request.headers()) {
        let body = Bytes::from_request(request, &state)
            .await
            .map_err(|e| ApiError::bad_request(e.to_string()))?;
        let guess: GuessRequest = parse_json(&body)?;
        let response = state.engine.submit_guess(&id, n, &guess.player_id, guess.guess)?;
        return Ok(Json(response));
    }

    let mut multipart = Multipart::from_request(request, &state)
        .await
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let mut frame: Option<Bytes> = None;
    let mut player_id: Option<String> = None;
    while let Some(field) = multipart
        .next_field()
        .await
        .map_err(|e| ApiError::bad_request(e.to_string()))?
    {
        match field.name() {
            Some("frame") => {
                if let Some(ct) = field.content_type() {
                    let ct = ct.split(';').next().unwrap_or(ct).trim();
                    if !FRAME_MEDIA_TYPES.contains(&ct) && ct != "application/octet-stream" {
                        return Err(ApiError::new(
                            StatusCode::UNSUPPORTED_MEDIA_TYPE,
                            "unsupported_frame",
                            format!("frame must be one of {FRAME_MEDIA_TYPES:?}, got {ct}"),
                        ));
                    }
                }
                frame = Some(field.bytes().await.map_err(|e| ApiError::bad_request(e.to_string()))?);
            }
            Some("player_id") => {
                player_id = Some(field.text().await.map_err(|e| ApiError::bad_request(e.to_string()))?);
            }
            _ => {}
        }
    }
    let frame = frame.ok_or_else(|| ApiError::bad_request("multipart field `frame` is missing"))?;
    let player_id =
        player_id.ok_or_else(|| ApiError::bad_request("multipart field `player_id` is missing"))?;

    // Phase and player checks happen in the engine; the truth is only used
    // to pick which Sights token carries the location.
    let spec = state.engine.round_spec(&id, n)?;
    let worker = state.clone();
    let guess = blocking(move || {
        FrameReader {
            catalog: worker.catalog(),
            dictionary: &worker.dictionary,
            board: &worker.board,
            params: &worker.detector,
        }
        .guess(&frame, &spec)
    })
    .await?;
    tracing::debug!(session = %id, round = n, ?guess, "frame decoded");
    Ok(Json(state.engine.submit_guess(&id, n, &player_id, guess)?))
}

async fn reveal(
    State(state): State<AppState>,
    Path((id, n)): Path<(String, u32)>,
) -> Result<Json<RevealPayload>, ApiError> {
    Ok(Json(state.engine.reveal(&id, n)?))
}

#[derive(Debug, Deserialize)]
struct TopQuery {
    top: Option<usize>,
}

async fn leaderboard(
    State(state): State<AppState>,
    Query(q): Query<TopQuery>,
) -> Json<Vec<LeaderboardEntry>> {
    Json(state.engine.leaderboard(q.top))
}

async fn asset(
    State(state): State<AppState>,
    Path(key): Path<String>,
) -> Result<Response, ApiError> {
    let record = state.engine.fetch_asset(&key)?;
    Ok((
        [
            (header::CONTENT_TYPE, record.media_type),
            (header::CACHE_CONTROL, "public, max-age=31536000, immutable".to_string()),
        ],
        record.bytes,
    )
        .into_response())
}
