//! JSON bodies exchanged over the HTTP/WebSocket interface. Shared by the
//! service and its client so both sides agree on one set of types.

use std::collections::BTreeMap;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::catalog::{GeoCoord, YearInterval};
use crate::clock::Timestamp;
use crate::scoring::{GameMode, Guess, Score};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Player {
    pub player_id: String,
    pub display_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct CreateSessionRequest {
    pub mode: GameMode,
    pub players: Vec<Player>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deadline_secs: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SessionSummary {
    pub session_id: String,
    pub mode: GameMode,
    pub players: Vec<Player>,
    pub seed: u64,
    pub max_rounds: u32,
    pub deadline_secs: u64,
    pub rounds: Vec<RoundSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
pub enum Phase {
    Created,
    AssetReady,
    Presented,
    Scored,
    Revealed,
}

/// What players may see about a round before it is revealed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct RoundSummary {
    pub session_id: String,
    pub round: u32,
    pub mode: GameMode,
    pub phase: Phase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asset_key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media_type: Option<String>,
    /// Poem text behind a speech asset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_asset_key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub presented_at: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deadline: Option<Timestamp>,
    pub guessed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct GuessRequest {
    pub player_id: String,
    pub guess: Guess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct GuessResponse {
    pub session_id: String,
    pub round: u32,
    pub player_id: String,
    /// The guess as scored; for camera frames this is what the board reading decoded to.
    pub guess: Guess,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct StyleReveal {
    pub id: String,
    pub name: String,
    pub region: String,
    pub period: YearInterval,
    pub characteristics: Vec<String>,
    pub architects: Vec<String>,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct LandmarkReveal {
    pub id: String,
    pub name: String,
    pub coord: GeoCoord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct PlayerResult {
    pub display_name: String,
    pub guess: Guess,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct RevealPayload {
    pub session_id: String,
    pub round: u32,
    pub mode: GameMode,
    pub style: StyleReveal,
    pub truth_coord: GeoCoord,
    pub truth_period: YearInterval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landmark: Option<LandmarkReveal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fusion_style: Option<StyleReveal>,
    pub results: BTreeMap<String, PlayerResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct LeaderboardEntry {
    pub player_id: String,
    pub display_name: String,
    pub total_points: f64,
    pub rounds_played: u32,
    pub last_update: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum PublicEventKind {
    RoundStarted,
    AssetReady,
    GuessReceived,
    RoundScored,
    Revealed,
}

/// Event pushed to WebSocket subscribers. `seq` is dense per session and
/// starts at 0, so it doubles as the replay cursor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct PublicEvent {
    pub seq: u64,
    pub session_id: String,
    pub kind: PublicEventKind,
    pub round: u32,
    pub ts: Timestamp,
    pub data: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct ErrorBody {
    pub error: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct StyleToken {
    pub marker_id: u32,
    pub style_id: String,
    pub name: String,
}

/// Catalog view for clients: style names and token bindings, no periods or origins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct CatalogOverview {
    pub tokens: Vec<StyleToken>,
    pub landmark_count: usize,
    pub slider_min_year: i32,
    pub slider_max_year: i32,
}
