//! Machine-readable description of the HTTP surface, published as
//! `docs/api/schemas.json`.

use archiguesser_core::api::{
    CatalogOverview, CreateSessionRequest, ErrorBody, GuessRequest, GuessResponse,
    LeaderboardEntry, PublicEvent, RevealPayload, RoundSummary, SessionSummary,
};
use schemars::schema_for;
use serde_json::{json, Map, Value};

pub struct Endpoint {
    pub method: &'static str,
    pub path: &'static str,
    pub request: Option<&'static str>,
    pub response: Option<&'static str>,
    pub success: u16,
    pub errors: &'static [u16],
    pub summary: &'static str,
}

pub const ENDPOINTS: &[Endpoint] = &[
    Endpoint {
        method: "GET",
        path: "/api/catalog",
        request: None,
        response: Some("CatalogOverview"),
        success: 200,
        errors: &[],
        summary: "Style tokens with their marker ids and the slider range.",
    },
    Endpoint {
        method: "POST",
        path: "/api/sessions",
        request: Some("CreateSessionRequest"),
        response: Some("SessionSummary"),
        success: 201,
        errors: &[400],
        summary: "Create a session. The seed is chosen by the server when omitted and echoed back.",
    },
    Endpoint {
        method: "GET",
        path: "/api/sessions/{id}",
        request: None,
        response: Some("SessionSummary"),
        success: 200,
        errors: &[404],
        summary: "Session settings and round count.",
    },
    Endpoint {
        method: "POST",
        path: "/api/sessions/{id}/rounds",
        request: None,
        response: Some("RoundSummary"),
        success: 201,
        errors: &[404, 409, 502],
        summary: "Draw the next style and generate its asset.",
    },
    Endpoint {
        method: "GET",
        path: "/api/sessions/{id}/rounds/{n}",
        request: None,
        response: Some("RoundSummary"),
        success: 200,
        errors: &[404],
        summary: "Current phase of a round.",
    },
    Endpoint {
        method: "POST",
        path: "/api/sessions/{id}/rounds/{n}/present",
        request: None,
        response: Some("RoundSummary"),
        success: 200,
        errors: &[404, 409],
        summary: "Mark the asset as shown and start the guessing deadline.",
    },
    Endpoint {
        method: "POST",
        path: "/api/sessions/{id}/rounds/{n}/guess",
        request: Some("GuessRequest"),
        response: Some("GuessResponse"),
        success: 200,
        errors: &[400, 404, 409, 415, 422],
        summary: "Submit a guess as JSON, or as multipart/form-data with fields `frame` (image/png or image/x-portable-graymap) and `player_id`.",
    },
    Endpoint {
        method: "GET",
        path: "/api/sessions/{id}/rounds/{n}/reveal",
        request: None,
        response: Some("RevealPayload"),
        success: 200,
        errors: &[404, 409],
        summary: "Truth, style summary and every player's score once the round is scored.",
    },
    Endpoint {
        method: "GET",
        path: "/api/sessions/{id}/events?cursor={seq}",
        request: None,
        response: Some("PublicEvent"),
        success: 101,
        errors: &[],
        summary: "WebSocket stream of PublicEvent text frames from `cursor` on. Unknown sessions are closed with code 1008.",
    },
    Endpoint {
        method: "GET",
        path: "/api/leaderboard?top={n}",
        request: None,
        response: Some("Leaderboard"),
        success: 200,
        errors: &[],
        summary: "Players by total points, best first.",
    },
    Endpoint {
        method: "GET",
        path: "/api/assets/{key}",
        request: None,
        response: None,
        success: 200,
        errors: &[404],
        summary: "Raw asset bytes with their media type.",
    },
];

/// Named JSON schemas for every request and response body.
pub fn schemas() -> Map<String, Value> {
    let mut map = Map::new();
    let mut put = |name: &str, schema: schemars::schema::RootSchema| {
        map.insert(name.to_string(), serde_json::to_value(schema).expect("schema serializes"));
    };
    put("CatalogOverview", schema_for!(CatalogOverview));
    put("CreateSessionRequest", schema_for!(CreateSessionRequest));
    put("ErrorBody", schema_for!(ErrorBody));
    put("GuessRequest", schema_for!(GuessRequest));
    put("GuessResponse", schema_for!(GuessResponse));
    put("Leaderboard", schema_for!(Vec<LeaderboardEntry>));
    put("PublicEvent", schema_for!(PublicEvent));
    put("RevealPayload", schema_for!(RevealPayload));
    put("RoundSummary", schema_for!(RoundSummary));
    put("SessionSummary", schema_for!(SessionSummary));
    map
}

pub fn document() -> Value {
    let endpoints: Vec<Value> = ENDPOINTS
        .iter()
        .map(|e| {
            json!({
                "method": e.method,
                "path": e.path,
                "request": e.request,
                "response": e.response,
                "success": e.success,
                "errors": e.errors,
                "summary": e.summary,
            })
        })
        .collect();
    json!({
        "title": "ArchiGuesser API",
        "version": env!("CARGO_PKG_VERSION"),
        "error_body": "ErrorBody",
        "endpoints": endpoints,
        "schemas": schemas(),
    })
}

/// The document as written to disk.
pub fn document_text() -> String {
    let mut text = serde_json::to_string_pretty(&document()).expect("document serializes");
    text.push('\n');
    text
}
