//! Async client for the ArchiGuesser HTTP and WebSocket API.

use archiguesser_core::api::{
    CatalogOverview, CreateSessionRequest, ErrorBody, GuessRequest, GuessResponse,
    LeaderboardEntry, PublicEvent, RevealPayload, RoundSummary, SessionSummary,
};
use futures::StreamExt;
use reqwest::multipart::{Form, Part};
use reqwest::{Method, RequestBuilder, Response, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::protocol::frame::coding::CloseCode;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

pub const DEFAULT_BASE_URL: &str = "http://127.0.0.1:8420";

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    /// The server answered with a non-success status.
    #[error("{status}: {error}: {detail}")]
    Api {
        status: StatusCode,
        error: String,
        detail: String,
    },
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("websocket: {0}")]
    WebSocket(String),
    #[error("event stream closed by server ({code}): {reason}")]
    Closed { code: u16, reason: String },
    #[error("unexpected response body: {0}")]
    Decode(String),
}

impl ClientError {
    pub fn status(&self) -> Option<StatusCode> {
        match self {
            ClientError::Api { status, .. } => Some(*status),
            _ => None,
        }
    }
}

/// A downloaded asset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Asset {
    pub media_type: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    pub fn new(base_url: impl Into<String>) -> Self {
        Client {
            base: base_url.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn request(&self, method: Method, path: &str) -> RequestBuilder {
        self.http.request(method, format!("{}{}", self.base, path))
    }

    async fn check(response: Response) -> Result<Response, ClientError> {
        let status = response.status();
        if status.is_success() {
            return Ok(response);
        }
        let text = response.text().await.unwrap_or_default();
        let (error, detail) = match serde_json::from_str::<ErrorBody>(&text) {
            Ok(body) => (body.error, body.detail),
            Err(_) => ("http".to_string(), text),
        };
        Err(ClientError::Api {
            status,
            error,
            detail,
        })
    }

    async fn json<T: DeserializeOwned>(builder: RequestBuilder) -> Result<T, ClientError> {
        let response = Self::check(builder.send().await?).await?;
        let bytes = response.bytes().await?;
        serde_json::from_slice(&bytes).map_err(|e| ClientError::Decode(e.to_string()))
    }

    async fn post_json<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T, ClientError> {
        Self::json(self.request(Method::POST, path).json(body)).await
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, ClientError> {
        Self::json(self.request(Method::GET, path)).await
    }

    pub async fn catalog(&self) -> Result<CatalogOverview, ClientError> {
        self.get("/api/catalog").await
    }

    pub async fn create_session(&self, request: &CreateSessionRequest) -> Result<SessionSummary, ClientError> {
        self.post_json("/api/sessions", request).await
    }

    pub async fn session(&self, id: &str) -> Result<SessionSummary, ClientError> {
        self.get(&format!("/api/sessions/{id}")).await
    }

    pub async fn start_round(&self, id: &str) -> Result<RoundSummary, ClientError> {
        Self::json(self.request(Method::POST, &format!("/api/sessions/{id}/rounds"))).await
    }

    pub async fn round(&self, id: &str, n: u32) -> Result<RoundSummary, ClientError> {
        self.get(&format!("/api/sessions/{id}/rounds/{n}")).await
    }

    pub async fn present(&self, id: &str, n: u32) -> Result<RoundSummary, ClientError> {
        Self::json(self.request(Method::POST, &format!("/api/sessions/{id}/rounds/{n}/present"))).await
    }

    pub async fn guess(&self, id: &str, n: u32, guess: &GuessRequest) -> Result<GuessResponse, ClientError> {
        self.post_json(&format!("/api/sessions/{id}/rounds/{n}/guess"), guess).await
    }

    /// Submits a camera frame of the board. `media_type` is `image/png` or
    /// `image/x-portable-graymap`.
    pub async fn guess_frame(
        &self,
        id: &str,
        n: u32,
        player_id: &str,
        frame: Vec<u8>,
        media_type: &str,
    ) -> Result<GuessResponse, ClientError> {
        let part = Part::bytes(frame).file_name("frame").mime_str(media_type)?;
        let form = Form::new().text("player_id", player_id.to_string()).part("frame", part);
        Self::json(
            self.request(Method::POST, &format!("/api/sessions/{id}/rounds/{n}/guess"))
                .multipart(form),
        )
        .await
    }

    pub async fn reveal(&self, id: &str, n: u32) -> Result<RevealPayload, ClientError> {
        self.get(&format!("/api/sessions/{id}/rounds/{n}/reveal")).await
    }

    pub async fn leaderboard(&self, top: Option<usize>) -> Result<Vec<LeaderboardEntry>, ClientError> {
        match top {
            Some(n) => self.get(&format!("/api/leaderboard?top={n}")).await,
            None => self.get("/api/leaderboard").await,
        }
    }

    pub async fn asset(&self, key: &str) -> Result<Asset, ClientError> {
        let response = Self::check(self.request(Method::GET, &format!("/api/assets/{key}")).send().await?).await?;
        let media_type = response
            .headers()
            .get(reqwest::header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .unwrap_or("application/octet-stream")
            .to_string();
        let bytes = response.bytes().await?.to_vec();
        Ok(Asset { media_type, bytes })
    }

    /// Opens the event stream of a session, replaying from `cursor`.
    pub async fn events(&self, id: &str, cursor: u64) -> Result<EventStream, ClientError> {
        let ws_base = if let Some(rest) = self.base.strip_prefix("https://") {
            format!("wss://{rest}")
        } else if let Some(rest) = self.base.strip_prefix("http://") {
            format!("ws://{rest}")
        } else {
            self.base.clone()
        };
        let url = format!("{ws_base}/api/sessions/{id}/events?cursor={cursor}");
        let (socket, _) = tokio_tungstenite::connect_async(url)
            .await
            .map_err(|e| ClientError::WebSocket(e.to_string()))?;
        Ok(EventStream { socket })
    }
}

/// Public events of one session, in sequence order.
pub struct EventStream {
    socket: WebSocketStream<MaybeTlsStream<TcpStream>>,
}

impl EventStream {
    /// The next event; `None` when the server ends the stream normally.
    pub async fn next_event(&mut self) -> Option<Result<PublicEvent, ClientError>> {
        loop {
            let message = match self.socket.next().await? {
                Ok(m) => m,
                Err(e) => return Some(Err(ClientError::WebSocket(e.to_string()))),
            };
            match message {
                Message::Text(text) => {
                    return Some(
                        serde_json::from_str(text.as_str()).map_err(|e| ClientError::Decode(e.to_string())),
                    )
                }
                Message::Close(Some(frame)) if frame.code != CloseCode::Normal => {
                    return Some(Err(ClientError::Closed {
                        code: frame.code.into(),
                        reason: frame.reason.to_string(),
                    }))
                }
                Message::Close(_) => return None,
                _ => {}
            }
        }
    }

    pub async fn close(mut self) {
        let _ = self.socket.close(None).await;
    }
}
