//! Generative text, image and speech backends behind one request type, plus a
//! content-addressed asset cache.
//!
//! Every request has a canonical string
//! `kind "\n" prompt "\n" base_asset "\n" k1=v1;k2=v2...` (params sorted by key)
//! and its SHA-256 hex digest is the storage key of the produced asset. A cache
//! hit never reaches the backend.

mod mock;
mod store;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clock::{Clock, Timestamp};

pub use mock::MockBackend;
pub use store::{is_asset_key, AssetMeta, AssetStore};

/// Environment variable selecting the generation backend (`mock` or `live`).
pub const BACKEND_ENV: &str = "ARCHIGUESSER_GEN_BACKEND";

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("invalid generation request: {0}")]
    InvalidRequest(String),
    #[error("backend error: {0}")]
    Backend(String),
    #[error("asset cache error: {0}")]
    Cache(String),
    #[error("asset `{0}` not found")]
    NotFound(String),
}

impl From<std::io::Error> for GenError {
    fn from(e: std::io::Error) -> Self {
        GenError::Cache(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    Text,
    Image,
    ImageRestyle,
    Speech,
}

impl GenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GenKind::Text => "text",
            GenKind::Image => "image",
            GenKind::ImageRestyle => "image_restyle",
            GenKind::Speech => "speech",
        }
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenRequest {
    pub kind: GenKind,
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_asset: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

impl GenRequest {
    pub fn new(kind: GenKind, prompt: impl Into<String>) -> Self {
        GenRequest {
            kind,
            prompt: prompt.into(),
            base_asset: None,
            params: BTreeMap::new(),
        }
    }

    pub fn with_base_asset(mut self, base: impl Into<String>) -> Self {
        self.base_asset = Some(base.into());
        self
    }

    pub fn with_param(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.prompt.is_empty() {
            return Err(GenError::InvalidRequest("prompt is empty".into()));
        }
        match (self.kind, &self.base_asset) {
            (GenKind::ImageRestyle, None) => Err(GenError::InvalidRequest(
                "image_restyle requires a base asset".into(),
            )),
            (GenKind::ImageRestyle, Some(_)) => Ok(()),
            (kind, Some(_)) => Err(GenError::InvalidRequest(format!(
                "{kind} requests must not carry a base asset"
            ))),
            (_, None) => Ok(()),
        }
    }

    /// Canonical string hashed into the content address.
    pub fn canonical_string(&self) -> String {
        let params = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "{}\n{}\n{}\n{}",
            self.kind,
            self.prompt,
            self.base_asset.as_deref().unwrap_or(""),
            params
        )
    }

    pub fn key(&self) -> String {
        sha256_hex(self.canonical_string().as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Raw output of a backend before it is stamped and stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Payload {
    pub media_type: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssetRecord {
    pub key: String,
    pub kind: GenKind,
    pub media_type: String,
    pub bytes: Vec<u8>,
    pub created_at: Timestamp,
}

impl AssetRecord {
    pub fn text(&self) -> Option<&str> {
        std::str::from_utf8(&self.bytes).ok()
    }
}

pub trait GenBackend: Send + Sync {
    fn produce(&self, request: &GenRequest) -> Result<Payload, GenError>;
}

/// Prompt-in, text-out interface used by the curation pipeline.
pub trait TextClient: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, ClientError>;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ClientError(pub String);

/// Adapts any [`GenBackend`] to [`TextClient`] by issuing `text` requests.
pub struct BackendTextClient {
    backend: Arc<dyn GenBackend>,
}

impl BackendTextClient {
    pub fn new(backend: Arc<dyn GenBackend>) -> Self {
        BackendTextClient { backend }
    }
}

impl TextClient for BackendTextClient {
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        let payload = self
            .backend
            .produce(&GenRequest::new(GenKind::Text, prompt))
            .map_err(|e| ClientError(e.to_string()))?;
        String::from_utf8(payload.bytes).map_err(|e| ClientError(e.to_string()))
    }
}

/// Which backend family to construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    #[default]
    Mock,
    Live,
}

impl std::str::FromStr for BackendChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mock" => Ok(BackendChoice::Mock),
            "live" => Ok(BackendChoice::Live),
            other => Err(format!("unknown backend `{other}` (expected mock or live)")),
        }
    }
}

impl BackendChoice {
    pub fn from_env() -> Result<Self, String> {
        match std::env::var(BACKEND_ENV) {
            Ok(v) => v.parse(),
            Err(_) => Ok(BackendChoice::Mock),
        }
    }
}

/// Builds the backend for `choice`. Live services are supplied by embedding
/// applications through [`GenBackend`]; none ships with this crate.
pub fn make_backend(choice: BackendChoice) -> Result<Arc<dyn GenBackend>, GenError> {
    match choice {
        BackendChoice::Mock => Ok(Arc::new(MockBackend::new())),
        BackendChoice::Live => Err(GenError::Backend(
            "no live backend is registered; provide a GenBackend implementation".into(),
        )),
    }
}

/// Cache-through generator: the single entry point used by the game engine.
pub struct AssetGenerator {
    store: AssetStore,
    backend: Arc<dyn GenBackend>,
    clock: Arc<dyn Clock>,
    retries: u32,
}

impl AssetGenerator {
    pub fn new(store: AssetStore, backend: Arc<dyn GenBackend>, clock: Arc<dyn Clock>) -> Self {
        AssetGenerator {
            store,
            backend,
            clock,
            retries: 2,
        }
    }

    pub fn with_retries(mut self, retries: u32) -> Self {
        self.retries = retries;
        self
    }

    pub fn store(&self) -> &AssetStore {
        &self.store
    }

    pub fn generate(&self, request: &GenRequest) -> Result<AssetRecord, GenError> {
        request.validate()?;
        let key = request.key();
        match self.store.get(&key) {
            Ok(record) => return Ok(record),
            Err(GenError::NotFound(_)) => {}
            Err(e) => return Err(e),
        }

        let mut attempt = 0;
        let payload = loop {
            match self.backend.produce(request) {
                Ok(p) => break p,
                Err(e) if attempt < self.retries => {
                    tracing::warn!(%key, attempt, error = %e, "backend call failed, retrying");
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        };
        if payload.bytes.is_empty() {
            return Err(GenError::Backend("backend returned an empty payload".into()));
        }
        let record = AssetRecord {
            key,
            kind: request.kind,
            media_type: payload.media_type,
            bytes: payload.bytes,
            created_at: self.clock.now(),
        };
        self.store.put(&record)?;
        Ok(record)
    }

    pub fn fetch_asset(&self, key: &str) -> Result<AssetRecord, GenError> {
        self.store.get(key)
    }

    pub fn purge_cache(&self, older_than: Timestamp) -> Result<usize, GenError> {
        self.store.purge(older_than)
    }
}
