//! HTTP and WebSocket service for ArchiGuesser.

pub mod api_doc;
pub mod config;
pub mod error;
pub mod frame;
pub mod routes;
pub mod ws;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use archiguesser_core::api::PublicEvent;
use archiguesser_core::clock::{Clock, SystemClock};
use archiguesser_core::engine::Engine;
use archiguesser_core::genai::{make_backend, AssetGenerator, AssetStore};
use archiguesser_core::{catalog::load_catalog, Catalog};
use archiguesser_vision::board::BoardSpec;
use archiguesser_vision::detect::DetectorParams;
use archiguesser_vision::dictionary::MarkerDictionary;
use parking_lot::Mutex;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tokio::net::TcpListener;
use tokio::sync::broadcast;
use tokio::task::JoinHandle;

pub use config::{ServeArgs, ServerConfig, DEFAULT_PORT};
pub use error::ApiError;
pub use routes::router;

const EVENT_CHANNEL_CAPACITY: usize = 1024;

/// Everything a request handler needs.
#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<Engine>,
    pub dictionary: Arc<MarkerDictionary>,
    pub board: Arc<BoardSpec>,
    pub detector: DetectorParams,
    pub events: broadcast::Sender<PublicEvent>,
    pub ui_dir: std::path::PathBuf,
    seeds: Arc<Mutex<ChaCha8Rng>>,
}

impl AppState {
    /// Wires an engine to the event broadcast used by WebSocket subscribers.
    pub fn new(
        engine: Arc<Engine>,
        dictionary: MarkerDictionary,
        board: BoardSpec,
        seed: Option<u64>,
    ) -> Self {
        let (events, _) = broadcast::channel(EVENT_CHANNEL_CAPACITY);
        let sender = events.clone();
        engine.subscribe(Arc::new(move |event: &PublicEvent| {
            // No receivers is fine: nobody is watching this session.
            let _ = sender.send(event.clone());
        }));
        let seeds = match seed {
            Some(s) => ChaCha8Rng::seed_from_u64(s),
            None => ChaCha8Rng::from_entropy(),
        };
        AppState {
            engine,
            dictionary: Arc::new(dictionary),
            board: Arc::new(board),
            detector: DetectorParams::default(),
            events,
            ui_dir: std::path::PathBuf::from("web/dist"),
            seeds: Arc::new(Mutex::new(seeds)),
        }
    }

    pub fn with_ui_dir(mut self, dir: impl Into<std::path::PathBuf>) -> Self {
        self.ui_dir = dir.into();
        self
    }

    /// Seed for a session created without one.
    pub fn next_seed(&self) -> u64 {
        // Keep seeds within the range JSON numbers carry exactly.
        self.seeds.lock().next_u64() >> 11
    }

    pub fn catalog(&self) -> &Catalog {
        self.engine.catalog()
    }
}

/// Builds the engine and state described by `config`, replaying its event log.
pub fn build_state(config: &ServerConfig) -> anyhow::Result<AppState> {
    build_state_with_clock(config, Arc::new(SystemClock))
}

pub fn build_state_with_clock(config: &ServerConfig, clock: Arc<dyn Clock>) -> anyhow::Result<AppState> {
    let catalog = match &config.catalog {
        Some(path) => load_catalog(path)?,
        None => Catalog::builtin(),
    };
    let dictionary = match &config.dictionary {
        Some(path) => MarkerDictionary::load(path)?,
        None => MarkerDictionary::builtin(),
    };
    let board = match &config.board {
        Some(path) => BoardSpec::load(path)?,
        None => BoardSpec::default(),
    };
    check_bindings(&catalog, &dictionary)?;
    let store = AssetStore::open(config.asset_dir())?;
    let backend = make_backend(config.backend)?;
    let generator = AssetGenerator::new(store, backend, clock.clone());
    let engine = Engine::open(
        Arc::new(catalog),
        Arc::new(generator),
        clock,
        config.engine.clone(),
        config.event_log(),
    )?;
    Ok(AppState::new(Arc::new(engine), dictionary, board, config.seed).with_ui_dir(&config.ui_dir))
}

/// Every token marker bound in the catalog must exist in the dictionary.
pub fn check_bindings(catalog: &Catalog, dictionary: &MarkerDictionary) -> anyhow::Result<()> {
    if let Some(id) = catalog
        .bound_marker_ids()
        .into_iter()
        .find(|&id| dictionary.code(id).is_none())
    {
        anyhow::bail!(
            "catalog binds marker {id} but the dictionary has only {} codes",
            dictionary.len()
        );
    }
    Ok(())
}

/// Periodically closes rounds whose deadline has passed.
pub fn spawn_sweeper(engine: Arc<Engine>, every: Duration) -> JoinHandle<()> {
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(every);
        tick.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
        loop {
            tick.tick().await;
            let engine = engine.clone();
            match tokio::task::spawn_blocking(move || engine.expire_due()).await {
                Ok(Ok(0)) => {}
                Ok(Ok(n)) => tracing::info!(rounds = n, "closed rounds past their deadline"),
                Ok(Err(e)) => tracing::warn!(error = %e, "deadline sweep failed"),
                Err(e) => tracing::warn!(error = %e, "deadline sweep panicked"),
            }
        }
    })
}

/// Binds `addr` and serves `state` in a background task.
pub async fn spawn_server(state: AppState, addr: SocketAddr) -> std::io::Result<(SocketAddr, JoinHandle<()>)> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    let app = router(state);
    let handle = tokio::spawn(async move {
        if let Err(e) = axum::serve(listener, app).await {
            tracing::error!(error = %e, "server stopped");
        }
    });
    Ok((local, handle))
}
