//! Session and round lifecycle, style draws, asset orchestration, reveals and
//! the leaderboard.
//!
//! Every state change is first appended to the [`EventLog`] and then applied
//! to in-memory state, so replaying the log at startup rebuilds sessions and
//! the leaderboard exactly. Mutations of one session are serialized by that
//! session's lock; sessions proceed independently.

mod leaderboard;
pub mod log;
mod session;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::api::{
    CreateSessionRequest, GuessResponse, LandmarkReveal, LeaderboardEntry, Phase, Player,
    PlayerResult, PublicEvent, RevealPayload, RoundSummary, SessionSummary, StyleReveal,
};
use crate::catalog::{Catalog, StyleRecord};
use crate::clock::Clock;
use crate::genai::{AssetGenerator, AssetRecord, GenError, GenKind, GenRequest};
use crate::prompt::{
    build_image_prompt, build_sights_request, descriptor_request, poem_request, validate_poem,
    ImagePromptVariant, DEFAULT_POEM_ATTEMPTS,
};
use crate::scoring::{score_guess, GameMode, Guess, RoundSpec, ScoringError};

pub use leaderboard::Leaderboard;
pub use log::{read_log, Event, EventLog, LogEntry, ScoredReason};
pub use session::{GameSession, RoundState};

pub const DEFAULT_MAX_ROUNDS: u32 = 10;
pub const DEFAULT_DEADLINE_SECS: u64 = 120;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("round {round} is {actual:?}, expected {expected}")]
    Phase {
        round: u32,
        expected: String,
        actual: Phase,
    },
    #[error("player `{player_id}` already guessed in round {round}")]
    DuplicateGuess { player_id: String, round: u32 },
    #[error("player `{0}` is not part of this session")]
    UnknownPlayer(String),
    #[error("{0}")]
    Conflict(String),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("asset generation failed: {0}")]
    Generation(String),
    #[error("event log: {0}")]
    Log(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How Image-mode prompts are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImagePromptMode {
    /// `Building of <name> architectural style by <architect>`.
    #[default]
    Template,
    /// A text-model descriptor of the style, without its name.
    Descriptor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub max_rounds: u32,
    pub deadline_secs: u64,
    pub poem_attempts: u32,
    pub image_prompt: ImagePromptMode,
    pub voice: String,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_rounds: DEFAULT_MAX_ROUNDS,
            deadline_secs: DEFAULT_DEADLINE_SECS,
            poem_attempts: DEFAULT_POEM_ATTEMPTS,
            image_prompt: ImagePromptMode::Template,
            voice: "narrator".into(),
        }
    }
}

pub type Listener = Arc<dyn Fn(&PublicEvent) + Send + Sync>;

/// Outcome of a style draw, before any asset exists.
struct Draw {
    draw: u64,
    pool_reset: bool,
    spec: RoundSpec,
    drawn_style: String,
}

struct Asset {
    key: String,
    media_type: String,
    text_key: Option<String>,
    attempts: u32,
}

pub struct Engine {
    catalog: Arc<Catalog>,
    generator: Arc<AssetGenerator>,
    clock: Arc<dyn Clock>,
    config: EngineConfig,
    log: Mutex<EventLog>,
    sessions: RwLock<HashMap<String, Arc<Mutex<GameSession>>>>,
    leaderboard: RwLock<Leaderboard>,
    next_session: AtomicU64,
    listeners: RwLock<Vec<Listener>>,
}

impl Engine {
    /// Engine with an in-memory log.
    pub fn new(
        catalog: Arc<Catalog>,
        generator: Arc<AssetGenerator>,
        clock: Arc<dyn Clock>,
        config: EngineConfig,
    ) -> Self {
        Engine {
            catalog,
            generator,
            clock,
            config,
            log: Mutex::new(EventLog::in_memory()),
            sessions: RwLock::new(HashMap::new()),
            leaderboard: RwLock::new(Leaderboard::new()),
            next_session: AtomicU64::new(1),
            listeners: RwLock::new(Vec::new()),
        }
    }

    /// Engine persisted to the log file at `path`, replaying what is already there.
    pub fn open(
        catalog: Arc<Catalog>,
        generator: Arc<AssetGenerator>,
        clock: Arc<dyn Clock>,
        config: EngineConfig,
        path: impl AsRef<Path>,
    ) -> Result<Self, EngineError> {
        let (log, entries) = EventLog::open(path)?;
        let engine = Engine {
            log: Mutex::new(log),
            ..Engine::new(catalog, generator, clock, config)
        };
        for entry in &entries {
            engine.replay(entry)?;
        }
        tracing::info!(events = entries.len(), sessions = engine.sessions.read().len(), "event log replayed");
        Ok(engine)
    }

    fn replay(&self, entry: &LogEntry) -> Result<(), EngineError> {
        if let Event::SessionCreated(created) = &entry.event {
            let mut sessions = self.sessions.write();
            if sessions.contains_key(&entry.session_id) {
                return Err(EngineError::Log(format!("session {} created twice", entry.session_id)));
            }
            sessions.insert(
                entry.session_id.clone(),
                Arc::new(Mutex::new(GameSession::from_created(&entry.session_id, created))),
            );
            if let Some(n) = entry.session_id.strip_prefix('s').and_then(|n| n.parse::<u64>().ok()) {
                self.next_session.fetch_max(n + 1, Ordering::SeqCst);
            }
            return Ok(());
        }
        let handle = self
            .sessions
            .read()
            .get(&entry.session_id)
            .cloned()
            .ok_or_else(|| EngineError::Log(format!("event for unknown session {}", entry.session_id)))?;
        let mut session = handle.lock();
        session.apply(entry)?;
        self.apply_leaderboard(&session, entry);
        Ok(())
    }

    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn generator(&self) -> &Arc<AssetGenerator> {
        &self.generator
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Registers a callback for public events. Callbacks run while the
    /// session lock is held, so they see each session's events in order and
    /// must not call back into the engine.
    pub fn subscribe(&self, listener: Listener) {
        self.listeners.write().push(listener);
    }

    /// Lines written so far when the engine uses an in-memory log.
    pub fn memory_log(&self) -> Option<Vec<String>> {
        self.log.lock().memory_lines().map(|l| l.to_vec())
    }

    fn session_handle(&self, id: &str) -> Result<Arc<Mutex<GameSession>>, EngineError> {
        self.sessions
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| EngineError::NotFound(format!("session `{id}`")))
    }

    fn apply_leaderboard(&self, session: &GameSession, entry: &LogEntry) {
        if let Event::Revealed(revealed) = &entry.event {
            let mut board = self.leaderboard.write();
            for player in &session.players {
                let points = revealed.totals.get(&player.player_id).copied().unwrap_or(0.0);
                board.record(&player.player_id, &player.display_name, points, entry.ts);
            }
        }
    }

    /// Appends `events` in order, applying each to `session` after it is durable.
    fn commit(&self, session: &mut GameSession, events: Vec<Event>) -> Result<(), EngineError> {
        let mut published = Vec::new();
        for event in events {
            let entry = LogEntry {
                ts: self.clock.now(),
                session_id: session.id.clone(),
                event,
            };
            self.log.lock().append(&entry)?;
            published.extend(session.apply(&entry)?);
            self.apply_leaderboard(session, &entry);
        }
        if !published.is_empty() {
            let listeners = self.listeners.read().clone();
            for event in &published {
                for listener in &listeners {
                    listener(event);
                }
            }
        }
        Ok(())
    }

    pub fn create_session(
        &self,
        mode: GameMode,
        players: Vec<Player>,
        seed: u64,
        max_rounds: Option<u32>,
        deadline_secs: Option<u64>,
    ) -> Result<SessionSummary, EngineError> {
        if players.is_empty() {
            return Err(EngineError::Validation("at least one player required".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &players {
            if p.player_id.trim().is_empty() || p.player_id.len() > 64 {
                return Err(EngineError::Validation(format!(
                    "player id {:?} must be 1 to 64 characters",
                    p.player_id
                )));
            }
            if p.display_name.trim().is_empty() {
                return Err(EngineError::Validation(format!(
                    "player `{}` has an empty display name",
                    p.player_id
                )));
            }
            if !seen.insert(p.player_id.as_str()) {
                return Err(EngineError::Validation(format!("duplicate player id `{}`", p.player_id)));
            }
        }
        let max_rounds = max_rounds.unwrap_or(self.config.max_rounds);
        let deadline_secs = deadline_secs.unwrap_or(self.config.deadline_secs);
        if max_rounds == 0 {
            return Err(EngineError::Validation("max_rounds must be at least 1".into()));
        }
        if deadline_secs == 0 {
            return Err(EngineError::Validation("deadline_secs must be at least 1".into()));
        }
        if mode == GameMode::Sights && self.catalog.landmarks().is_empty() {
            return Err(EngineError::Validation("the catalog has no landmarks for Sights mode".into()));
        }

        let id = format!("s{:06}", self.next_session.fetch_add(1, Ordering::SeqCst));
        let created = log::SessionCreated {
            mode,
            players,
            seed,
            max_rounds,
            deadline_secs,
        };
        let entry = LogEntry {
            ts: self.clock.now(),
            session_id: id.clone(),
            event: Event::SessionCreated(created.clone()),
        };
        let session = GameSession::from_created(&id, &created);
        let summary = session.summary();
        // Insert under the write lock so no reader sees the id before it is logged.
        let mut sessions = self.sessions.write();
        self.log.lock().append(&entry)?;
        sessions.insert(id, Arc::new(Mutex::new(session)));
        Ok(summary)
    }

    pub fn create_session_from(
        &self,
        request: &CreateSessionRequest,
        seed: u64,
    ) -> Result<SessionSummary, EngineError> {
        self.create_session(
            request.mode,
            request.players.clone(),
            request.seed.unwrap_or(seed),
            request.max_rounds,
            request.deadline_secs,
        )
    }

    pub fn session(&self, id: &str) -> Result<SessionSummary, EngineError> {
        let handle = self.session_handle(id)?;
        let mut session = handle.lock();
        self.expire(&mut session)?;
        Ok(session.summary())
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().keys().cloned().collect();
        ids.sort();
        ids
    }

    pub fn round(&self, id: &str, number: u32) -> Result<RoundSummary, EngineError> {
        let handle = self.session_handle(id)?;
        let mut session = handle.lock();
        self.expire(&mut session)?;
        let round = session.round(number)?;
        Ok(session.round_summary(round))
    }

    /// Ground truth of a round. Not part of the player-facing API.
    pub fn round_spec(&self, id: &str, number: u32) -> Result<RoundSpec, EngineError> {
        let handle = self.session_handle(id)?;
        let session = handle.lock();
        Ok(session.round(number)?.spec.clone())
    }

    /// Public events of a session starting at sequence number `cursor`.
    pub fn events_since(&self, id: &str, cursor: u64) -> Result<Vec<PublicEvent>, EngineError> {
        let handle = self.session_handle(id)?;
        let session = handle.lock();
        Ok(session.events.iter().skip(cursor as usize).cloned().collect())
    }

    fn draw(&self, session: &GameSession) -> Result<Draw, EngineError> {
        let styles = self.catalog.styles();
        if styles.is_empty() {
            return Err(EngineError::Validation("catalog has no styles".into()));
        }
        let draw = session.draws;
        let mut rng = ChaCha8Rng::seed_from_u64(session.seed);
        rng.set_stream(draw);

        let landmark = match session.mode {
            GameMode::Sights => {
                let landmarks = self.catalog.landmarks();
                Some(&landmarks[rng.gen_range(0..landmarks.len())])
            }
            _ => None,
        };
        let excluded = landmark.map(|l| l.native_style_id.as_str());
        let eligible = |s: &&StyleRecord| Some(s.id.as_str()) != excluded;

        let mut pool: Vec<&StyleRecord> = styles
            .iter()
            .filter(eligible)
            .filter(|s| !session.used_style_ids.contains(&s.id))
            .collect();
        let mut pool_reset = false;
        if pool.is_empty() {
            pool_reset = true;
            pool = styles.iter().filter(eligible).collect();
        }
        if pool.is_empty() {
            return Err(EngineError::Validation("no style available to draw".into()));
        }
        let style = pool[rng.gen_range(0..pool.len())];

        let spec = match landmark {
            Some(landmark) => {
                let native = self
                    .catalog
                    .style_by_id(&landmark.native_style_id)
                    .map_err(|e| EngineError::Validation(e.to_string()))?;
                RoundSpec {
                    mode: GameMode::Sights,
                    truth_style_id: native.id.clone(),
                    truth_coord: landmark.coord,
                    truth_period: native.period,
                    landmark_id: Some(landmark.id.clone()),
                    fusion_style_id: Some(style.id.clone()),
                }
            }
            None => RoundSpec {
                mode: session.mode,
                truth_style_id: style.id.clone(),
                truth_coord: style.origin,
                truth_period: style.period,
                landmark_id: None,
                fusion_style_id: None,
            },
        };
        Ok(Draw {
            draw,
            pool_reset,
            spec,
            drawn_style: style.id.clone(),
        })
    }

    fn generate(&self, request: &GenRequest) -> Result<AssetRecord, EngineError> {
        self.generator
            .generate(request)
            .map_err(|e: GenError| EngineError::Generation(e.to_string()))
    }

    fn produce_asset(&self, spec: &RoundSpec) -> Result<Asset, EngineError> {
        let style = self
            .catalog
            .style_by_id(&spec.truth_style_id)
            .map_err(|e| EngineError::Validation(e.to_string()))?;
        match spec.mode {
            GameMode::Image => {
                let prompt = match self.config.image_prompt {
                    ImagePromptMode::Template => build_image_prompt(style, ImagePromptVariant::Template),
                    ImagePromptMode::Descriptor => {
                        let descriptor = self.generate(&descriptor_request(style))?;
                        let text = descriptor
                            .text()
                            .ok_or_else(|| EngineError::Generation("descriptor is not UTF-8".into()))?
                            .trim()
                            .to_string();
                        build_image_prompt(style, ImagePromptVariant::Descriptor(&text))
                    }
                };
                let record = self.generate(&GenRequest::new(GenKind::Image, prompt))?;
                Ok(Asset {
                    key: record.key,
                    media_type: record.media_type,
                    text_key: None,
                    attempts: 1,
                })
            }
            GameMode::Sights => {
                let landmark_id = spec.landmark_id.as_deref().unwrap_or_default();
                let fusion_id = spec.fusion_style_id.as_deref().unwrap_or_default();
                let landmark = self
                    .catalog
                    .landmark_by_id(landmark_id)
                    .map_err(|e| EngineError::Validation(e.to_string()))?;
                let fusion = self
                    .catalog
                    .style_by_id(fusion_id)
                    .map_err(|e| EngineError::Validation(e.to_string()))?;
                let request = build_sights_request(landmark, fusion)
                    .map_err(|e| EngineError::Validation(e.to_string()))?;
                let record = self.generate(&request)?;
                Ok(Asset {
                    key: record.key,
                    media_type: record.media_type,
                    text_key: None,
                    attempts: 1,
                })
            }
            GameMode::Poem => {
                let attempts = self.config.poem_attempts.max(1);
                for attempt in 1..=attempts {
                    let poem = self.generate(&poem_request(style, None, attempt))?;
                    let text = poem
                        .text()
                        .ok_or_else(|| EngineError::Generation("poem is not UTF-8".into()))?;
                    if !validate_poem(text, style) {
                        tracing::info!(style = %style.id, attempt, "poem names the style, regenerating");
                        continue;
                    }
                    let speech = self.generate(
                        &GenRequest::new(GenKind::Speech, text).with_param("voice", &self.config.voice),
                    )?;
                    return Ok(Asset {
                        key: speech.key,
                        media_type: speech.media_type,
                        text_key: Some(poem.key),
                        attempts: attempt,
                    });
                }
                Err(EngineError::Generation(format!(
                    "every poem of {attempts} attempts named the style"
                )))
            }
        }
    }

    /// Draws a style, generates the round's asset and leaves the round in AssetReady.
    pub fn start_round(&self, id: &str) -> Result<RoundSummary, EngineError> {
        let handle = self.session_handle(id)?;
        let mut session = handle.lock();
        self.expire(&mut session)?;
        if let Some(prev) = session.current() {
            if prev.phase != Phase::Revealed {
                return Err(EngineError::Conflict(format!(
                    "round {} is {:?}; reveal it before starting another",
                    prev.number, prev.phase
                )));
            }
        }
        if session.rounds.len() as u32 >= session.max_rounds {
            return Err(EngineError::Conflict(format!(
                "session already played its {} rounds",
                session.max_rounds
            )));
        }
        let number = session.rounds.len() as u32 + 1;
        let draw = self.draw(&session)?;
        match self.produce_asset(&draw.spec) {
            Ok(asset) => {
                self.commit(
                    &mut session,
                    vec![
                        Event::RoundStarted(log::RoundStarted {
                            round: number,
                            draw: draw.draw,
                            pool_reset: draw.pool_reset,
                            spec: draw.spec,
                        }),
                        Event::AssetReady(log::AssetReady {
                            round: number,
                            asset_key: asset.key,
                            media_type: asset.media_type,
                            text_asset_key: asset.text_key,
                            attempts: asset.attempts,
                        }),
                    ],
                )?;
                let round = session.round(number)?;
                Ok(session.round_summary(round))
            }
            Err(e) => {
                tracing::warn!(session = id, round = number, error = %e, "round aborted");
                self.commit(
                    &mut session,
                    vec![Event::RoundAborted(log::RoundAborted {
                        round: number,
                        draw: draw.draw,
                        pool_reset: draw.pool_reset,
                        style_id: draw.drawn_style,
                        reason: e.to_string(),
                    })],
                )?;
                Err(e)
            }
        }
    }

    /// Marks the asset as shown to players and starts the guess deadline.
    pub fn present_round(&self, id: &str, number: u32) -> Result<RoundSummary, EngineError> {
        let handle = self.session_handle(id)?;
        let mut session = handle.lock();
        let round = session.round(number)?;
        if round.phase != Phase::AssetReady {
            return Err(EngineError::Phase {
                round: number,
                expected: "AssetReady".into(),
                actual: round.phase,
            });
        }
        let presented_at = self.clock.now();
        let deadline = presented_at + chrono::Duration::seconds(session.deadline_secs as i64);
        self.commit(
            &mut session,
            vec![Event::RoundPresented(log::RoundPresented {
                round: number,
                presented_at,
                deadline,
            })],
        )?;
        Ok(session.round_summary(session.round(number)?))
    }

    /// Moves the current round to Scored if its deadline has passed.
    fn expire(&self, session: &mut GameSession) -> Result<bool, EngineError> {
        let due = match session.current() {
            Some(r) if r.phase == Phase::Presented => match r.deadline {
                Some(deadline) if self.clock.now() >= deadline => Some(r.number),
                _ => None,
            },
            _ => None,
        };
        match due {
            Some(round) => {
                self.commit(
                    session,
                    vec![Event::RoundScored(log::RoundScored {
                        round,
                        reason: ScoredReason::Deadline,
                    })],
                )?;
                Ok(true)
            }
            None => Ok(false),
        }
    }

    /// Closes every round whose deadline has passed; returns how many were closed.
    pub fn expire_due(&self) -> Result<usize, EngineError> {
        let handles: Vec<_> = self.sessions.read().values().cloned().collect();
        let mut closed = 0;
        for handle in handles {
            if self.expire(&mut handle.lock())? {
                closed += 1;
            }
        }
        Ok(closed)
    }

    pub fn submit_guess(
        &self,
        id: &str,
        number: u32,
        player_id: &str,
        mut guess: Guess,
    ) -> Result<GuessResponse, EngineError> {
        let handle = self.session_handle(id)?;
        let mut session = handle.lock();
        session.round(number)?;
        if session.player(player_id).is_none() {
            return Err(EngineError::UnknownPlayer(player_id.to_string()));
        }
        self.expire(&mut session)?;
        let round = session.round(number)?;
        if round.guesses.contains_key(player_id) {
            return Err(EngineError::DuplicateGuess {
                player_id: player_id.to_string(),
                round: number,
            });
        }
        if round.phase != Phase::Presented {
            return Err(EngineError::Phase {
                round: number,
                expected: "Presented".into(),
                actual: round.phase,
            });
        }
        guess.submitted_at = Some(self.clock.now());
        let score = score_guess(&guess, &round.spec, &self.catalog)?;
        let all_guessed = round.guesses.len() + 1 == session.players.len();

        let mut events = vec![Event::GuessReceived(log::GuessReceived {
            round: number,
            player_id: player_id.to_string(),
            guess: guess.clone(),
            score,
        })];
        if all_guessed {
            events.push(Event::RoundScored(log::RoundScored {
                round: number,
                reason: ScoredReason::AllGuessed,
            }));
        }
        self.commit(&mut session, events)?;
        Ok(GuessResponse {
            session_id: id.to_string(),
            round: number,
            player_id: player_id.to_string(),
            guess,
            score,
        })
    }

    /// Reveals a scored round. Revealing an already revealed round returns
    /// the same payload and leaves the leaderboard untouched.
    pub fn reveal(&self, id: &str, number: u32) -> Result<RevealPayload, EngineError> {
        let handle = self.session_handle(id)?;
        let mut session = handle.lock();
        session.round(number)?;
        self.expire(&mut session)?;
        let round = session.round(number)?;
        match round.phase {
            Phase::Revealed => {}
            Phase::Scored => {
                let totals: BTreeMap<String, f64> = session
                    .players
                    .iter()
                    .map(|p| {
                        let total = round.guesses.get(&p.player_id).map(|(_, s)| s.total).unwrap_or(0.0);
                        (p.player_id.clone(), total)
                    })
                    .collect();
                self.commit(
                    &mut session,
                    vec![Event::Revealed(log::Revealed { round: number, totals })],
                )?;
            }
            actual => {
                return Err(EngineError::Phase {
                    round: number,
                    expected: "Scored".into(),
                    actual,
                })
            }
        }
        self.reveal_payload(&session, session.round(number)?)
    }

    fn style_reveal(&self, id: &str) -> Result<StyleReveal, EngineError> {
        let style = self
            .catalog
            .style_by_id(id)
            .map_err(|e| EngineError::Validation(e.to_string()))?;
        Ok(StyleReveal {
            id: style.id.clone(),
            name: style.name.clone(),
            region: style.region_id.clone(),
            period: style.period,
            characteristics: style.characteristics.clone(),
            architects: style.architects.clone(),
            summary: style.summary.clone(),
        })
    }

    fn reveal_payload(&self, session: &GameSession, round: &RoundState) -> Result<RevealPayload, EngineError> {
        let spec = &round.spec;
        let landmark = match &spec.landmark_id {
            Some(id) => {
                let l = self
                    .catalog
                    .landmark_by_id(id)
                    .map_err(|e| EngineError::Validation(e.to_string()))?;
                Some(LandmarkReveal {
                    id: l.id.clone(),
                    name: l.name.clone(),
                    coord: l.coord,
                })
            }
            None => None,
        };
        let fusion_style = match &spec.fusion_style_id {
            Some(id) => Some(self.style_reveal(id)?),
            None => None,
        };
        let results = round
            .guesses
            .iter()
            .map(|(player_id, (guess, score))| {
                let display_name = session
                    .player(player_id)
                    .map(|p| p.display_name.clone())
                    .unwrap_or_default();
                (
                    player_id.clone(),
                    PlayerResult {
                        display_name,
                        guess: guess.clone(),
                        score: *score,
                    },
                )
            })
            .collect();
        Ok(RevealPayload {
            session_id: session.id.clone(),
            round: round.number,
            mode: spec.mode,
            style: self.style_reveal(&spec.truth_style_id)?,
            truth_coord: spec.truth_coord,
            truth_period: spec.truth_period,
            landmark,
            fusion_style,
            results,
        })
    }

    /// Snapshot of the leaderboard, best first.
    pub fn leaderboard(&self, top_n: Option<usize>) -> Vec<LeaderboardEntry> {
        self.leaderboard.read().top(top_n)
    }

    pub fn fetch_asset(&self, key: &str) -> Result<AssetRecord, EngineError> {
        self.generator.fetch_asset(key).map_err(|e| match e {
            GenError::NotFound(k) => EngineError::NotFound(format!("asset `{k}`")),
            GenError::InvalidRequest(m) => EngineError::NotFound(m),
            other => EngineError::Generation(other.to_string()),
        })
    }
}

#[cfg(test)]
mod tests;
