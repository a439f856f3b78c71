use std::collections::{BTreeMap, BTreeSet};

use serde_json::json;

use crate::api::{Phase, Player, PublicEvent, PublicEventKind, RoundSummary, SessionSummary};
use crate::clock::Timestamp;
use crate::scoring::{GameMode, Guess, RoundSpec, Score};

use super::log::{Event, LogEntry, ScoredReason, SessionCreated};
use super::EngineError;

#[derive(Debug, Clone, PartialEq)]
pub struct RoundState {
    pub number: u32,
    pub spec: RoundSpec,
    pub phase: Phase,
    pub asset_key: Option<String>,
    pub media_type: Option<String>,
    pub text_asset_key: Option<String>,
    pub attempts: u32,
    pub guesses: BTreeMap<String, (Guess, Score)>,
    pub presented_at: Option<Timestamp>,
    pub deadline: Option<Timestamp>,
    pub scored_reason: Option<ScoredReason>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameSession {
    pub id: String,
    pub mode: GameMode,
    pub players: Vec<Player>,
    pub seed: u64,
    pub max_rounds: u32,
    pub deadline_secs: u64,
    pub rounds: Vec<RoundState>,
    pub used_style_ids: BTreeSet<String>,
    /// Number of random draws made so far, aborted ones included.
    pub draws: u64,
    pub events: Vec<PublicEvent>,
}

fn corrupt(session: &str, message: impl Into<String>) -> EngineError {
    EngineError::Log(format!("session {session}: {}", message.into()))
}

impl GameSession {
    pub(super) fn from_created(id: &str, created: &SessionCreated) -> Self {
        GameSession {
            id: id.to_string(),
            mode: created.mode,
            players: created.players.clone(),
            seed: created.seed,
            max_rounds: created.max_rounds,
            deadline_secs: created.deadline_secs,
            rounds: Vec::new(),
            used_style_ids: BTreeSet::new(),
            draws: 0,
            events: Vec::new(),
        }
    }

    pub fn player(&self, player_id: &str) -> Option<&Player> {
        self.players.iter().find(|p| p.player_id == player_id)
    }

    pub fn round(&self, number: u32) -> Result<&RoundState, EngineError> {
        number
            .checked_sub(1)
            .and_then(|i| self.rounds.get(i as usize))
            .ok_or_else(|| EngineError::NotFound(format!("round {number} of session {}", self.id)))
    }

    pub fn current(&self) -> Option<&RoundState> {
        self.rounds.last()
    }

    fn round_mut(&mut self, number: u32) -> Result<&mut RoundState, EngineError> {
        let id = self.id.clone();
        number
            .checked_sub(1)
            .and_then(|i| self.rounds.get_mut(i as usize))
            .ok_or_else(|| corrupt(&id, format!("event for missing round {number}")))
    }

    fn advance(&mut self, number: u32, from: Phase, to: Phase) -> Result<&mut RoundState, EngineError> {
        let id = self.id.clone();
        let round = self.round_mut(number)?;
        if round.phase != from {
            return Err(corrupt(
                &id,
                format!("round {number} cannot go {:?} -> {:?}, it is {:?}", from, to, round.phase),
            ));
        }
        round.phase = to;
        Ok(round)
    }

    fn publish(&mut self, ts: Timestamp, kind: PublicEventKind, round: u32, data: serde_json::Value) -> PublicEvent {
        let event = PublicEvent {
            seq: self.events.len() as u64,
            session_id: self.id.clone(),
            kind,
            round,
            ts,
            data,
        };
        self.events.push(event.clone());
        event
    }

    /// Applies one logged event and returns the public events it produced.
    /// Rejects events that would break round order or phase monotonicity.
    pub(super) fn apply(&mut self, entry: &LogEntry) -> Result<Vec<PublicEvent>, EngineError> {
        let ts = entry.ts;
        let mut out = Vec::new();
        match &entry.event {
            Event::SessionCreated(_) => return Err(corrupt(&self.id, "session created twice")),
            Event::RoundStarted(e) => {
                let expected = self.rounds.len() as u32 + 1;
                if e.round != expected {
                    return Err(corrupt(&self.id, format!("round {} started, expected {expected}", e.round)));
                }
                if let Some(prev) = self.rounds.last() {
                    if prev.phase != Phase::Revealed {
                        return Err(corrupt(&self.id, "round started before previous reveal"));
                    }
                }
                if e.pool_reset {
                    self.used_style_ids.clear();
                }
                let drawn = match self.mode {
                    GameMode::Sights => e.spec.fusion_style_id.clone().unwrap_or_default(),
                    _ => e.spec.truth_style_id.clone(),
                };
                self.used_style_ids.insert(drawn);
                self.draws = self.draws.max(e.draw + 1);
                self.rounds.push(RoundState {
                    number: e.round,
                    spec: e.spec.clone(),
                    phase: Phase::Created,
                    asset_key: None,
                    media_type: None,
                    text_asset_key: None,
                    attempts: 0,
                    guesses: BTreeMap::new(),
                    presented_at: None,
                    deadline: None,
                    scored_reason: None,
                });
                let mode = self.mode;
                out.push(self.publish(ts, PublicEventKind::RoundStarted, e.round, json!({ "round": e.round, "mode": mode })));
            }
            Event::RoundAborted(e) => {
                if e.pool_reset {
                    self.used_style_ids.clear();
                }
                self.draws = self.draws.max(e.draw + 1);
            }
            Event::AssetReady(e) => {
                let round = self.advance(e.round, Phase::Created, Phase::AssetReady)?;
                round.asset_key = Some(e.asset_key.clone());
                round.media_type = Some(e.media_type.clone());
                round.text_asset_key = e.text_asset_key.clone();
                round.attempts = e.attempts;
                let mut data = json!({
                    "round": e.round,
                    "asset_key": e.asset_key,
                    "media_type": e.media_type,
                });
                if let Some(text) = &e.text_asset_key {
                    data["text_asset_key"] = json!(text);
                }
                out.push(self.publish(ts, PublicEventKind::AssetReady, e.round, data));
            }
            Event::RoundPresented(e) => {
                let round = self.advance(e.round, Phase::AssetReady, Phase::Presented)?;
                round.presented_at = Some(e.presented_at);
                round.deadline = Some(e.deadline);
            }
            Event::GuessReceived(e) => {
                if self.player(&e.player_id).is_none() {
                    return Err(corrupt(&self.id, format!("guess from unknown player {}", e.player_id)));
                }
                let id = self.id.clone();
                let round = self.round_mut(e.round)?;
                if round.phase != Phase::Presented {
                    return Err(corrupt(&id, format!("guess in phase {:?}", round.phase)));
                }
                if round.guesses.contains_key(&e.player_id) {
                    return Err(corrupt(&id, format!("second guess from {}", e.player_id)));
                }
                round
                    .guesses
                    .insert(e.player_id.clone(), (e.guess.clone(), e.score));
                out.push(self.publish(
                    ts,
                    PublicEventKind::GuessReceived,
                    e.round,
                    json!({ "round": e.round, "player_id": e.player_id }),
                ));
            }
            Event::RoundScored(e) => {
                let round = self.advance(e.round, Phase::Presented, Phase::Scored)?;
                round.scored_reason = Some(e.reason);
                out.push(self.publish(
                    ts,
                    PublicEventKind::RoundScored,
                    e.round,
                    json!({ "round": e.round, "reason": e.reason }),
                ));
            }
            Event::Revealed(e) => {
                self.advance(e.round, Phase::Scored, Phase::Revealed)?;
                out.push(self.publish(
                    ts,
                    PublicEventKind::Revealed,
                    e.round,
                    json!({ "round": e.round, "totals": e.totals }),
                ));
            }
        }
        Ok(out)
    }

    pub fn round_summary(&self, round: &RoundState) -> RoundSummary {
        RoundSummary {
            session_id: self.id.clone(),
            round: round.number,
            mode: self.mode,
            phase: round.phase,
            asset_key: round.asset_key.clone(),
            media_type: round.media_type.clone(),
            text_asset_key: round.text_asset_key.clone(),
            presented_at: round.presented_at,
            deadline: round.deadline,
            guessed: round.guesses.keys().cloned().collect(),
        }
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            session_id: self.id.clone(),
            mode: self.mode,
            players: self.players.clone(),
            seed: self.seed,
            max_rounds: self.max_rounds,
            deadline_secs: self.deadline_secs,
            rounds: self.rounds.iter().map(|r| self.round_summary(r)).collect(),
        }
    }
}
