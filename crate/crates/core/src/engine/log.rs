//! Append-only JSON-lines event log.
//!
//! Each line is one object `{ts, session_id, kind, payload}`. The log is the
//! only persistent state of the engine; everything else is rebuilt by replay.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::api::Player;
use crate::clock::Timestamp;
use crate::scoring::{GameMode, Guess, RoundSpec, Score};

use super::EngineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub ts: Timestamp,
    pub session_id: String,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Event {
    SessionCreated(SessionCreated),
    RoundStarted(RoundStarted),
    RoundAborted(RoundAborted),
    AssetReady(AssetReady),
    RoundPresented(RoundPresented),
    GuessReceived(GuessReceived),
    RoundScored(RoundScored),
    Revealed(Revealed),
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::SessionCreated(_) => "session_created",
            Event::RoundStarted(_) => "round_started",
            Event::RoundAborted(_) => "round_aborted",
            Event::AssetReady(_) => "asset_ready",
            Event::RoundPresented(_) => "round_presented",
            Event::GuessReceived(_) => "guess_received",
            Event::RoundScored(_) => "round_scored",
            Event::Revealed(_) => "revealed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub mode: GameMode,
    pub players: Vec<Player>,
    pub seed: u64,
    pub max_rounds: u32,
    pub deadline_secs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundStarted {
    pub round: u32,
    /// Index of the random stream used for this draw.
    pub draw: u64,
    /// The used-style set was exhausted and cleared before this draw.
    pub pool_reset: bool,
    pub spec: RoundSpec,
}

/// A draw whose asset pipeline failed. The style goes back to the pool and
/// the round number is reused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundAborted {
    pub round: u32,
    pub draw: u64,
    pub pool_reset: bool,
    pub style_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetReady {
    pub round: u32,
    pub asset_key: String,
    pub media_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_asset_key: Option<String>,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundPresented {
    pub round: u32,
    pub presented_at: Timestamp,
    pub deadline: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessReceived {
    pub round: u32,
    pub player_id: String,
    pub guess: Guess,
    pub score: Score,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoredReason {
    AllGuessed,
    Deadline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundScored {
    pub round: u32,
    pub reason: ScoredReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Revealed {
    pub round: u32,
    /// Round total per player; players without a guess get 0.
    pub totals: BTreeMap<String, f64>,
}

enum Sink {
    File { path: PathBuf, file: File },
    Memory(Vec<String>),
}

pub struct EventLog {
    sink: Sink,
}

impl EventLog {
    pub fn in_memory() -> Self {
        EventLog {
            sink: Sink::Memory(Vec::new()),
        }
    }

    /// Opens (or creates) the log at `path` and returns the entries already in it.
    ///
    /// A trailing line without a newline is a torn write from a crash; it is
    /// cut off before new entries are appended.
    pub fn open(path: impl AsRef<Path>) -> Result<(Self, Vec<LogEntry>), EngineError> {
        let path = path.as_ref().to_path_buf();
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)?;

        let mut entries = Vec::new();
        let mut complete_len: u64 = 0;
        {
            let mut reader = BufReader::new(&file);
            let mut line = String::new();
            let mut number = 0usize;
            loop {
                line.clear();
                let n = reader.read_line(&mut line)?;
                if n == 0 {
                    break;
                }
                number += 1;
                if !line.ends_with('\n') {
                    tracing::warn!(path = %path.display(), line = number, "dropping torn trailing log line");
                    break;
                }
                complete_len += n as u64;
                let text = line.trim();
                if text.is_empty() {
                    continue;
                }
                let entry: LogEntry = serde_json::from_str(text).map_err(|e| {
                    EngineError::Log(format!("{}:{number}: {e}", path.display()))
                })?;
                entries.push(entry);
            }
        }
        if file.metadata()?.len() != complete_len {
            file.set_len(complete_len)?;
            file.seek(SeekFrom::End(0))?;
        }
        Ok((
            EventLog {
                sink: Sink::File { path, file },
            },
            entries,
        ))
    }

    pub fn path(&self) -> Option<&Path> {
        match &self.sink {
            Sink::File { path, .. } => Some(path),
            Sink::Memory(_) => None,
        }
    }

    pub fn append(&mut self, entry: &LogEntry) -> Result<(), EngineError> {
        let mut line = serde_json::to_string(entry).map_err(|e| EngineError::Log(e.to_string()))?;
        line.push('\n');
        match &mut self.sink {
            Sink::File { file, .. } => {
                file.write_all(line.as_bytes())?;
                file.flush()?;
            }
            Sink::Memory(lines) => lines.push(line),
        }
        Ok(())
    }

    /// Lines written to an in-memory log, newline-terminated.
    pub fn memory_lines(&self) -> Option<&[String]> {
        match &self.sink {
            Sink::Memory(lines) => Some(lines),
            Sink::File { .. } => None,
        }
    }
}

/// Reads every entry of a log file without opening it for writing.
pub fn read_log(path: impl AsRef<Path>) -> Result<Vec<LogEntry>, EngineError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| EngineError::Log(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}
