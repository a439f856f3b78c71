//! Server settings. Precedence: command-line flags, then `ARCHIGUESSER_*`
//! environment variables, then the TOML config file, then defaults.

use std::path::{Path, PathBuf};

use archiguesser_core::engine::EngineConfig;
use archiguesser_core::genai::BackendChoice;
use clap::Args;
use serde::{Deserialize, Serialize};

pub const DEFAULT_PORT: u16 = 8420;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub host: String,
    pub port: u16,
    /// Holds `assets/` and `events.jsonl`.
    pub data_dir: PathBuf,
    /// Catalog JSON; the built-in catalog when absent.
    pub catalog: Option<PathBuf>,
    /// Marker dictionary JSON; the built-in dictionary when absent.
    pub dictionary: Option<PathBuf>,
    /// Board layout JSON; the default board when absent.
    pub board: Option<PathBuf>,
    /// Static web client served under `/ui/`.
    pub ui_dir: PathBuf,
    pub backend: BackendChoice,
    /// Seeds the generator of session seeds; random when absent.
    pub seed: Option<u64>,
    pub sweep_interval_ms: u64,
    pub engine: EngineConfig,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            host: "127.0.0.1".into(),
            port: DEFAULT_PORT,
            data_dir: PathBuf::from("data"),
            catalog: None,
            dictionary: None,
            board: None,
            ui_dir: PathBuf::from("web/dist"),
            backend: BackendChoice::Mock,
            seed: None,
            sweep_interval_ms: 1000,
            engine: EngineConfig::default(),
        }
    }
}

/// Flags accepted by the server binary. Every flag can also come from the
/// environment variable named in its help text.
#[derive(Debug, Clone, Default, Args)]
pub struct ServeArgs {
    /// TOML config file.
    #[arg(long, env = "ARCHIGUESSER_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, env = "ARCHIGUESSER_HOST")]
    pub host: Option<String>,
    #[arg(long, env = "ARCHIGUESSER_PORT")]
    pub port: Option<u16>,
    #[arg(long, env = "ARCHIGUESSER_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
    #[arg(long, env = "ARCHIGUESSER_CATALOG")]
    pub catalog: Option<PathBuf>,
    #[arg(long, env = "ARCHIGUESSER_DICTIONARY")]
    pub dictionary: Option<PathBuf>,
    #[arg(long, env = "ARCHIGUESSER_BOARD")]
    pub board: Option<PathBuf>,
    #[arg(long, env = "ARCHIGUESSER_UI_DIR")]
    pub ui_dir: Option<PathBuf>,
    /// `mock` or `live`.
    #[arg(long, env = "ARCHIGUESSER_GEN_BACKEND")]
    pub backend: Option<BackendChoice>,
    #[arg(long, env = "ARCHIGUESSER_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "ARCHIGUESSER_MAX_ROUNDS")]
    pub max_rounds: Option<u32>,
    #[arg(long, env = "ARCHIGUESSER_DEADLINE_SECS")]
    pub deadline_secs: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl ServerConfig {
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path)
    }

    /// File (or defaults) with the flag and environment values laid over it.
    pub fn resolve(args: &ServeArgs) -> Result<Self, ConfigError> {
        let base = match &args.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        let config = base.overlay(args);
        config.validate()?;
        Ok(config)
    }

    pub fn overlay(mut self, args: &ServeArgs) -> Self {
        if let Some(v) = &args.host {
            self.host = v.clone();
        }
        if let Some(v) = args.port {
            self.port = v;
        }
        if let Some(v) = &args.data_dir {
            self.data_dir = v.clone();
        }
        if let Some(v) = &args.catalog {
            self.catalog = Some(v.clone());
        }
        if let Some(v) = &args.dictionary {
            self.dictionary = Some(v.clone());
        }
        if let Some(v) = &args.board {
            self.board = Some(v.clone());
        }
        if let Some(v) = &args.ui_dir {
            self.ui_dir = v.clone();
        }
        if let Some(v) = args.backend {
            self.backend = v;
        }
        if let Some(v) = args.seed {
            self.seed = Some(v);
        }
        if let Some(v) = args.max_rounds {
            self.engine.max_rounds = v;
        }
        if let Some(v) = args.deadline_secs {
            self.engine.deadline_secs = v;
        }
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.engine.max_rounds == 0 {
            return Err(ConfigError::Invalid("max_rounds must be at least 1".into()));
        }
        if self.engine.deadline_secs == 0 {
            return Err(ConfigError::Invalid("deadline_secs must be at least 1".into()));
        }
        if self.engine.poem_attempts == 0 {
            return Err(ConfigError::Invalid("poem_attempts must be at least 1".into()));
        }
        if self.sweep_interval_ms == 0 {
            return Err(ConfigError::Invalid("sweep_interval_ms must be at least 1".into()));
        }
        Ok(())
    }

    pub fn asset_dir(&self) -> PathBuf {
        self.data_dir.join("assets")
    }

    pub fn event_log(&self) -> PathBuf {
        self.data_dir.join("events.jsonl")
    }
}
