//! `archiguesser` command line: offline tools (curation, markers, scoring)
//! and a client for a running game service.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use archiguesser_client::Client;
use archiguesser_core::api::{CreateSessionRequest, GuessRequest, Player};
use archiguesser_core::catalog::load_catalog;
use archiguesser_core::curation::{curate_to_files, CurateConfig};
use archiguesser_core::scoring::{score_guess, GameMode, Guess, RoundSpec};
use archiguesser_core::{Catalog, GeoCoord};
use archiguesser_vision::board::{reading_from_detections, BoardSpec};
use archiguesser_vision::detect::{detect_markers_with, DetectorParams};
use archiguesser_vision::dictionary::{
    generate_dictionary, MarkerDictionary, DEFAULT_COUNT, DEFAULT_GRID, DEFAULT_MIN_DISTANCE,
    DEFAULT_SEED,
};
use archiguesser_vision::raster::{encode_png, load_gray, save_gray};
use archiguesser_vision::synth::{
    add_gaussian_noise, board_scene, fit_camera, jittered_camera, render_board, render_marker,
};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "archiguesser", version, about = "ArchiGuesser tools and game client")]
pub struct Cli {
    /// Base URL of the game service.
    #[arg(long, global = true, env = "ARCHIGUESSER_SERVER", default_value = archiguesser_client::DEFAULT_BASE_URL)]
    pub server: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a catalog from repeated text-model queries.
    Curate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Generate a marker dictionary.
    GenDict {
        #[arg(long, default_value_t = DEFAULT_COUNT)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: u32,
        #[arg(long, default_value_t = DEFAULT_MIN_DISTANCE)]
        min_distance: u32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a printable marker as PNG.
    RenderMarker {
        #[arg(long)]
        id: u32,
        #[arg(long, default_value_t = 200)]
        px: u32,
        #[arg(long)]
        dict: Option<PathBuf>,
        /// Output file; `-` writes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a synthetic camera frame of a populated board.
    RenderBoard {
        /// `ID@LAT,LON` where ID is a marker id or a style id; repeatable.
        #[arg(long = "token")]
        tokens: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        year: Option<i32>,
        #[arg(long, default_value_t = 1280)]
        width: u32,
        #[arg(long, default_value_t = 960)]
        height: u32,
        /// Random corner displacement of the camera view, in pixels.
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        /// Standard deviation of additive Gaussian noise, in gray levels.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        dict: Option<PathBuf>,
        #[arg(long)]
        board: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect markers in an image and print them as JSON lines.
    Detect {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        dict: Option<PathBuf>,
        /// Also read the board; without a value the default layout is used.
        #[arg(long, num_args = 0..=1)]
        board: Option<Option<PathBuf>>,
        #[arg(long, default_value_t = DetectorParams::default().window)]
        window: u32,
        #[arg(long, default_value_t = DetectorParams::default().offset)]
        offset: i32,
    },
    /// Score a guess against a round offline.
    Score {
        #[arg(long)]
        guess: PathBuf,
        #[arg(long)]
        round: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Print the default board layout as JSON.
    BoardSpec,
    /// Style tokens known to the service.
    Catalog,
    /// Create or inspect game sessions.
    #[command(subcommand)]
    Session(SessionCommand),
    /// Start, inspect or present rounds.
    #[command(subcommand)]
    Round(RoundCommand),
    /// Submit a guess as JSON or as a camera frame.
    Guess(GuessArgs),
    /// Show the truth and scores of a scored round.
    Reveal { session: String, round: u32 },
    /// Show the leaderboard.
    Leaderboard {
        #[arg(long)]
        top: Option<usize>,
    },
    /// Stream session events as JSON lines.
    Events {
        session: String,
        #[arg(long, default_value_t = 0)]
        cursor: u64,
        /// Stop after this many events.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Download an asset.
    Asset {
        key: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum SessionCommand {
    /// Create a session.
    Create {
        /// image, sights or poem.
        #[arg(long)]
        mode: GameMode,
        /// `ID=NAME`; repeatable.
        #[arg(long = "player", required = true)]
        players: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_rounds: Option<u32>,
        #[arg(long)]
        deadline_secs: Option<u64>,
    },
    /// Show a session.
    Show { session: String },
}

#[derive(Debug, Subcommand)]
pub enum RoundCommand {
    /// Start the next round and generate its asset.
    Start { session: String },
    /// Show a round.
    Show { session: String, round: u32 },
    /// Present a round to the players.
    Present { session: String, round: u32 },
}

#[derive(Debug, Args)]
pub struct GuessArgs {
    pub session: String,
    pub round: u32,
    #[arg(long)]
    pub player: String,
    /// Guess JSON file (style_token_ids, coord, year).
    #[arg(long, conflicts_with = "frame", required_unless_present = "frame")]
    pub json: Option<PathBuf>,
    /// PNG or PGM camera frame of the board.
    #[arg(long)]
    pub frame: Option<PathBuf>,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn dictionary(path: &Option<PathBuf>) -> Result<MarkerDictionary> {
    match path {
        Some(p) => MarkerDictionary::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(MarkerDictionary::builtin()),
    }
}

fn catalog(path: &Option<PathBuf>) -> Result<Catalog> {
    match path {
        Some(p) => load_catalog(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(Catalog::builtin()),
    }
}

fn board(path: &Option<PathBuf>) -> Result<BoardSpec> {
    match path {
        Some(p) => BoardSpec::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(BoardSpec::default()),
    }
}

/// Parses `ID@LAT,LON`.
pub fn parse_token(raw: &str, catalog: &Catalog) -> Result<(u32, GeoCoord)> {
    let (id, coord) = raw
        .split_once('@')
        .with_context(|| format!("token `{raw}` is not ID@LAT,LON"))?;
    let (lat, lon) = coord
        .split_once(',')
        .with_context(|| format!("token `{raw}` is not ID@LAT,LON"))?;
    let marker = match id.parse::<u32>() {
        Ok(m) => m,
        Err(_) => catalog
            .marker_for_style(id)
            .with_context(|| format!("style `{id}` has no token marker"))?,
    };
    let coord = GeoCoord::new(lat.trim().parse()?, lon.trim().parse()?).map_err(anyhow::Error::msg)?;
    Ok((marker, coord))
}

/// `ID=NAME`, or a bare id used as both.
pub fn parse_player(raw: &str) -> Player {
    match raw.split_once('=') {
        Some((id, name)) => Player {
            player_id: id.to_string(),
            display_name: name.to_string(),
        },
        None => Player {
            player_id: raw.to_string(),
            display_name: raw.to_string(),
        },
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Curate { config, out, report } => {
            let config = CurateConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let client = config.make_client()?;
            let output = curate_to_files(&config, client.as_ref(), &out, &report)?;
            eprintln!(
                "curated {} styles, {} flagged for review; catalog written to {}",
                output.catalog.styles().len(),
                output.report.flagged_styles().len(),
                out.display()
            );
            Ok(())
        }
        Command::GenDict {
            count,
            grid,
            min_distance,
            seed,
            out,
        } => {
            let dict = generate_dictionary(count, grid, min_distance, seed)?;
            dict.save(&out)?;
            eprintln!("{} codes written to {}", dict.len(), out.display());
            Ok(())
        }
        Command::RenderMarker { id, px, dict, out } => {
            let image = render_marker(&dictionary(&dict)?, id, px)?;
            match out {
                Some(path) if path.as_os_str() != "-" => save_gray(&image, &path)?,
                Some(_) => std::io::stdout().lock().write_all(&encode_png(&image))?,
                None => save_gray(&image, format!("marker-{id}.png"))?,
            }
            Ok(())
        }
        Command::RenderBoard {
            tokens,
            year,
            width,
            height,
            jitter,
            noise,
            seed,
            catalog: catalog_path,
            dict,
            board: board_path,
            out,
        } => {
            let catalog = catalog(&catalog_path)?;
            let spec = board(&board_path)?;
            let dict = dictionary(&dict)?;
            let tokens = tokens
                .iter()
                .map(|t| parse_token(t, &catalog))
                .collect::<Result<Vec<_>>>()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let camera = if jitter > 0.0 {
                jittered_camera(&spec, width, height, 10.0, jitter, &mut rng)
            } else {
                fit_camera(&spec, width, height, 10.0)
            };
            let markers = board_scene(&spec, &tokens, year);
            let mut image = render_board(&dict, &markers, &camera, width, height)?;
            add_gaussian_noise(&mut image, noise, &mut rng);
            save_gray(&image, &out)?;
            Ok(())
        }
        Command::Detect {
            image,
            dict,
            board: board_path,
            window,
            offset,
        } => {
            let dict = dictionary(&dict)?;
            let gray = load_gray(&image).with_context(|| format!("loading {}", image.display()))?;
            let params = DetectorParams {
                window,
                offset,
                ..DetectorParams::default()
            };
            let detections = detect_markers_with(&gray, &dict, &params)?;
            let mut out = std::io::stdout().lock();
            for d in &detections {
                serde_json::to_writer(&mut out, d)?;
                writeln!(out)?;
            }
            if let Some(board_path) = board_path {
                let spec = board(&board_path)?;
                let reading = reading_from_detections(&detections, &spec, |_| true)?;
                serde_json::to_writer(&mut out, &serde_json::json!({ "board": reading }))?;
                writeln!(out)?;
            }
            Ok(())
        }
        Command::Score {
            guess,
            round,
            catalog: catalog_path,
        } => {
            let guess: Guess = read_json(&guess)?;
            let spec: RoundSpec = read_json(&round)?;
            let score = score_guess(&guess, &spec, &catalog(&catalog_path)?)?;
            print_json(&score)
        }
        Command::BoardSpec => print_json(&BoardSpec::default()),
        remote => {
            let runtime = tokio::runtime::Builder::new_current_thread()
                .enable_all()
                .build()?;
            runtime.block_on(run_remote(Client::new(cli.server), remote))
        }
    }
}

async fn run_remote(client: Client, command: Command) -> Result<()> {
    match command {
        Command::Catalog => print_json(&client.catalog().await?),
        Command::Session(SessionCommand::Create {
            mode,
            players,
            seed,
            max_rounds,
            deadline_secs,
        }) => {
            let request = CreateSessionRequest {
                mode,
                players: players.iter().map(|p| parse_player(p)).collect(),
                seed,
                max_rounds,
                deadline_secs,
            };
            print_json(&client.create_session(&request).await?)
        }
        Command::Session(SessionCommand::Show { session }) => print_json(&client.session(&session).await?),
        Command::Round(RoundCommand::Start { session }) => print_json(&client.start_round(&session).await?),
        Command::Round(RoundCommand::Show { session, round }) => {
            print_json(&client.round(&session, round).await?)
        }
        Command::Round(RoundCommand::Present { session, round }) => {
            print_json(&client.present(&session, round).await?)
        }
        Command::Guess(args) => {
            let response = if let Some(path) = &args.frame {
                let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
                let media_type = if bytes.starts_with(b"\x89PNG") {
                    "image/png"
                } else {
                    "image/x-portable-graymap"
                };
                client
                    .guess_frame(&args.session, args.round, &args.player, bytes, media_type)
                    .await?
            } else if let Some(path) = &args.json {
                let guess: Guess = read_json(path)?;
                let request = GuessRequest {
                    player_id: args.player.clone(),
                    guess,
                };
                client.guess(&args.session, args.round, &request).await?
            } else {
                bail!("either --json or --frame is required");
            };
            print_json(&response)
        }
        Command::Reveal { session, round } => print_json(&client.reveal(&session, round).await?),
        Command::Leaderboard { top } => print_json(&client.leaderboard(top).await?),
        Command::Events {
            session,
            cursor,
            limit,
        } => {
            let mut stream = client.events(&session, cursor).await?;
            let mut seen = 0;
            while limit.map_or(true, |l| seen < l) {
                match stream.next_event().await {
                    Some(event) => {
                        let event = event?;
                        println!("{}", serde_json::to_string(&event)?);
                        seen += 1;
                    }
                    None => break,
                }
            }
            stream.close().await;
            Ok(())
        }
        Command::Asset { key, out } => {
            let asset = client.asset(&key).await?;
            std::fs::write(&out, &asset.bytes)?;
            eprintln!("{} ({}, {} bytes)", out.display(), asset.media_type, asset.bytes.len());
            Ok(())
        }
        other => unreachable!("offline command {other:?} dispatched to the client"),
    }
}
