#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::Arc;

use archiguesser_client::Client;
use archiguesser_core::GeoCoord;
use archiguesser_core::api::Player;
use archiguesser_core::clock::StepClock;
use archiguesser_server::{api_doc, build_state_with_clock, spawn_server, AppState, ServerConfig};
use archiguesser_vision::board::BoardSpec;
use archiguesser_vision::dictionary::MarkerDictionary;
use archiguesser_vision::geometry::Homography;
use archiguesser_vision::raster::encode_png;
use archiguesser_vision::synth::{add_gaussian_noise, board_scene, jittered_camera, render_board};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

pub struct TestServer {
    pub addr: SocketAddr,
    pub base: String,
    pub client: Client,
    pub state: AppState,
    pub dir: TempDir,
}

impl TestServer {
    pub fn event_log(&self) -> Vec<u8> {
        std::fs::read(self.dir.path().join("events.jsonl")).unwrap()
    }
}

/// Server on an ephemeral port with a step clock and its own data directory.
pub async fn start(seed: u64) -> TestServer {
    let dir = tempfile::tempdir().unwrap();
    let config = ServerConfig {
        data_dir: dir.path().to_path_buf(),
        seed: Some(seed),
        ..ServerConfig::default()
    };
    let state = build_state_with_clock(&config, Arc::new(StepClock::starting_at_epoch_2024())).unwrap();
    let (addr, _handle) = spawn_server(state.clone(), "127.0.0.1:0".parse().unwrap()).await.unwrap();
    let base = format!("http://{addr}");
    TestServer {
        addr,
        client: Client::new(&base),
        base,
        state,
        dir,
    }
}

pub fn players(n: usize) -> Vec<Player> {
    (0..n)
        .map(|i| Player {
            player_id: format!("p{i}"),
            display_name: format!("Player {i}"),
        })
        .collect()
}

/// Errors of `instance` against the published schema `name`; empty when valid.
pub fn schema_errors(name: &str, instance: &Value) -> Vec<String> {
    let schemas = api_doc::schemas();
    let schema = schemas.get(name).unwrap_or_else(|| panic!("no schema {name}"));
    let validator = jsonschema::validator_for(schema).unwrap();
    validator.iter_errors(instance).map(|e| format!("{e} at {}", e.instance_path)).collect()
}

pub const FRAME_WIDTH: u32 = 1280;
pub const FRAME_HEIGHT: u32 = 960;

/// PNG camera frame of the default board with `tokens` placed and the
/// slider at `year` (omitted when `None`), mildly tilted and noisy.
pub fn synth_frame(tokens: &[(u32, GeoCoord)], year: Option<i32>, seed: u64) -> Vec<u8> {
    synth_frame_with_camera(tokens, year, seed).0
}

/// [`synth_frame`] plus the board-to-image homography used to render it.
pub fn synth_frame_with_camera(
    tokens: &[(u32, GeoCoord)],
    year: Option<i32>,
    seed: u64,
) -> (Vec<u8>, Homography) {
    let spec = BoardSpec::default();
    let dict = MarkerDictionary::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let camera = jittered_camera(&spec, FRAME_WIDTH, FRAME_HEIGHT, 20.0, 15.0, &mut rng);
    let markers = board_scene(&spec, tokens, year);
    let mut image = render_board(&dict, &markers, &camera, FRAME_WIDTH, FRAME_HEIGHT).unwrap();
    add_gaussian_noise(&mut image, 3.0, &mut rng);
    (encode_png(&image), camera)
}

/// Years covered by one image pixel along the slider axis, rounded up.
pub fn slider_pixel_years(camera: &Homography) -> i32 {
    let axis = BoardSpec::default().slider;
    let (a, b) = (camera.apply(axis.start), camera.apply(axis.end));
    let px = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    ((axis.end_year - axis.start_year) as f64 / px).ceil() as i32
}
