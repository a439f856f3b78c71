use std::collections::BTreeSet;
use std::sync::Arc;

use chrono::Duration;
use parking_lot::Mutex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::catalog::GeoCoord;
use crate::clock::StepClock;
use crate::genai::AssetStore;
use crate::genai::{GenBackend, MockBackend, Payload};
use crate::scoring::{haversine_km, EARTH_RADIUS_KM};
use crate::text::canonical_name;

struct Harness {
    engine: Engine,
    clock: Arc<StepClock>,
    _dir: tempfile::TempDir,
}

fn harness_with(backend: Arc<dyn GenBackend>, config: EngineConfig, log: Option<&Path>) -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let store = AssetStore::open(dir.path().join("assets")).unwrap();
    let clock = Arc::new(StepClock::starting_at_epoch_2024());
    let generator = Arc::new(
        AssetGenerator::new(store, backend, Arc::new(StepClock::starting_at_epoch_2024())).with_retries(0),
    );
    let catalog = Arc::new(Catalog::builtin());
    let engine = match log {
        Some(path) => Engine::open(catalog, generator, clock.clone(), config, path).unwrap(),
        None => Engine::new(catalog, generator, clock.clone(), config),
    };
    Harness {
        engine,
        clock,
        _dir: dir,
    }
}

fn harness() -> Harness {
    harness_with(Arc::new(MockBackend::new()), EngineConfig::default(), None)
}

fn players(n: usize) -> Vec<Player> {
    (0..n)
        .map(|i| Player {
            player_id: format!("p{i}"),
            display_name: format!("Player {i}"),
        })
        .collect()
}

fn perfect_guess(spec: &RoundSpec) -> Guess {
    let mut ids = vec![spec.truth_style_id.clone()];
    if let Some(f) = &spec.fusion_style_id {
        ids.push(f.clone());
    }
    Guess {
        style_token_ids: ids,
        coord: spec.truth_coord,
        year: spec.truth_period.start,
        submitted_at: None,
    }
}

/// Point `d_km` due north or south of `c` along its meridian.
fn offset(c: GeoCoord, d_km: f64) -> GeoCoord {
    let dlat = (d_km / EARTH_RADIUS_KM).to_degrees();
    let lat = if c.lat + dlat <= 90.0 { c.lat + dlat } else { c.lat - dlat };
    GeoCoord { lat, lon: c.lon }
}

fn play_round(engine: &Engine, id: &str, n_players: usize) -> RevealPayload {
    let round = engine.start_round(id).unwrap();
    engine.present_round(id, round.round).unwrap();
    let spec = engine.round_spec(id, round.round).unwrap();
    for i in 0..n_players {
        let mut g = perfect_guess(&spec);
        g.coord = offset(spec.truth_coord, 300.0 * i as f64);
        engine.submit_guess(id, round.round, &format!("p{i}"), g).unwrap();
    }
    engine.reveal(id, round.round).unwrap()
}

#[test]
fn zero_players_is_rejected() {
    let h = harness();
    let err = h.engine.create_session(GameMode::Image, vec![], 1, None, None).unwrap_err();
    assert!(matches!(err, EngineError::Validation(_)));
}

#[test]
fn empty_display_name_is_rejected() {
    let h = harness();
    let p = vec![Player {
        player_id: "a".into(),
        display_name: "  ".into(),
    }];
    let err = h.engine.create_session(GameMode::Image, p, 1, None, None).unwrap_err();
    assert!(matches!(err, EngineError::Validation(_)));
}

#[test]
fn fresh_poem_session_has_no_rounds() {
    let h = harness();
    let s = h.engine.create_session(GameMode::Poem, players(2), 5, None, None).unwrap();
    assert!(s.rounds.is_empty());
    assert_eq!(s.players.len(), 2);
    assert_eq!(s.max_rounds, DEFAULT_MAX_ROUNDS);
    assert_eq!(s.deadline_secs, DEFAULT_DEADLINE_SECS);
}

fn style_sequence(seed: u64, rounds: u32) -> Vec<String> {
    let h = harness();
    let s = h
        .engine
        .create_session(GameMode::Image, players(1), seed, Some(rounds), None)
        .unwrap();
    (1..=rounds)
        .map(|_| play_round(&h.engine, &s.session_id, 1).style.id)
        .collect()
}

#[test]
fn same_seed_same_sequence() {
    assert_eq!(style_sequence(99, 6), style_sequence(99, 6));
    assert_ne!(style_sequence(99, 6), style_sequence(100, 6));
}

/// Independent re-implementation of the draw: one ChaCha8 stream per draw,
/// uniform index into the catalog-ordered unused styles.
fn oracle_draws(seed: u64, styles: &[String], rounds: usize) -> Vec<String> {
    let mut used = BTreeSet::new();
    let mut out = Vec::new();
    for draw in 0..rounds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(draw as u64);
        let mut pool: Vec<&String> = styles.iter().filter(|s| !used.contains(*s)).collect();
        if pool.is_empty() {
            used.clear();
            pool = styles.iter().collect();
        }
        let pick = pool[rng.gen_range(0..pool.len())].clone();
        used.insert(pick.clone());
        out.push(pick);
    }
    out
}

#[test]
fn thirty_rounds_use_every_style_once() {
    let seq = style_sequence(2024, 30);
    let catalog = Catalog::builtin();
    let ids: Vec<String> = catalog.styles().iter().map(|s| s.id.clone()).collect();
    assert_eq!(ids.len(), 30);
    assert_eq!(seq, oracle_draws(2024, &ids, 30));
    let distinct: BTreeSet<_> = seq.iter().collect();
    assert_eq!(distinct.len(), 30);
}

#[test]
fn pool_resets_after_exhaustion() {
    let seq = style_sequence(7, 31);
    let catalog = Catalog::builtin();
    let ids: Vec<String> = catalog.styles().iter().map(|s| s.id.clone()).collect();
    assert_eq!(seq, oracle_draws(7, &ids, 31));
}

/// Emits the style name in poems for the first `leaks` attempts.
struct Leaky {
    name: Mutex<String>,
    leaks: u32,
    inner: MockBackend,
}

impl GenBackend for Leaky {
    fn produce(&self, request: &GenRequest) -> Result<Payload, GenError> {
        let attempt: u32 = request
            .params
            .get("attempt")
            .and_then(|a| a.parse().ok())
            .unwrap_or(0);
        if request.kind == GenKind::Text && attempt >= 1 && attempt <= self.leaks {
            return Ok(Payload {
                media_type: "text/plain; charset=utf-8".into(),
                bytes: format!("Behold the {} hall\nwhere light rests", self.name.lock()).into_bytes(),
            });
        }
        self.inner.produce(request)
    }
}

#[test]
fn poem_accepted_on_third_attempt() {
    let catalog = Catalog::builtin();
    let backend = Arc::new(Leaky {
        name: Mutex::new(String::new()),
        leaks: 2,
        inner: MockBackend::new(),
    });
    let h = harness_with(backend.clone(), EngineConfig::default(), None);
    let s = h.engine.create_session(GameMode::Poem, players(1), 11, None, None).unwrap();
    // The draw is deterministic; learn the style by drawing in a twin engine.
    let twin = harness();
    let ts = twin.engine.create_session(GameMode::Poem, players(1), 11, None, None).unwrap();
    twin.engine.start_round(&ts.session_id).unwrap();
    let style_id = twin.engine.round_spec(&ts.session_id, 1).unwrap().truth_style_id;
    let style = catalog.style_by_id(&style_id).unwrap();
    *backend.name.lock() = style.name.clone();

    let round = h.engine.start_round(&s.session_id).unwrap();
    assert_eq!(round.phase, Phase::AssetReady);
    assert_eq!(round.media_type.as_deref(), Some("audio/wav"));
    let text_key = round.text_asset_key.unwrap();
    let poem = h.engine.fetch_asset(&text_key).unwrap();
    let text = poem.text().unwrap();
    assert!(!canonical_name(text).contains(&canonical_name(&style.name)));
    assert_eq!(text_key, poem_request(style, None, 3).key());
    let session = h.engine.sessions.read().get(&s.session_id).cloned().unwrap();
    assert_eq!(session.lock().rounds[0].attempts, 3);
}

#[test]
fn poem_round_aborts_when_every_attempt_leaks() {
    let backend = Arc::new(Leaky {
        name: Mutex::new(String::new()),
        leaks: 5,
        inner: MockBackend::new(),
    });
    let h = harness_with(backend.clone(), EngineConfig::default(), None);
    let s = h.engine.create_session(GameMode::Poem, players(1), 3, None, None).unwrap();
    let twin = harness();
    let ts = twin.engine.create_session(GameMode::Poem, players(1), 3, None, None).unwrap();
    twin.engine.start_round(&ts.session_id).unwrap();
    let style_id = twin.engine.round_spec(&ts.session_id, 1).unwrap().truth_style_id;
    *backend.name.lock() = Catalog::builtin().style_by_id(&style_id).unwrap().name.clone();

    let err = h.engine.start_round(&s.session_id).unwrap_err();
    assert!(matches!(err, EngineError::Generation(_)));
    let summary = h.engine.session(&s.session_id).unwrap();
    assert!(summary.rounds.is_empty());
}

#[test]
fn sights_round_has_landmark_and_foreign_fusion() {
    let h = harness();
    let s = h
        .engine
        .create_session(GameMode::Sights, players(1), 8, Some(20), None)
        .unwrap();
    for _ in 0..20 {
        let reveal = play_round(&h.engine, &s.session_id, 1);
        let spec = h.engine.round_spec(&s.session_id, reveal.round).unwrap();
        spec.validate().unwrap();
        let landmark = h.engine.catalog().landmark_by_id(spec.landmark_id.as_ref().unwrap()).unwrap();
        assert_eq!(spec.truth_style_id, landmark.native_style_id);
        assert_ne!(spec.fusion_style_id.as_ref().unwrap(), &landmark.native_style_id);
        assert_eq!(spec.truth_coord, landmark.coord);
        assert_eq!(reveal.landmark.unwrap().id, landmark.id);
        assert!(reveal.results["p0"].score.total > 9999.99);
    }
}

struct Failing;

impl GenBackend for Failing {
    fn produce(&self, _: &GenRequest) -> Result<Payload, GenError> {
        Err(GenError::Backend("service unavailable".into()))
    }
}

#[test]
fn generation_failure_aborts_round_and_returns_style() {
    let h = harness_with(Arc::new(Failing), EngineConfig::default(), None);
    let s = h.engine.create_session(GameMode::Image, players(1), 1, None, None).unwrap();
    let err = h.engine.start_round(&s.session_id).unwrap_err();
    assert!(matches!(err, EngineError::Generation(_)));
    let handle = h.engine.session_handle(&s.session_id).unwrap();
    let session = handle.lock();
    assert!(session.rounds.is_empty());
    assert!(session.used_style_ids.is_empty());
    assert_eq!(session.draws, 1);
    let log = h.engine.memory_log().unwrap();
    assert!(log.last().unwrap().contains("\"kind\":\"round_aborted\""));
}

#[test]
fn guess_rules() {
    let h = harness();
    let s = h.engine.create_session(GameMode::Image, players(2), 4, None, None).unwrap();
    let id = &s.session_id;
    let r = h.engine.start_round(id).unwrap();
    let spec = h.engine.round_spec(id, 1).unwrap();

    let early = h.engine.submit_guess(id, 1, "p0", perfect_guess(&spec)).unwrap_err();
    assert!(matches!(early, EngineError::Phase { actual: Phase::AssetReady, .. }));
    assert!(matches!(
        h.engine.start_round(id).unwrap_err(),
        EngineError::Conflict(_)
    ));

    h.engine.present_round(id, r.round).unwrap();
    assert!(matches!(
        h.engine.start_round(id).unwrap_err(),
        EngineError::Conflict(_)
    ));
    assert!(matches!(
        h.engine.submit_guess(id, 1, "ghost", perfect_guess(&spec)).unwrap_err(),
        EngineError::UnknownPlayer(_)
    ));
    let first = h.engine.submit_guess(id, 1, "p0", perfect_guess(&spec)).unwrap();
    assert_eq!(first.score.total, 10000.0);
    assert!(matches!(
        h.engine.submit_guess(id, 1, "p0", perfect_guess(&spec)).unwrap_err(),
        EngineError::DuplicateGuess { .. }
    ));
    assert_eq!(h.engine.round(id, 1).unwrap().phase, Phase::Presented);

    let mut two = perfect_guess(&spec);
    two.style_token_ids.push(spec.truth_style_id.clone());
    assert!(matches!(
        h.engine.submit_guess(id, 1, "p1", two).unwrap_err(),
        EngineError::Scoring(ScoringError::ModeMismatch { count: 2 })
    ));
    // A rejected guess leaves the player free to guess again.
    assert_eq!(h.engine.round(id, 1).unwrap().guessed, vec!["p0".to_string()]);
}

#[test]
fn sole_player_guess_scores_round() {
    let h = harness();
    let s = h.engine.create_session(GameMode::Image, players(1), 4, None, None).unwrap();
    let id = &s.session_id;
    h.engine.start_round(id).unwrap();
    h.engine.present_round(id, 1).unwrap();
    let spec = h.engine.round_spec(id, 1).unwrap();
    h.engine.submit_guess(id, 1, "p0", perfect_guess(&spec)).unwrap();
    assert_eq!(h.engine.round(id, 1).unwrap().phase, Phase::Scored);
}

#[test]
fn guess_after_deadline_is_phase_error() {
    let h = harness();
    let s = h
        .engine
        .create_session(GameMode::Image, players(2), 4, None, Some(30))
        .unwrap();
    let id = &s.session_id;
    h.engine.start_round(id).unwrap();
    h.engine.present_round(id, 1).unwrap();
    let spec = h.engine.round_spec(id, 1).unwrap();
    h.clock.advance(Duration::seconds(31));
    let err = h.engine.submit_guess(id, 1, "p0", perfect_guess(&spec)).unwrap_err();
    assert!(matches!(err, EngineError::Phase { actual: Phase::Scored, .. }));
    let reveal = h.engine.reveal(id, 1).unwrap();
    assert!(reveal.results.is_empty());
    let board = h.engine.leaderboard(None);
    assert_eq!(board.len(), 2);
    assert!(board.iter().all(|e| e.total_points == 0.0 && e.rounds_played == 1));
}

#[test]
fn expire_due_sweeps_sessions() {
    let h = harness();
    let s = h
        .engine
        .create_session(GameMode::Image, players(1), 4, None, Some(5))
        .unwrap();
    h.engine.start_round(&s.session_id).unwrap();
    h.engine.present_round(&s.session_id, 1).unwrap();
    assert_eq!(h.engine.expire_due().unwrap(), 0);
    h.clock.advance(Duration::seconds(6));
    assert_eq!(h.engine.expire_due().unwrap(), 1);
    assert_eq!(h.engine.expire_due().unwrap(), 0);
}

#[test]
fn reveal_before_deadline_is_phase_error() {
    let h = harness();
    let s = h.engine.create_session(GameMode::Image, players(2), 4, None, None).unwrap();
    h.engine.start_round(&s.session_id).unwrap();
    h.engine.present_round(&s.session_id, 1).unwrap();
    let err = h.engine.reveal(&s.session_id, 1).unwrap_err();
    assert!(matches!(err, EngineError::Phase { actual: Phase::Presented, .. }));
}

#[test]
fn reveal_updates_leaderboard_by_round_totals() {
    let h = harness();
    let s = h.engine.create_session(GameMode::Image, players(2), 21, None, None).unwrap();
    let id = &s.session_id;
    h.engine.start_round(id).unwrap();
    h.engine.present_round(id, 1).unwrap();
    let spec = h.engine.round_spec(id, 1).unwrap();

    // Style and time perfect; geo at 2000 ln 2 km (2500 points) and 2000 ln 5 km (1000 points).
    let mut g0 = perfect_guess(&spec);
    g0.coord = offset(spec.truth_coord, 2000.0 * 2f64.ln());
    let mut g1 = perfect_guess(&spec);
    g1.coord = offset(spec.truth_coord, 2000.0 * 5f64.ln());
    let s0 = h.engine.submit_guess(id, 1, "p0", g0).unwrap().score;
    let s1 = h.engine.submit_guess(id, 1, "p1", g1).unwrap().score;
    assert!((s0.total - 7500.0).abs() < 1e-6, "{}", s0.total);
    assert!((s1.total - 6000.0).abs() < 1e-6, "{}", s1.total);

    assert!(h.engine.leaderboard(None).is_empty());
    let reveal = h.engine.reveal(id, 1).unwrap();
    assert_eq!(reveal.style.id, spec.truth_style_id);
    assert_eq!(reveal.truth_coord, spec.truth_coord);
    let board = h.engine.leaderboard(None);
    assert_eq!(board[0].player_id, "p0");
    assert_eq!(board[0].total_points, s0.total);
    assert_eq!(board[1].total_points, s1.total);

    // A second reveal returns the same payload and does not count twice.
    assert_eq!(h.engine.reveal(id, 1).unwrap(), reveal);
    assert_eq!(h.engine.leaderboard(None), board);
    assert_eq!(h.engine.leaderboard(Some(1)).len(), 1);
}

#[test]
fn offset_helper_distance() {
    let c = GeoCoord { lat: 48.0, lon: 2.0 };
    let d = 2000.0 * 2f64.ln();
    assert!((haversine_km(c, offset(c, d)) - d).abs() < 1e-6);
}

#[test]
fn max_rounds_enforced() {
    let h = harness();
    let s = h.engine.create_session(GameMode::Image, players(1), 4, Some(2), None).unwrap();
    play_round(&h.engine, &s.session_id, 1);
    play_round(&h.engine, &s.session_id, 1);
    assert!(matches!(
        h.engine.start_round(&s.session_id).unwrap_err(),
        EngineError::Conflict(_)
    ));
}

#[test]
fn public_events_follow_round_order() {
    let h = harness();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let sink = seen.clone();
    h.engine.subscribe(Arc::new(move |e: &PublicEvent| sink.lock().push(e.clone())));
    let s = h.engine.create_session(GameMode::Image, players(2), 4, None, None).unwrap();
    play_round(&h.engine, &s.session_id, 2);
    use crate::api::PublicEventKind::*;
    let kinds: Vec<_> = seen.lock().iter().map(|e| e.kind).collect();
    assert_eq!(kinds, [RoundStarted, AssetReady, GuessReceived, GuessReceived, RoundScored, Revealed]);
    let seqs: Vec<_> = seen.lock().iter().map(|e| e.seq).collect();
    assert_eq!(seqs, [0, 1, 2, 3, 4, 5]);
    assert_eq!(h.engine.events_since(&s.session_id, 0).unwrap(), *seen.lock());
    assert_eq!(h.engine.events_since(&s.session_id, 4).unwrap().len(), 2);
}

#[test]
fn log_lines_have_documented_shape() {
    let h = harness();
    let s = h.engine.create_session(GameMode::Image, players(1), 4, None, None).unwrap();
    play_round(&h.engine, &s.session_id, 1);
    let kinds: Vec<String> = h
        .engine
        .memory_log()
        .unwrap()
        .iter()
        .map(|line| {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            let obj = v.as_object().unwrap();
            let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
            assert_eq!(keys.len(), 4, "{line}");
            for k in ["ts", "session_id", "kind", "payload"] {
                assert!(obj.contains_key(k), "{line}");
            }
            assert!(line.starts_with("{\"ts\":"), "{line}");
            obj["kind"].as_str().unwrap().to_string()
        })
        .collect();
    assert_eq!(
        kinds,
        ["session_created", "round_started", "asset_ready", "round_presented", "guess_received", "round_scored", "revealed"]
    );
}

#[test]
fn replay_restores_sessions_and_leaderboard() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.jsonl");
    let (before, board_before, ids) = {
        let h = harness_with(Arc::new(MockBackend::new()), EngineConfig::default(), Some(&path));
        let a = h.engine.create_session(GameMode::Image, players(2), 1, None, None).unwrap();
        let b = h.engine.create_session(GameMode::Sights, players(1), 2, None, None).unwrap();
        play_round(&h.engine, &a.session_id, 2);
        play_round(&h.engine, &b.session_id, 1);
        play_round(&h.engine, &a.session_id, 2);
        h.engine.start_round(&b.session_id).unwrap();
        h.engine.present_round(&b.session_id, 2).unwrap();
        let ids = h.engine.session_ids();
        let before: Vec<_> = ids.iter().map(|id| h.engine.session(id).unwrap()).collect();
        (before, h.engine.leaderboard(None), ids)
    };

    let h = harness_with(Arc::new(MockBackend::new()), EngineConfig::default(), Some(&path));
    let after: Vec<_> = ids.iter().map(|id| h.engine.session(id).unwrap()).collect();
    assert_eq!(before, after);
    assert_eq!(board_before, h.engine.leaderboard(None));

    // Leaderboard totals equal the sum of revealed round totals in the log.
    let mut sums: std::collections::BTreeMap<String, f64> = Default::default();
    for entry in read_log(&path).unwrap() {
        if let Event::Revealed(r) = entry.event {
            for (p, t) in r.totals {
                *sums.entry(p).or_default() += t;
            }
        }
    }
    for e in h.engine.leaderboard(None) {
        assert_eq!(e.total_points, sums[&e.player_id]);
    }

    // New sessions continue the id sequence.
    let next = h.engine.create_session(GameMode::Image, players(1), 3, None, None).unwrap();
    assert_eq!(next.session_id, "s000003");

    // Phases never regress along the log.
    let mut phases: std::collections::HashMap<(String, u32), Phase> = Default::default();
    for entry in read_log(&path).unwrap() {
        let (round, phase) = match &entry.event {
            Event::RoundStarted(e) => (e.round, Phase::Created),
            Event::AssetReady(e) => (e.round, Phase::AssetReady),
            Event::RoundPresented(e) => (e.round, Phase::Presented),
            Event::RoundScored(e) => (e.round, Phase::Scored),
            Event::Revealed(e) => (e.round, Phase::Revealed),
            _ => continue,
        };
        let prev = phases.insert((entry.session_id.clone(), round), phase);
        assert!(prev.map_or(true, |p| p < phase));
    }
}

#[test]
fn torn_trailing_line_is_dropped() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.jsonl");
    {
        let h = harness_with(Arc::new(MockBackend::new()), EngineConfig::default(), Some(&path));
        h.engine.create_session(GameMode::Image, players(1), 1, None, None).unwrap();
    }
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("{\"ts\":\"2024-01-01T00:00:01Z\",\"sess");
    std::fs::write(&path, &text).unwrap();

    let h = harness_with(Arc::new(MockBackend::new()), EngineConfig::default(), Some(&path));
    assert_eq!(h.engine.session_ids(), ["s000001"]);
    h.engine.start_round("s000001").unwrap();
    assert_eq!(read_log(&path).unwrap().len(), 3);
}

#[test]
fn corrupt_log_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.jsonl");
    std::fs::write(&path, "{\"ts\":\"2024-01-01T00:00:00Z\",\"session_id\":\"s000001\",\"kind\":\"revealed\",\"payload\":{\"round\":1,\"totals\":{}}}\n").unwrap();
    let store = AssetStore::open(dir.path().join("a")).unwrap();
    let clock: Arc<dyn Clock> = Arc::new(StepClock::starting_at_epoch_2024());
    let generator = Arc::new(AssetGenerator::new(store, Arc::new(MockBackend::new()), clock.clone()));
    let result = Engine::open(Arc::new(Catalog::builtin()), generator, clock, EngineConfig::default(), &path);
    assert!(matches!(result, Err(EngineError::Log(_))));
}

#[test]
fn transcript_is_reproducible() {
    let run = || {
        let h = harness();
        let s = h.engine.create_session(GameMode::Image, players(2), 77, None, None).unwrap();
        for _ in 0..3 {
            play_round(&h.engine, &s.session_id, 2);
        }
        h.engine.memory_log().unwrap().concat()
    };
    assert_eq!(run(), run());
}

#[test]
fn descriptor_prompt_mode_produces_image() {
    let config = EngineConfig {
        image_prompt: ImagePromptMode::Descriptor,
        ..EngineConfig::default()
    };
    let h = harness_with(Arc::new(MockBackend::new()), config, None);
    let s = h.engine.create_session(GameMode::Image, players(1), 4, None, None).unwrap();
    let r = h.engine.start_round(&s.session_id).unwrap();
    assert_eq!(r.media_type.as_deref(), Some("image/png"));
}
