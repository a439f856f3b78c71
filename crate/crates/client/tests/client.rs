use std::sync::Arc;

use archiguesser_client::{Client, ClientError};
use archiguesser_core::api::{CreateSessionRequest, Player};
use archiguesser_core::clock::StepClock;
use archiguesser_core::GameMode;
use archiguesser_server::{build_state_with_clock, spawn_server, ServerConfig};
use reqwest::StatusCode;

async fn server() -> (Client, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let config = ServerConfig {
        data_dir: dir.path().to_path_buf(),
        seed: Some(3),
        ..ServerConfig::default()
    };
    let state = build_state_with_clock(&config, Arc::new(StepClock::starting_at_epoch_2024())).unwrap();
    let (addr, _) = spawn_server(state, "127.0.0.1:0".parse().unwrap()).await.unwrap();
    // A trailing slash on the base URL is tolerated.
    (Client::new(format!("http://{addr}/")), dir)
}

#[tokio::test]
async fn api_errors_carry_status_and_code() {
    let (client, _dir) = server().await;
    assert!(!client.base_url().ends_with('/'));
    let request = CreateSessionRequest {
        mode: GameMode::Image,
        players: vec![],
        seed: None,
        max_rounds: None,
        deadline_secs: None,
    };
    match client.create_session(&request).await.unwrap_err() {
        ClientError::Api { status, error, detail } => {
            assert_eq!(status, StatusCode::BAD_REQUEST);
            assert_eq!(error, "validation");
            assert!(!detail.is_empty());
        }
        other => panic!("{other:?}"),
    }
    let err = client.session("s000042").await.unwrap_err();
    assert_eq!(err.status(), Some(StatusCode::NOT_FOUND));
}

#[tokio::test]
async fn catalog_assets_and_events() {
    let (client, _dir) = server().await;
    let catalog = client.catalog().await.unwrap();
    assert_eq!(catalog.tokens.len(), 30);

    let request = CreateSessionRequest {
        mode: GameMode::Poem,
        players: vec![Player { player_id: "a".into(), display_name: "A".into() }],
        seed: Some(1),
        max_rounds: Some(1),
        deadline_secs: None,
    };
    let id = client.create_session(&request).await.unwrap().session_id;
    let round = client.start_round(&id).await.unwrap();
    let asset = client.asset(round.asset_key.as_deref().unwrap()).await.unwrap();
    assert_eq!(asset.media_type, "audio/wav");
    assert!(asset.bytes.starts_with(b"RIFF"));

    let mut events = client.events(&id, 0).await.unwrap();
    assert_eq!(events.next_event().await.unwrap().unwrap().seq, 0);
    assert_eq!(events.next_event().await.unwrap().unwrap().seq, 1);
    events.close().await;

    let no_transport = Client::new("http://127.0.0.1:1");
    assert!(matches!(no_transport.catalog().await, Err(ClientError::Transport(_))));
}
