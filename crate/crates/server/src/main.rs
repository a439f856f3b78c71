use std::net::SocketAddr;
use std::time::Duration;

use anyhow::Context;
use archiguesser_server::{api_doc, build_state, router, spawn_sweeper, ServeArgs, ServerConfig};
use clap::Parser;
use tracing_subscriber::EnvFilter;

#[derive(Debug, Parser)]
#[command(name = "archiguesser-server", version, about = "ArchiGuesser game service")]
struct Cli {
    #[command(flatten)]
    serve: ServeArgs,
    /// Print the API description document and exit.
    #[arg(long)]
    dump_api: bool,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();
    let cli = Cli::parse();
    if cli.dump_api {
        print!("{}", api_doc::document_text());
        return Ok(());
    }

    let config = ServerConfig::resolve(&cli.serve)?;
    let state = build_state(&config).context("starting the game engine")?;
    let _sweeper = spawn_sweeper(state.engine.clone(), Duration::from_millis(config.sweep_interval_ms));

    let addr: SocketAddr = format!("{}:{}", config.host, config.port)
        .parse()
        .with_context(|| format!("invalid listen address {}:{}", config.host, config.port))?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    tracing::info!(%addr, data_dir = %config.data_dir.display(), "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
            tracing::info!("shutting down");
        })
        .await?;
    Ok(())
}
