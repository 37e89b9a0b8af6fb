//! HTTP API over the circos authoring engine.

pub mod error;
pub mod idempotency;
pub mod routes;
pub mod state;

use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::Router;
use circos_core::recommend::DEFAULT_MAX_ATTEMPTS;
use circos_core::{
    Corpus, EmbeddingProvider, GenerationProvider, HashingEmbedder, HttpEmbedder, HttpGenerator, MockProvider,
};
use tokio::net::TcpListener;

pub use error::ApiError;
pub use state::{AppState, CorpusState, SessionStore};

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] io::Error),
    #[error("refusing to start: snapshot {path} is unreadable: {reason}")]
    CorruptSnapshot { path: PathBuf, reason: String },
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error("bind failed: {0}")]
    Bind(#[source] io::Error),
    #[error("provider setup failed: {0}")]
    Provider(String),
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub host: String,
    pub port: u16,
    /// JSONL snapshot of the corpus, loaded at start and rewritten on import.
    pub corpus_path: Option<PathBuf>,
    /// One JSON file per session.
    pub session_dir: Option<PathBuf>,
    pub embed_url: Option<String>,
    pub generate_url: Option<String>,
    pub api_key: Option<String>,
    pub max_attempts: usize,
    pub provider_timeout: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            host: "127.0.0.1".into(),
            port: 8080,
            corpus_path: None,
            session_dir: None,
            embed_url: None,
            generate_url: None,
            api_key: None,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            provider_timeout: Duration::from_secs(60),
        }
    }
}

/// Loads the corpus and sessions and wires up the providers. Without URLs
/// the offline hashing embedder and the template generator are used.
pub fn build_state(config: &ServerConfig) -> Result<Arc<AppState>, ServeError> {
    let corpus = match &config.corpus_path {
        Some(path) if path.exists() => {
            Corpus::load(path).map_err(|e| ServeError::CorruptSnapshot { path: path.clone(), reason: e.to_string() })?
        }
        _ => Corpus::new(),
    };
    let (embedder, embed_name): (Arc<dyn EmbeddingProvider>, String) = match &config.embed_url {
        Some(url) => (
            Arc::new(
                HttpEmbedder::new(url, config.api_key.clone(), config.provider_timeout)
                    .map_err(|e| ServeError::Provider(e.to_string()))?,
            ),
            format!("http {url}"),
        ),
        None => (Arc::new(HashingEmbedder), "hashing".into()),
    };
    let (generator, gen_name): (Arc<dyn GenerationProvider>, String) = match &config.generate_url {
        Some(url) => (
            Arc::new(
                HttpGenerator::new(url, config.api_key.clone(), config.provider_timeout)
                    .map_err(|e| ServeError::Provider(e.to_string()))?,
            ),
            format!("http {url}"),
        ),
        None => (Arc::new(MockProvider::Template), "template".into()),
    };
    let corpus = CorpusState::build(corpus, embedder.as_ref()).map_err(|e| ServeError::Provider(e.message))?;
    let sessions = SessionStore::open(config.session_dir.clone())?;
    Ok(Arc::new(AppState::new(
        corpus,
        config.corpus_path.clone(),
        sessions,
        embedder,
        generator,
        config.max_attempts,
        (embed_name, gen_name),
    )))
}

pub fn router(state: Arc<AppState>) -> Router {
    routes::api()
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .method_not_allowed_fallback(|| async {
            ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed").into_response()
        })
        .layer(axum::middleware::from_fn_with_state(state.clone(), idempotency::replay))
        .with_state(state)
}

pub async fn bind(host: &str, port: u16) -> Result<TcpListener, ServeError> {
    TcpListener::bind((host, port)).await.map_err(|e| match e.kind() {
        io::ErrorKind::AddrInUse => ServeError::PortInUse(port),
        _ => ServeError::Bind(e),
    })
}

/// Serves until `shutdown` resolves, then writes every session snapshot.
pub async fn serve_on(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    axum::serve(listener, router(state.clone())).with_graceful_shutdown(shutdown).await?;
    if let Err(e) = state.sessions.flush().await {
        tracing::error!("flushing sessions: {}", e.message);
    }
    Ok(())
}

pub async fn serve(config: ServerConfig) -> Result<(), ServeError> {
    let state = build_state(&config)?;
    let listener = bind(&config.host, config.port).await?;
    let addr: SocketAddr = listener.local_addr().map_err(ServeError::Bind)?;
    tracing::info!(%addr, records = state.corpus().corpus.len(), "listening");
    serve_on(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
    .map_err(ServeError::Bind)
}
