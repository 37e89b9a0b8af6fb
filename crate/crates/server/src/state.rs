//! Shared server state: the corpus snapshot, providers and sessions.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use circos_core::recommend::History;
use circos_core::retrieval::VectorIndex;
use circos_core::{Corpus, EmbeddingProvider, GenerationProvider, PlotSession};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::idempotency::ReplayCache;
use crate::ServeError;

/// A corpus and the index built from it. Replaced wholesale on import, so
/// readers holding an `Arc` finish on the version they started with.
pub struct CorpusState {
    pub corpus: Corpus,
    /// `None` while the corpus is empty.
    pub index: Option<VectorIndex>,
}

impl CorpusState {
    pub fn build(corpus: Corpus, embedder: &dyn EmbeddingProvider) -> Result<CorpusState, ApiError> {
        let index = if corpus.is_empty() { None } else { Some(VectorIndex::build(&corpus, embedder)?) };
        Ok(CorpusState { corpus, index })
    }

    pub fn index(&self) -> Result<&VectorIndex, ApiError> {
        self.index.as_ref().ok_or_else(ApiError::empty_corpus)
    }
}

/// What a session snapshot file holds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionEntry {
    pub session: PlotSession,
    #[serde(default)]
    pub history: History,
}

pub type SessionHandle = Arc<tokio::sync::Mutex<SessionEntry>>;

/// Sessions by id. Each session has its own lock, so mutations of one
/// session are serialized while others proceed.
pub struct SessionStore {
    dir: Option<PathBuf>,
    map: Mutex<HashMap<String, SessionHandle>>,
}

pub fn valid_session_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

impl SessionStore {
    /// Loads every `*.json` snapshot in `dir`. An unreadable snapshot stops
    /// the load.
    pub fn open(dir: Option<PathBuf>) -> Result<SessionStore, ServeError> {
        let mut map = HashMap::new();
        if let Some(dir) = &dir {
            std::fs::create_dir_all(dir).map_err(|e| ServeError::Io(dir.clone(), e))?;
            let entries = std::fs::read_dir(dir).map_err(|e| ServeError::Io(dir.clone(), e))?;
            let mut paths: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            paths.sort();
            for path in paths {
                let corrupt = |reason: String| ServeError::CorruptSnapshot { path: path.clone(), reason };
                let bytes = std::fs::read(&path).map_err(|e| corrupt(e.to_string()))?;
                let entry: SessionEntry = serde_json::from_slice(&bytes).map_err(|e| corrupt(e.to_string()))?;
                map.insert(entry.session.id.clone(), Arc::new(tokio::sync::Mutex::new(entry)));
            }
        }
        Ok(SessionStore { dir, map: Mutex::new(map) })
    }

    /// The session, created empty on first use.
    pub fn get_or_create(&self, id: &str) -> Result<SessionHandle, ApiError> {
        if !valid_session_id(id) {
            return Err(ApiError::bad_request(
                "invalid_session_id",
                "session ids are 1-64 characters of letters, digits, '-' or '_'",
            ));
        }
        let mut map = self.map.lock().unwrap();
        Ok(map
            .entry(id.to_string())
            .or_insert_with(|| {
                Arc::new(tokio::sync::Mutex::new(SessionEntry {
                    session: PlotSession::new(id),
                    history: History::default(),
                }))
            })
            .clone())
    }

    pub fn handles(&self) -> Vec<SessionHandle> {
        let map = self.map.lock().unwrap();
        let mut ids: Vec<&String> = map.keys().collect();
        ids.sort();
        ids.into_iter().map(|id| map[id].clone()).collect()
    }

    /// Writes the snapshot of one session, if persistence is enabled.
    pub async fn persist(&self, entry: &SessionEntry) -> Result<(), ApiError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        write_atomic(&dir.join(format!("{}.json", entry.session.id)), &serde_json::to_vec_pretty(entry).unwrap())
            .await
            .map_err(|e| ApiError::internal(format!("session snapshot failed: {e}")))
    }

    pub async fn flush(&self) -> Result<(), ApiError> {
        for handle in self.handles() {
            let entry = handle.lock().await;
            self.persist(&entry).await?;
        }
        Ok(())
    }
}

async fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("json.tmp");
    tokio::fs::write(&tmp, bytes).await?;
    tokio::fs::rename(&tmp, path).await
}

pub struct AppState {
    corpus: RwLock<Arc<CorpusState>>,
    pub corpus_path: Option<PathBuf>,
    /// Serializes corpus writers; readers never wait on it.
    pub corpus_writer: tokio::sync::Mutex<()>,
    pub sessions: SessionStore,
    pub embedder: Arc<dyn EmbeddingProvider>,
    pub generator: Arc<dyn GenerationProvider>,
    pub max_attempts: usize,
    pub replay: Mutex<ReplayCache>,
    pub provider_names: (String, String),
}

impl AppState {
    pub fn new(
        corpus: CorpusState,
        corpus_path: Option<PathBuf>,
        sessions: SessionStore,
        embedder: Arc<dyn EmbeddingProvider>,
        generator: Arc<dyn GenerationProvider>,
        max_attempts: usize,
        provider_names: (String, String),
    ) -> AppState {
        AppState {
            corpus: RwLock::new(Arc::new(corpus)),
            corpus_path,
            corpus_writer: tokio::sync::Mutex::new(()),
            sessions,
            embedder,
            generator,
            max_attempts,
            replay: Mutex::new(ReplayCache::new(1024)),
            provider_names,
        }
    }

    pub fn corpus(&self) -> Arc<CorpusState> {
        self.corpus.read().unwrap().clone()
    }

    pub fn swap_corpus(&self, next: CorpusState) {
        *self.corpus.write().unwrap() = Arc::new(next);
    }
}
