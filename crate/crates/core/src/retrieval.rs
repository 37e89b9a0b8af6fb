//! Similar-sample retrieval.
//!
//! Two modes: semantic search ranks records by Euclidean distance between
//! 1024-dimensional text embeddings; structural search ranks them by the
//! token-level edit distance between configurations. Both are exact
//! brute-force scans with ties broken by record id.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::CircosConfig;
use crate::corpus::Corpus;

pub const EMBEDDING_DIM: usize = 1024;

pub const DEFAULT_K: usize = 10;

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("embedding provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("embedding has {0} components, expected {EMBEDDING_DIM}")]
    DimensionMismatch(usize),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("index built at corpus version {index}, corpus is at {corpus}")]
    StaleIndex { index: u64, corpus: u64 },
    #[error("k must be at least 1")]
    InvalidK,
    #[error("embedding record `{id}`: {source}")]
    Record {
        id: String,
        #[source]
        source: Box<RetrievalError>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<EmbeddingVector, RetrievalError> {
        if values.len() != EMBEDDING_DIM {
            return Err(RetrievalError::DimensionMismatch(values.len()));
        }
        Ok(EmbeddingVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &EmbeddingVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

/// Turns text into fixed-size vectors.
pub trait EmbeddingProvider: Send + Sync {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, RetrievalError>;

    fn embed(&self, text: &str) -> Result<EmbeddingVector, RetrievalError> {
        self.embed_batch(&[text.to_string()])?
            .pop()
            .ok_or_else(|| RetrievalError::ProviderUnavailable("empty response".into()))
    }
}

const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const INDEX_SEED: u64 = 0xcbf2_9ce4_8422_2325;
const SIGN_SEED: u64 = INDEX_SEED ^ 0x9e37_79b9_7f4a_7c15;

fn fnv1a64(seed: u64, bytes: &[u8]) -> u64 {
    bytes.iter().fold(seed, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// Built-in signed feature-hashing embedder. Deterministic across runs and
/// platforms.
#[derive(Debug, Clone, Copy, Default)]
pub struct HashingEmbedder;

impl HashingEmbedder {
    pub fn embed_text(&self, text: &str) -> EmbeddingVector {
        let lower = text.to_lowercase();
        let mut v = vec![0.0f64; EMBEDDING_DIM];
        for token in lower.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            let bytes = token.as_bytes();
            let index = (fnv1a64(INDEX_SEED, bytes) % EMBEDDING_DIM as u64) as usize;
            let sign = if fnv1a64(SIGN_SEED, bytes) >> 63 == 0 { 1.0 } else { -1.0 };
            v[index] += sign;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        EmbeddingVector(v)
    }
}

impl EmbeddingProvider for HashingEmbedder {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, RetrievalError> {
        Ok(texts.iter().map(|t| self.embed_text(t)).collect())
    }
}

/// Remote embedder speaking `POST {texts:[..]}` → `{vectors:[[..]..]}`.
#[derive(Debug, Clone)]
pub struct HttpEmbedder {
    url: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

impl HttpEmbedder {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

    pub fn new(
        url: impl Into<String>,
        api_key: Option<String>,
        timeout: Duration,
    ) -> Result<HttpEmbedder, RetrievalError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| RetrievalError::ProviderUnavailable(e.to_string()))?;
        Ok(HttpEmbedder { url: url.into(), api_key, client })
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, RetrievalError> {
        let unavailable = |e: reqwest::Error| RetrievalError::ProviderUnavailable(e.to_string());
        let mut req = self.client.post(&self.url).json(&EmbedRequest { texts });
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp: EmbedResponse =
            req.send().and_then(|r| r.error_for_status()).and_then(|r| r.json()).map_err(unavailable)?;
        if resp.vectors.len() != texts.len() {
            return Err(RetrievalError::ProviderUnavailable(format!(
                "{} vectors returned for {} texts",
                resp.vectors.len(),
                texts.len()
            )));
        }
        resp.vectors.into_iter().map(EmbeddingVector::new).collect()
    }
}

/// Text embedded for a record: annotation, a space, then the bare config.
pub fn record_text(annotation: &str, config: &CircosConfig) -> String {
    format!("{} {}", annotation, config.to_bare_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalHit {
    pub id: String,
    pub distance: f64,
    pub rank: usize,
}

/// One embedding per corpus record, in corpus order.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex {
    corpus_version: u64,
    entries: Vec<(String, EmbeddingVector)>,
}

impl VectorIndex {
    pub fn build(corpus: &Corpus, provider: &dyn EmbeddingProvider) -> Result<VectorIndex, RetrievalError> {
        if corpus.is_empty() {
            return Err(RetrievalError::EmptyCorpus);
        }
        let mut entries = Vec::with_capacity(corpus.len());
        // Batched to keep remote requests bounded.
        let records: Vec<_> = corpus.records().collect();
        for chunk in records.chunks(64) {
            let texts: Vec<String> = chunk.iter().map(|r| record_text(&r.annotation, &r.config)).collect();
            let vectors = provider
                .embed_batch(&texts)
                .map_err(|e| RetrievalError::Record { id: chunk[0].id.clone(), source: Box::new(e) })?;
            if vectors.len() != chunk.len() {
                return Err(RetrievalError::ProviderUnavailable(format!(
                    "{} vectors returned for {} texts",
                    vectors.len(),
                    chunk.len()
                )));
            }
            entries.extend(chunk.iter().map(|r| r.id.clone()).zip(vectors));
        }
        Ok(VectorIndex { corpus_version: corpus.version(), entries })
    }

    pub fn corpus_version(&self) -> u64 {
        self.corpus_version
    }

    pub fn entries(&self) -> &[(String, EmbeddingVector)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_stale(&self, corpus: &Corpus) -> bool {
        self.corpus_version != corpus.version()
    }

    /// Exact k nearest records to `query` by Euclidean distance.
    pub fn search(
        &self,
        corpus: &Corpus,
        provider: &dyn EmbeddingProvider,
        query: &str,
        k: usize,
    ) -> Result<Vec<RetrievalHit>, RetrievalError> {
        if k == 0 {
            return Err(RetrievalError::InvalidK);
        }
        if self.is_stale(corpus) {
            return Err(RetrievalError::StaleIndex { index: self.corpus_version, corpus: corpus.version() });
        }
        let q = provider.embed(query)?;
        if q.0.len() != EMBEDDING_DIM {
            return Err(RetrievalError::DimensionMismatch(q.0.len()));
        }
        Ok(top_k(self.entries.iter().map(|(id, v)| (id.as_str(), q.distance(v))), k))
    }
}

/// Sorts by (distance, id) and keeps the first `k`, assigning 1-based ranks.
fn top_k<'a>(scored: impl Iterator<Item = (&'a str, f64)>, k: usize) -> Vec<RetrievalHit> {
    let mut all: Vec<(&str, f64)> = scored.collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    all.into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (id, distance))| RetrievalHit { id: id.to_string(), distance, rank: i + 1 })
        .collect()
}

/// Unit-cost edit distance between two token sequences.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// The k records whose configurations are closest to `current` by token
/// edit distance.
pub fn structural_search(
    corpus: &Corpus,
    current: &CircosConfig,
    k: usize,
) -> Result<Vec<RetrievalHit>, RetrievalError> {
    if k == 0 {
        return Err(RetrievalError::InvalidK);
    }
    if corpus.is_empty() {
        return Err(RetrievalError::EmptyCorpus);
    }
    let seq = current.to_sequence();
    Ok(top_k(
        corpus.records().map(|r| {
            let d = levenshtein(seq.as_slice(), r.config.to_sequence().as_slice());
            (r.id.as_str(), d as f64)
        }),
        k,
    ))
}
