//! Retrieval-augmented configuration recommendation.
//!
//! A prompt is assembled from fixed system knowledge, the top retrieved
//! corpus examples, the user's requirements and the current design. A
//! [`GenerationProvider`] answers it; the first usable token run in the
//! answer is parsed, and unparseable answers are retried with the parse
//! error fed back.

use std::fmt::Write as _;
use std::sync::LazyLock;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{self, ConditionalMatrix, RingClass};
use crate::config::{self, CircosConfig, Token, TrackKind};
use crate::corpus::{Corpus, CorpusRecord};
use crate::retrieval::{EmbeddingProvider, RetrievalError, RetrievalHit, VectorIndex};

pub const DEFAULT_MAX_ATTEMPTS: usize = 3;

pub const TASK_INTRO: &str = "You are an expert of Genomics Visualization. \
Your job is to recommend Circos plot configurations that meet users' needs.";

pub const TOKEN_CONSTRAINT: &str = "You can only use the tokens listed below, and you cannot use any custom tokens";

const BACKGROUND: &str = "A circos plot arranges genomic data on concentric rings around a \
shared circular genome axis. Each ring holds one or more tracks; a track is one chart type \
bound to one dataset. Tracks in different rings are stacked radially. Tracks written inside \
the same ring share its inner and outer radius and are drawn on top of each other. A \
configuration lists the rings from the outside to the inside. Tracks of one ring are written \
next to each other, rings are separated by <split>, and the whole configuration may be wrapped \
in <start> ... <end>.";

const RING_GUIDELINE: &str = "If a ring includes many tracks, it is usually placed in the front \
of the sequence (i.e., the outer side) to avoid visual confusion.";

const ANSWER_FORMAT: &str = "Answer with exactly one configuration written as a token string \
such as <ideogram><split><histogram><split><chord>, followed by a short explanation.";

#[derive(Debug, Error)]
pub enum RecommendError {
    #[error("no valid configuration after {} attempts: {last_error}", raw.len())]
    GenerationInvalid { raw: Vec<String>, last_error: String },
    #[error("generation provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("recommendation `{0}` not found")]
    NotFound(String),
    #[error(transparent)]
    Retrieval(RetrievalError),
}

impl From<RetrievalError> for RecommendError {
    fn from(e: RetrievalError) -> Self {
        match e {
            RetrievalError::EmptyCorpus => RecommendError::EmptyCorpus,
            RetrievalError::ProviderUnavailable(m) => RecommendError::ProviderUnavailable(m),
            other => RecommendError::Retrieval(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptExample {
    pub id: String,
    pub annotation: String,
    /// Bare token string.
    pub config: String,
}

/// A rejected answer and the reason it was rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub response: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system: String,
    pub examples: Vec<PromptExample>,
    pub requirements: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub existing_design: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub corrections: Vec<Correction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl PromptBundle {
    /// The request text sent after the system prompt.
    pub fn user_message(&self) -> String {
        let mut out = String::from("## Examples\n");
        if self.examples.is_empty() {
            out.push_str("(none)\n");
        }
        for (i, ex) in self.examples.iter().enumerate() {
            let _ = writeln!(
                out,
                "Example {} ({}):\nAnnotation: {}\nConfiguration: {}\n",
                i + 1,
                ex.id,
                ex.annotation.trim(),
                ex.config
            );
        }
        let _ = writeln!(out, "## Requirements\n{}\n", self.requirements.trim());
        if let Some(existing) = &self.existing_design {
            let _ = writeln!(out, "## Existing design\n{existing}\n");
        }
        out.push_str(ANSWER_FORMAT);
        out
    }

    /// User message followed by one assistant/user pair per correction.
    pub fn messages(&self) -> Vec<ChatMessage> {
        let mut msgs = vec![ChatMessage { role: "user".into(), content: self.user_message() }];
        for c in &self.corrections {
            msgs.push(ChatMessage { role: "assistant".into(), content: c.response.clone() });
            msgs.push(ChatMessage {
                role: "user".into(),
                content: format!("That answer could not be used: {}. {} {}", c.error, TOKEN_CONSTRAINT, ANSWER_FORMAT),
            });
        }
        msgs
    }

    /// System prompt and messages as one document.
    pub fn full_text(&self) -> String {
        let mut out = self.system.clone();
        for m in self.messages() {
            let _ = write!(out, "\n\n[{}]\n{}", m.role, m.content);
        }
        out
    }
}

fn class_phrase(class: RingClass) -> String {
    match class {
        RingClass::Start => "the outer edge".into(),
        RingClass::End => "the center".into(),
        RingClass::Synth => "a multi-track ring".into(),
        RingClass::Track(k) => format!("<{}>", k.name()),
    }
}

/// System prompt: task, background, token constraint, combination patterns.
pub fn system_prompt(patterns: Option<&ConditionalMatrix>) -> String {
    let mut out = format!("{TASK_INTRO}\n\n## Background\n{BACKGROUND}\n\n## Constraints\n{TOKEN_CONSTRAINT}:\n");
    for t in Token::vocabulary() {
        let _ = writeln!(out, "- {t}");
    }
    let _ = write!(out, "\n## Guidelines\n- {RING_GUIDELINE}\n");
    if let Some(m) = patterns {
        out.push_str("- Observed ring-to-ring transitions in published plots (outer ring, then the most likely next ring inward with its probability):\n");
        for (row, cells) in m.top_transitions(5) {
            let next: Vec<String> = cells.iter().map(|&(c, p)| format!("{} ({p:.2})", class_phrase(c))).collect();
            let _ = writeln!(out, "  - after {}: {}", class_phrase(row), next.join(", "));
        }
    }
    out
}

/// Builds the prompt from ranked records, keeping the first `k`.
pub fn assemble_prompt(
    query: &str,
    retrieved: &[&CorpusRecord],
    existing: Option<&CircosConfig>,
    patterns: Option<&ConditionalMatrix>,
    k: usize,
) -> PromptBundle {
    PromptBundle {
        system: system_prompt(patterns),
        examples: retrieved
            .iter()
            .take(k)
            .map(|r| PromptExample {
                id: r.id.clone(),
                annotation: r.annotation.clone(),
                config: r.config.to_bare_string(),
            })
            .collect(),
        requirements: query.to_string(),
        existing_design: existing.map(|c| c.to_bare_string()),
        corrections: Vec::new(),
    }
}

/// Something that answers a prompt with text.
pub trait GenerationProvider: Send + Sync {
    fn generate(&self, prompt: &PromptBundle, seed: Option<u64>) -> Result<String, RecommendError>;
}

/// Offline provider. Every variant is a pure function of (prompt, seed).
#[derive(Debug, Clone, PartialEq)]
pub enum MockProvider {
    /// Always the same text.
    Fixed(String),
    /// The n-th text answers a prompt carrying n corrections; the last one
    /// repeats.
    Scripted(Vec<String>),
    /// Echoes a retrieved example chosen by `seed % examples`, falling back
    /// to the existing design.
    Template,
}

impl GenerationProvider for MockProvider {
    fn generate(&self, prompt: &PromptBundle, seed: Option<u64>) -> Result<String, RecommendError> {
        match self {
            MockProvider::Fixed(text) => Ok(text.clone()),
            MockProvider::Scripted(texts) => texts
                .get(prompt.corrections.len().min(texts.len().saturating_sub(1)))
                .cloned()
                .ok_or_else(|| RecommendError::ProviderUnavailable("empty script".into())),
            MockProvider::Template => {
                if prompt.examples.is_empty() {
                    let cfg = prompt.existing_design.clone().unwrap_or_else(|| "<ideogram>".into());
                    return Ok(format!("Suggested configuration: {cfg}\nKeeps the current design."));
                }
                let i = (seed.unwrap_or(0) % prompt.examples.len() as u64) as usize;
                let ex = &prompt.examples[i];
                Ok(format!("Suggested configuration: {}\nAdapted from reference {}.", ex.config, ex.id))
            }
        }
    }
}

/// Remote chat-completion provider: `POST {system, messages, seed?}` →
/// `{text}`.
#[derive(Debug, Clone)]
pub struct HttpGenerator {
    url: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct GenerateRequest<'a> {
    system: &'a str,
    messages: Vec<ChatMessage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Deserialize)]
struct GenerateResponse {
    text: String,
}

impl HttpGenerator {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

    pub fn new(url: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Result<Self, RecommendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| RecommendError::ProviderUnavailable(e.to_string()))?;
        Ok(HttpGenerator { url: url.into(), api_key, client })
    }
}

impl GenerationProvider for HttpGenerator {
    fn generate(&self, prompt: &PromptBundle, seed: Option<u64>) -> Result<String, RecommendError> {
        let body = GenerateRequest { system: &prompt.system, messages: prompt.messages(), seed };
        let mut req = self.client.post(&self.url).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        req.send()
            .and_then(|r| r.error_for_status())
            .and_then(|r| r.json::<GenerateResponse>())
            .map(|r| r.text)
            .map_err(|e| RecommendError::ProviderUnavailable(e.to_string()))
    }
}

static ANGLE_TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<\s*([A-Za-z_]+)\s*>").unwrap());

/// A configuration found inside free text.
#[derive(Debug, Clone, PartialEq)]
pub struct Extracted {
    pub config: CircosConfig,
    /// Byte range of the token run in the source text.
    pub span: (usize, usize),
    /// The text with the token run removed.
    pub explanation: String,
}

/// Finds the longest run of known angle-bracket tokens separated only by
/// whitespace and parses it. The first of equally long runs wins.
pub fn extract_config(text: &str) -> Result<Extracted, String> {
    let mut best: Option<(usize, usize, usize)> = None; // (count, start, end)
    let mut run: Option<(usize, usize, usize)> = None;
    let mut unknown = None;
    for cap in ANGLE_TOKEN.captures_iter(text) {
        let m = cap.get(0).unwrap();
        if Token::from_name(&cap[1]).is_none() {
            unknown.get_or_insert_with(|| cap[1].to_string());
            run = None;
            continue;
        }
        run = match run {
            Some((n, s, e)) if text[e..m.start()].trim().is_empty() => Some((n + 1, s, m.end())),
            _ => Some((1, m.start(), m.end())),
        };
        let cur = run.unwrap();
        if best.is_none_or(|b| cur.0 > b.0) {
            best = Some(cur);
        }
    }
    let (_, start, end) = match best {
        Some(b) => b,
        None => {
            return Err(match unknown {
                Some(name) => format!("unknown token <{name}>; no valid token sequence found"),
                None => "no token sequence found".to_string(),
            })
        }
    };
    let config = config::parse(&text[start..end]).map_err(|e| e.to_string())?;
    let explanation = format!("{}{}", &text[..start], &text[end..]).trim().to_string();
    Ok(Extracted { config, span: (start, end), explanation })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    /// Assigned when the recommendation enters a [`History`].
    pub id: String,
    pub query: String,
    pub config: CircosConfig,
    /// Provider text of the accepted attempt.
    pub raw: String,
    pub explanation: String,
    /// Retrieved record ids, rank order.
    pub references: Vec<String>,
    pub attempts: usize,
    pub seed: Option<u64>,
    pub prompt: PromptBundle,
}

impl Recommendation {
    pub fn config_string(&self) -> String {
        self.config.to_bare_string()
    }
}

/// Runs the provider until its answer parses, at most `max_attempts` times.
pub fn generate_validated(
    generator: &dyn GenerationProvider,
    prompt: &PromptBundle,
    seed: Option<u64>,
    max_attempts: usize,
) -> Result<(Extracted, String, usize), RecommendError> {
    let mut prompt = prompt.clone();
    let mut raw = Vec::new();
    let mut last_error = String::from("no attempts made");
    for attempt in 1..=max_attempts.max(1) {
        let text = generator.generate(&prompt, seed)?;
        match extract_config(&text) {
            Ok(ex) => return Ok((ex, text, attempt)),
            Err(e) => {
                last_error = e.clone();
                prompt.corrections.push(Correction { response: text.clone(), error: e });
                raw.push(text);
            }
        }
    }
    Err(RecommendError::GenerationInvalid { raw, last_error })
}

/// Everything a recommendation reads, borrowed from one corpus snapshot.
pub struct Recommender<'a> {
    pub corpus: &'a Corpus,
    pub index: &'a VectorIndex,
    pub embedder: &'a dyn EmbeddingProvider,
    pub generator: &'a dyn GenerationProvider,
}

impl Recommender<'_> {
    pub fn recommend(
        &self,
        query: &str,
        existing: Option<&CircosConfig>,
        k: usize,
        max_attempts: usize,
        seed: Option<u64>,
    ) -> Result<Recommendation, RecommendError> {
        if self.corpus.is_empty() {
            return Err(RecommendError::EmptyCorpus);
        }
        let hits: Vec<RetrievalHit> = self.index.search(self.corpus, self.embedder, query, k)?;
        let records: Vec<&CorpusRecord> =
            hits.iter().map(|h| self.corpus.get(&h.id).expect("index is not stale")).collect();
        let patterns = analysis::stacked_matrix(self.corpus).ok();
        let existing = existing.filter(|c| !c.is_empty());
        let prompt = assemble_prompt(query, &records, existing, patterns.as_ref(), k);
        let (ex, raw, attempts) = generate_validated(self.generator, &prompt, seed, max_attempts)?;
        Ok(Recommendation {
            id: String::new(),
            query: query.to_string(),
            config: ex.config,
            raw,
            explanation: ex.explanation,
            references: hits.into_iter().map(|h| h.id).collect(),
            attempts,
            seed,
            prompt,
        })
    }
}

/// Append-only recommendation log of one session.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub entries: Vec<Recommendation>,
}

impl History {
    /// Stores `rec` under the id `{prefix}-r{n}` and returns it.
    pub fn push(&mut self, prefix: &str, mut rec: Recommendation) -> &Recommendation {
        rec.id = format!("{prefix}-r{}", self.entries.len() + 1);
        self.entries.push(rec);
        self.entries.last().unwrap()
    }

    pub fn get(&self, id: &str) -> Option<&Recommendation> {
        self.entries.iter().find(|r| r.id == id)
    }

    pub fn latest(&self) -> Option<&Recommendation> {
        self.entries.last()
    }

    /// Re-asks the provider with `id`'s prompt under a fresh seed and
    /// appends the answer.
    pub fn regenerate(
        &mut self,
        prefix: &str,
        id: &str,
        generator: &dyn GenerationProvider,
        max_attempts: usize,
    ) -> Result<&Recommendation, RecommendError> {
        let prev = self.get(id).ok_or_else(|| RecommendError::NotFound(id.to_string()))?;
        let seed = Some(self.entries.len() as u64);
        let (ex, raw, attempts) = generate_validated(generator, &prev.prompt, seed, max_attempts)?;
        let rec = Recommendation {
            id: String::new(),
            query: prev.query.clone(),
            config: ex.config,
            raw,
            explanation: ex.explanation,
            references: prev.references.clone(),
            attempts,
            seed,
            prompt: prev.prompt.clone(),
        };
        Ok(self.push(prefix, rec))
    }
}

/// The nine track names, for autocomplete.
pub fn track_vocabulary() -> Vec<&'static str> {
    TrackKind::ALL.iter().map(|k| k.name()).collect()
}
