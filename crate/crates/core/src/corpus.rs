//! Annotation/configuration records and their JSONL and CSV interchange.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::config::{self, CircosConfig, ParseError};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed stream{}: {reason}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    MalformedStream { line: Option<usize>, reason: String },
    #[error("record `{0}` not found")]
    NotFound(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One published figure: its caption and labeled configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub annotation: String,
    pub config: CircosConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_meta: Option<BTreeMap<String, serde_json::Value>>,
}

/// Why a single import row was rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecordError {
    #[error("invalid row: {0}")]
    Decode(String),
    #[error("empty id")]
    EmptyId,
    #[error("empty annotation")]
    EmptyAnnotation,
    #[error("invalid config: {0}")]
    Config(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub line: usize,
    pub error: RecordError,
}

impl Serialize for Rejection {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Rejection", 2)?;
        s.serialize_field("line", &self.line)?;
        s.serialize_field("error", &self.error.to_string())?;
        s.end()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ImportReport {
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
}

#[derive(Deserialize)]
struct RawRow {
    id: String,
    annotation: String,
    config: String,
    #[serde(default)]
    source_meta: Option<BTreeMap<String, serde_json::Value>>,
}

impl RawRow {
    fn validate(self) -> Result<CorpusRecord, RecordError> {
        let id = self.id.trim().to_string();
        if id.is_empty() {
            return Err(RecordError::EmptyId);
        }
        if self.annotation.trim().is_empty() {
            return Err(RecordError::EmptyAnnotation);
        }
        let config = config::parse(&self.config)?;
        Ok(CorpusRecord { id, annotation: self.annotation, config, source_meta: self.source_meta })
    }
}

/// Records keyed and iterated by id; `version` advances on every mutation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    records: BTreeMap<String, CorpusRecord>,
    version: u64,
}

impl Corpus {
    pub fn new() -> Corpus {
        Corpus::default()
    }

    pub fn from_records(records: impl IntoIterator<Item = CorpusRecord>) -> Corpus {
        let mut corpus = Corpus::new();
        for r in records {
            corpus.records.insert(r.id.clone(), r);
        }
        if !corpus.records.is_empty() {
            corpus.version = 1;
        }
        corpus
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records in id order.
    pub fn records(&self) -> impl ExactSizeIterator<Item = &CorpusRecord> + Clone {
        self.records.values()
    }

    pub fn get(&self, id: &str) -> Result<&CorpusRecord, CorpusError> {
        self.records.get(id).ok_or_else(|| CorpusError::NotFound(id.to_string()))
    }

    pub fn list(&self, offset: usize, limit: usize) -> Vec<&CorpusRecord> {
        self.records.values().skip(offset).take(limit).collect()
    }

    pub fn delete(&mut self, id: &str) -> Result<bool, CorpusError> {
        match self.records.remove(id) {
            Some(_) => {
                self.version += 1;
                Ok(true)
            }
            None => Err(CorpusError::NotFound(id.to_string())),
        }
    }

    fn apply(&mut self, rows: Vec<(usize, Result<CorpusRecord, RecordError>)>) -> ImportReport {
        let mut report = ImportReport::default();
        for (line, row) in rows {
            match row {
                Ok(record) => {
                    self.records.insert(record.id.clone(), record);
                    report.accepted += 1;
                }
                Err(error) => report.rejected.push(Rejection { line, error }),
            }
        }
        if report.accepted > 0 {
            self.version += 1;
        }
        report
    }

    /// Imports one `{"id","annotation","config"}` object per line. Blank
    /// lines are skipped; line numbers are 1-based.
    pub fn import_jsonl(&mut self, bytes: &[u8]) -> Result<ImportReport, CorpusError> {
        let text = decode(bytes)?;
        let rows = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                let row = serde_json::from_str::<RawRow>(l)
                    .map_err(|e| RecordError::Decode(e.to_string()))
                    .and_then(RawRow::validate);
                (i + 1, row)
            })
            .collect();
        Ok(self.apply(rows))
    }

    /// Imports CSV with header `id,annotation,config`. Line numbers count
    /// the header as line 1.
    pub fn import_csv(&mut self, bytes: &[u8]) -> Result<ImportReport, CorpusError> {
        decode(bytes)?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::Headers).from_reader(bytes);
        let headers =
            reader.headers().map_err(|e| CorpusError::MalformedStream { line: Some(1), reason: e.to_string() })?;
        for required in ["id", "annotation", "config"] {
            if !headers.iter().any(|h| h == required) {
                return Err(CorpusError::MalformedStream {
                    line: Some(1),
                    reason: format!("missing column `{required}`"),
                });
            }
        }
        let mut rows = Vec::new();
        for (i, result) in reader.deserialize::<RawRow>().enumerate() {
            let (line, row) = match result {
                Ok(raw) => (i + 2, raw.validate()),
                Err(e) => {
                    let line = e.position().map(|p| p.line() as usize).unwrap_or(i + 2);
                    (line, Err(RecordError::Decode(e.to_string())))
                }
            };
            rows.push((line, row));
        }
        Ok(self.apply(rows))
    }

    /// JSONL of every record in id order, configs in wrapped form.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in self.records.values() {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    /// Writes the corpus to `path` through a temporary sibling file.
    pub fn snapshot(&self, path: &Path) -> Result<(), CorpusError> {
        let io = |source| CorpusError::Io { path: path.to_path_buf(), source };
        let tmp = path.with_extension("jsonl.tmp");
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(self.to_jsonl().as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
        fs::rename(&tmp, path).map_err(io)
    }

    /// Replaces the contents with a snapshot file. Any bad line aborts the
    /// restore and leaves the corpus untouched.
    pub fn restore(&mut self, path: &Path) -> Result<(), CorpusError> {
        let bytes = fs::read(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
        let text = decode(&bytes)?;
        let mut records = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record = serde_json::from_str::<RawRow>(line)
                .map_err(|e| RecordError::Decode(e.to_string()))
                .and_then(RawRow::validate)
                .map_err(|e| CorpusError::MalformedStream { line: Some(i + 1), reason: e.to_string() })?;
            records.insert(record.id.clone(), record);
        }
        self.records = records;
        self.version += 1;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Corpus, CorpusError> {
        let mut corpus = Corpus::new();
        corpus.restore(path)?;
        Ok(corpus)
    }
}

fn decode(bytes: &[u8]) -> Result<&str, CorpusError> {
    std::str::from_utf8(bytes).map_err(|e| CorpusError::MalformedStream {
        line: Some(bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1),
        reason: "stream is not valid UTF-8".into(),
    })
}
