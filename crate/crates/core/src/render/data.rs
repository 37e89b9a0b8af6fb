//! Plot datasets and their CSV ingest.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::TrackKind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DataError {
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("line {line}: unknown block `{block}`")]
    UnknownBlock { line: usize, block: String },
    #[error("block `{0}` is already defined")]
    DuplicateBlock(String),
    #[error("unknown dataset kind `{0}`")]
    UnknownKind(String),
    #[error("dataset `{0}` not found")]
    NotFound(String),
    #[error("dataset is empty")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Karyotype,
    Attachment,
    Link,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Karyotype => "karyotype",
            DatasetKind::Attachment => "attachment",
            DatasetKind::Link => "link",
        }
    }

    /// Dataset kind a track of `kind` draws from.
    pub fn for_track(kind: TrackKind) -> DatasetKind {
        match kind {
            TrackKind::Ideogram => DatasetKind::Karyotype,
            TrackKind::Chord => DatasetKind::Link,
            _ => DatasetKind::Attachment,
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetKind {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "karyotype" => Ok(DatasetKind::Karyotype),
            "attachment" => Ok(DatasetKind::Attachment),
            "link" => Ok(DatasetKind::Link),
            _ => Err(DataError::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KaryotypeBlock {
    pub id: String,
    pub label: String,
    pub length: u64,
    #[serde(default)]
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttachValue {
    Num(f64),
    Cat(String),
}

impl AttachValue {
    fn parse(raw: &str) -> AttachValue {
        let raw = raw.trim();
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => AttachValue::Num(v),
            _ => AttachValue::Cat(raw.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttachmentRow {
    pub block: String,
    pub start: u64,
    pub end: u64,
    pub value: AttachValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Locus {
    pub block: String,
    pub start: u64,
    pub end: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRow {
    pub src: Locus,
    pub dst: Locus,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rows", rename_all = "lowercase")]
pub enum DatasetData {
    Karyotype(Vec<KaryotypeBlock>),
    Attachment(Vec<AttachmentRow>),
    Link(Vec<LinkRow>),
}

impl DatasetData {
    pub fn kind(&self) -> DatasetKind {
        match self {
            DatasetData::Karyotype(_) => DatasetKind::Karyotype,
            DatasetData::Attachment(_) => DatasetKind::Attachment,
            DatasetData::Link(_) => DatasetKind::Link,
        }
    }

    pub fn row_count(&self) -> usize {
        match self {
            DatasetData::Karyotype(r) => r.len(),
            DatasetData::Attachment(r) => r.len(),
            DatasetData::Link(r) => r.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub id: String,
    pub name: String,
    /// Marker color shown next to the dataset in the data panel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marker: Option<String>,
    pub data: DatasetData,
}

impl Dataset {
    pub fn kind(&self) -> DatasetKind {
        self.data.kind()
    }
}

fn records(bytes: &[u8], columns: &[&str]) -> Result<Vec<(usize, csv::StringRecord)>, DataError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let headers = reader.headers().map_err(|e| DataError::Csv { line: 1, message: e.to_string() })?.clone();
    let mut idx = Vec::with_capacity(columns.len());
    for col in columns {
        match headers.iter().position(|h| h.eq_ignore_ascii_case(col)) {
            Some(i) => idx.push(i),
            None => return Err(DataError::Csv { line: 1, message: format!("missing column `{col}`") }),
        }
    }
    let mut out = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let line = n + 2;
        let rec = rec.map_err(|e| DataError::Csv {
            line: e.position().map(|p| p.line() as usize).unwrap_or(line),
            message: e.to_string(),
        })?;
        let picked: csv::StringRecord = idx.iter().map(|&i| rec.get(i).unwrap_or("")).collect();
        out.push((line, picked));
    }
    Ok(out)
}

fn num<T: FromStr>(field: &str, name: &str, line: usize) -> Result<T, DataError> {
    field
        .trim()
        .parse()
        .map_err(|_| DataError::Invalid { line, message: format!("`{name}` is not a valid number: `{field}`") })
}

fn interval(start: u64, end: u64, line: usize) -> Result<(), DataError> {
    if start > end {
        return Err(DataError::Invalid { line, message: format!("start {start} is after end {end}") });
    }
    Ok(())
}

/// Parses a CSV upload. Headers: karyotype `id,label,length,color`;
/// attachment `block,start,end,value`; link
/// `src_block,src_start,src_end,dst_block,dst_start,dst_end,value`.
pub fn parse_csv(kind: DatasetKind, bytes: &[u8]) -> Result<DatasetData, DataError> {
    let data = match kind {
        DatasetKind::Karyotype => {
            let has_color = {
                let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
                r.headers().map(|h| h.iter().any(|c| c.eq_ignore_ascii_case("color"))).unwrap_or(false)
            };
            let cols: &[&str] =
                if has_color { &["id", "label", "length", "color"] } else { &["id", "label", "length"] };
            let mut seen = HashSet::new();
            let mut blocks = Vec::new();
            for (line, r) in records(bytes, cols)? {
                let id = r[0].to_string();
                if id.is_empty() {
                    return Err(DataError::Invalid { line, message: "empty block id".into() });
                }
                if !seen.insert(id.clone()) {
                    return Err(DataError::DuplicateBlock(id));
                }
                let length: u64 = num(&r[2], "length", line)?;
                if length == 0 {
                    return Err(DataError::Invalid { line, message: "length must be positive".into() });
                }
                blocks.push(KaryotypeBlock {
                    label: if r[1].is_empty() { id.clone() } else { r[1].to_string() },
                    id,
                    length,
                    color: r.get(3).unwrap_or("").to_string(),
                });
            }
            DatasetData::Karyotype(blocks)
        }
        DatasetKind::Attachment => {
            let mut rows = Vec::new();
            for (line, r) in records(bytes, &["block", "start", "end", "value"])? {
                let start = num(&r[1], "start", line)?;
                let end = num(&r[2], "end", line)?;
                interval(start, end, line)?;
                rows.push(AttachmentRow { block: r[0].to_string(), start, end, value: AttachValue::parse(&r[3]) });
            }
            DatasetData::Attachment(rows)
        }
        DatasetKind::Link => {
            let cols = ["src_block", "src_start", "src_end", "dst_block", "dst_start", "dst_end", "value"];
            let mut rows = Vec::new();
            for (line, r) in records(bytes, &cols)? {
                let src = Locus {
                    block: r[0].to_string(),
                    start: num(&r[1], "src_start", line)?,
                    end: num(&r[2], "src_end", line)?,
                };
                let dst = Locus {
                    block: r[3].to_string(),
                    start: num(&r[4], "dst_start", line)?,
                    end: num(&r[5], "dst_end", line)?,
                };
                interval(src.start, src.end, line)?;
                interval(dst.start, dst.end, line)?;
                let value = if r[6].is_empty() { 1.0 } else { num(&r[6], "value", line)? };
                rows.push(LinkRow { src, dst, value });
            }
            DatasetData::Link(rows)
        }
    };
    if data.row_count() == 0 {
        return Err(DataError::Empty);
    }
    Ok(data)
}

/// Checks attachment and link rows against block lengths. Karyotype data
/// is only checked for id clashes with `blocks`.
pub fn validate_against(data: &DatasetData, blocks: &[&KaryotypeBlock]) -> Result<(), DataError> {
    let length = |id: &str| blocks.iter().find(|b| b.id == id).map(|b| b.length);
    let check = |block: &str, start: u64, end: u64, line: usize| -> Result<(), DataError> {
        match length(block) {
            None => Err(DataError::UnknownBlock { line, block: block.to_string() }),
            Some(len) if end > len => Err(DataError::Invalid {
                line,
                message: format!("interval {start}-{end} exceeds block `{block}` length {len}"),
            }),
            Some(_) => Ok(()),
        }
    };
    match data {
        DatasetData::Karyotype(new) => {
            for b in new {
                if length(&b.id).is_some() {
                    return Err(DataError::DuplicateBlock(b.id.clone()));
                }
            }
        }
        DatasetData::Attachment(rows) => {
            for (i, r) in rows.iter().enumerate() {
                check(&r.block, r.start, r.end, i + 2)?;
            }
        }
        DatasetData::Link(rows) => {
            for (i, r) in rows.iter().enumerate() {
                check(&r.src.block, r.src.start, r.src.end, i + 2)?;
                check(&r.dst.block, r.dst.start, r.dst.end, i + 2)?;
            }
        }
    }
    Ok(())
}
