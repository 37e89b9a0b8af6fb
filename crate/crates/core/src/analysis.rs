//! Track-combination statistics over a corpus.
//!
//! Two conditional-probability tables are computed. The stacked table
//! tallies radially adjacent rings, reading each configuration as
//! `START, ring_0, …, ring_n, END` and collapsing multi-track rings to
//! `SYNTH`; its entries are P(inner | outer). The synthesized table tallies
//! track types that share a ring; its entries are P(B | A), the share of
//! rings containing A that also contain B.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::config::{CircosConfig, Ring, TrackKind};
use crate::corpus::{Corpus, CorpusError};

/// Class of a ring for the stacked table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingClass {
    Start,
    Track(TrackKind),
    Synth,
    End,
}

impl RingClass {
    /// Row/column order of the stacked table.
    pub fn stacked_labels() -> Vec<RingClass> {
        let mut out = vec![RingClass::Start];
        out.extend(TrackKind::ALL.iter().copied().map(RingClass::Track));
        out.push(RingClass::Synth);
        out.push(RingClass::End);
        out
    }

    pub fn of_ring(ring: &Ring) -> RingClass {
        if ring.is_synthesized() {
            RingClass::Synth
        } else {
            RingClass::Track(ring.tracks()[0])
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RingClass::Start => "start",
            RingClass::Track(k) => k.name(),
            RingClass::Synth => "synth",
            RingClass::End => "end",
        }
    }

    fn index(self) -> usize {
        match self {
            RingClass::Start => 0,
            RingClass::Track(k) => 1 + k.index(),
            RingClass::Synth => 1 + TrackKind::ALL.len(),
            RingClass::End => 2 + TrackKind::ALL.len(),
        }
    }
}

impl fmt::Display for RingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for RingClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Counts and row-conditional probabilities over a square label set.
///
/// `probs[r][c] = counts[r][c] / row_totals[r]`, or 0 when the row total is
/// zero. For the stacked table the row total is the row sum of `counts`;
/// for the synthesized table it is the number of rings containing the row
/// type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalMatrix {
    pub labels: Vec<RingClass>,
    pub counts: Vec<Vec<u64>>,
    pub row_totals: Vec<u64>,
    pub probs: Vec<Vec<f64>>,
}

impl ConditionalMatrix {
    fn from_counts(labels: Vec<RingClass>, counts: Vec<Vec<u64>>, row_totals: Vec<u64>) -> Self {
        let probs = counts
            .iter()
            .zip(&row_totals)
            .map(|(row, &total)| row.iter().map(|&c| if total > 0 { c as f64 / total as f64 } else { 0.0 }).collect())
            .collect();
        ConditionalMatrix { labels, counts, row_totals, probs }
    }

    fn pos(&self, class: RingClass) -> Option<usize> {
        self.labels.iter().position(|&l| l == class)
    }

    /// P(col | row); 0 for labels outside the table.
    pub fn prob(&self, row: RingClass, col: RingClass) -> f64 {
        match (self.pos(row), self.pos(col)) {
            (Some(r), Some(c)) => self.probs[r][c],
            _ => 0.0,
        }
    }

    pub fn count(&self, row: RingClass, col: RingClass) -> u64 {
        match (self.pos(row), self.pos(col)) {
            (Some(r), Some(c)) => self.counts[r][c],
            _ => 0,
        }
    }

    /// The `per_row` most probable successors of every row with data,
    /// ordered by descending probability then label order.
    pub fn top_transitions(&self, per_row: usize) -> Vec<(RingClass, Vec<(RingClass, f64)>)> {
        let mut out = Vec::new();
        for (r, &row) in self.labels.iter().enumerate() {
            if self.row_totals[r] == 0 {
                continue;
            }
            let mut cells: Vec<(usize, f64)> =
                self.probs[r].iter().copied().enumerate().filter(|&(_, p)| p > 0.0).collect();
            cells.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            cells.truncate(per_row);
            out.push((row, cells.into_iter().map(|(c, p)| (self.labels[c], p)).collect()));
        }
        out
    }

    /// Aligned probability table for terminals.
    pub fn to_text_table(&self) -> String {
        let width = self.labels.iter().map(|l| l.name().len()).max().unwrap_or(4).max(5);
        let mut out = format!("{:>width$}", "");
        for l in &self.labels {
            let _ = write!(out, " {:>width$}", l.name());
        }
        out.push('\n');
        for (r, l) in self.labels.iter().enumerate() {
            let _ = write!(out, "{:>width$}", l.name());
            for p in &self.probs[r] {
                let _ = write!(out, " {:>width$.3}", p);
            }
            out.push('\n');
        }
        out
    }
}

/// Adjacent-ring table, P(inner | outer).
pub fn stacked_matrix(corpus: &Corpus) -> Result<ConditionalMatrix, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Ok(stacked_matrix_of(corpus.records().map(|r| &r.config)))
}

pub fn stacked_matrix_of<'a>(configs: impl IntoIterator<Item = &'a CircosConfig>) -> ConditionalMatrix {
    let labels = RingClass::stacked_labels();
    let n = labels.len();
    let mut counts = vec![vec![0u64; n]; n];
    for config in configs {
        let mut prev = RingClass::Start;
        for ring in config.rings() {
            let class = RingClass::of_ring(ring);
            counts[prev.index()][class.index()] += 1;
            prev = class;
        }
        counts[prev.index()][RingClass::End.index()] += 1;
    }
    let totals = counts.iter().map(|row| row.iter().sum()).collect();
    ConditionalMatrix::from_counts(labels, counts, totals)
}

/// Same-ring co-occurrence table, P(B | A).
pub fn synthesized_matrix(corpus: &Corpus) -> Result<ConditionalMatrix, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Ok(synthesized_matrix_of(corpus.records().map(|r| &r.config)))
}

pub fn synthesized_matrix_of<'a>(configs: impl IntoIterator<Item = &'a CircosConfig>) -> ConditionalMatrix {
    let n = TrackKind::ALL.len();
    let mut counts = vec![vec![0u64; n]; n];
    let mut containing = vec![0u64; n];
    for ring in configs.into_iter().flat_map(|c| c.rings()) {
        let mut multiplicity = [0u32; 9];
        for kind in ring.tracks() {
            multiplicity[kind.index()] += 1;
        }
        for a in 0..n {
            if multiplicity[a] == 0 {
                continue;
            }
            containing[a] += 1;
            for b in 0..n {
                let co = if a == b { multiplicity[a] >= 2 } else { multiplicity[b] > 0 };
                if co {
                    counts[a][b] += 1;
                }
            }
        }
    }
    let labels = TrackKind::ALL.iter().copied().map(RingClass::Track).collect();
    ConditionalMatrix::from_counts(labels, counts, containing)
}

/// Per-corpus histograms of plot structure.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CorpusDistributions {
    pub rings_per_plot: BTreeMap<usize, u64>,
    pub track_types_per_plot: BTreeMap<usize, u64>,
    pub tracks_per_ring: BTreeMap<usize, u64>,
    pub tracks_per_type: BTreeMap<TrackKind, u64>,
}

pub fn distributions(corpus: &Corpus) -> Result<CorpusDistributions, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Ok(distributions_of(corpus.records().map(|r| &r.config)))
}

pub fn distributions_of<'a>(configs: impl IntoIterator<Item = &'a CircosConfig>) -> CorpusDistributions {
    let mut d = CorpusDistributions::default();
    for config in configs {
        *d.rings_per_plot.entry(config.rings().len()).or_default() += 1;
        let mut seen = [false; 9];
        for ring in config.rings() {
            *d.tracks_per_ring.entry(ring.tracks().len()).or_default() += 1;
            for &kind in ring.tracks() {
                seen[kind.index()] = true;
                *d.tracks_per_type.entry(kind).or_default() += 1;
            }
        }
        let distinct = seen.iter().filter(|&&s| s).count();
        *d.track_types_per_plot.entry(distinct).or_default() += 1;
    }
    d
}

impl CorpusDistributions {
    pub fn to_text(&self) -> String {
        fn section<K: fmt::Display>(out: &mut String, title: &str, map: &BTreeMap<K, u64>) {
            let _ = writeln!(out, "{title}");
            for (k, v) in map {
                let _ = writeln!(out, "  {k:>10}  {v}");
            }
        }
        let mut out = String::new();
        section(&mut out, "rings per plot", &self.rings_per_plot);
        section(&mut out, "track types per plot", &self.track_types_per_plot);
        section(&mut out, "tracks per ring", &self.tracks_per_ring);
        section(&mut out, "tracks per type", &self.tracks_per_type);
        out
    }
}
