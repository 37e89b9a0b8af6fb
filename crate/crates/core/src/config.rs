//! The circos configuration token language.
//!
//! A configuration is a list of rings ordered from the outermost inwards.
//! Each ring holds one or more track tokens; tracks written next to each
//! other without a `<split>` share the ring (a synthesized ring). The stored
//! form is wrapped in `<start>` … `<end>`, the display form omits the
//! wrapper. Both are accepted by [`parse`].
//!
//! ```
//! use circos_core::config::{parse, TrackKind};
//!
//! let cfg = parse("<ideogram><highlight><split><chord>").unwrap();
//! assert_eq!(cfg.rings().len(), 2);
//! assert_eq!(cfg.rings()[0].tracks(), &[TrackKind::Ideogram, TrackKind::Highlight]);
//! assert_eq!(cfg.to_wrapped_string(), "<start><ideogram><highlight><split><chord><end>");
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// The nine track types a configuration may contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrackKind {
    Ideogram,
    Highlight,
    Line,
    Scatter,
    Histogram,
    Heatmap,
    Tile,
    Chord,
    Others,
}

impl TrackKind {
    pub const ALL: [TrackKind; 9] = [
        TrackKind::Ideogram,
        TrackKind::Highlight,
        TrackKind::Line,
        TrackKind::Scatter,
        TrackKind::Histogram,
        TrackKind::Heatmap,
        TrackKind::Tile,
        TrackKind::Chord,
        TrackKind::Others,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrackKind::Ideogram => "ideogram",
            TrackKind::Highlight => "highlight",
            TrackKind::Line => "line",
            TrackKind::Scatter => "scatter",
            TrackKind::Histogram => "histogram",
            TrackKind::Heatmap => "heatmap",
            TrackKind::Tile => "tile",
            TrackKind::Chord => "chord",
            TrackKind::Others => "others",
        }
    }

    /// Position in [`TrackKind::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_name(name: &str) -> Option<TrackKind> {
        match name.to_ascii_lowercase().as_str() {
            "ideogram" => Some(TrackKind::Ideogram),
            "highlight" => Some(TrackKind::Highlight),
            "line" => Some(TrackKind::Line),
            "scatter" => Some(TrackKind::Scatter),
            "histogram" => Some(TrackKind::Histogram),
            "heatmap" | "heatmaps" => Some(TrackKind::Heatmap),
            "tile" => Some(TrackKind::Tile),
            "chord" => Some(TrackKind::Chord),
            "others" => Some(TrackKind::Others),
            _ => None,
        }
    }
}

impl fmt::Display for TrackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for TrackKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for TrackKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        TrackKind::from_name(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown track kind `{s}`")))
    }
}

/// Structural terminators of the language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StructuralKind {
    Start,
    Split,
    End,
}

impl StructuralKind {
    pub fn name(self) -> &'static str {
        match self {
            StructuralKind::Start => "start",
            StructuralKind::Split => "split",
            StructuralKind::End => "end",
        }
    }
}

/// Any single token of the language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Start,
    Split,
    End,
    Track(TrackKind),
}

impl Token {
    pub fn name(self) -> &'static str {
        match self {
            Token::Start => StructuralKind::Start.name(),
            Token::Split => StructuralKind::Split.name(),
            Token::End => StructuralKind::End.name(),
            Token::Track(kind) => kind.name(),
        }
    }

    /// Resolves a token name, case-insensitively. `circos_end` is an alias
    /// of `end` and `heatmaps` of `heatmap`.
    pub fn from_name(name: &str) -> Option<Token> {
        match name.to_ascii_lowercase().as_str() {
            "start" => Some(Token::Start),
            "split" => Some(Token::Split),
            "end" | "circos_end" => Some(Token::End),
            other => TrackKind::from_name(other).map(Token::Track),
        }
    }

    /// Every canonical token, structural ones first.
    pub fn vocabulary() -> Vec<Token> {
        let mut out = vec![Token::Start, Token::Split, Token::End];
        out.extend(TrackKind::ALL.iter().copied().map(Token::Track));
        out
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown token `{0}` at byte {1}")]
    UnknownToken(String, usize),
    #[error("empty ring at byte {0}")]
    EmptyRing(usize),
    #[error("misplaced <{token}> at byte {offset}")]
    MisplacedStructural { token: &'static str, offset: usize },
    #[error("unexpected character {ch:?} at byte {offset}")]
    UnexpectedChar { ch: char, offset: usize },
    #[error("unterminated token starting at byte {0}")]
    UnterminatedToken(usize),
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match *self {
            ParseError::UnknownToken(_, o)
            | ParseError::EmptyRing(o)
            | ParseError::MisplacedStructural { offset: o, .. }
            | ParseError::UnexpectedChar { offset: o, .. }
            | ParseError::UnterminatedToken(o) => o,
        }
    }

    /// Stable machine-readable name of the error variant.
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::UnknownToken(..) => "unknown_token",
            ParseError::EmptyRing(_) => "empty_ring",
            ParseError::MisplacedStructural { .. } => "misplaced_structural",
            ParseError::UnexpectedChar { .. } => "unexpected_char",
            ParseError::UnterminatedToken(_) => "unterminated_token",
        }
    }
}

/// A non-empty group of tracks sharing one radial band.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ring {
    tracks: Vec<TrackKind>,
}

impl Ring {
    /// Returns `None` for an empty track list.
    pub fn new(tracks: Vec<TrackKind>) -> Option<Ring> {
        if tracks.is_empty() {
            None
        } else {
            Some(Ring { tracks })
        }
    }

    pub fn single(kind: TrackKind) -> Ring {
        Ring { tracks: vec![kind] }
    }

    pub fn tracks(&self) -> &[TrackKind] {
        &self.tracks
    }

    /// A ring with two or more tracks overlays them in one band.
    pub fn is_synthesized(&self) -> bool {
        self.tracks.len() >= 2
    }

    pub fn contains(&self, kind: TrackKind) -> bool {
        self.tracks.contains(&kind)
    }
}

/// Rings ordered outermost first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CircosConfig {
    rings: Vec<Ring>,
}

impl CircosConfig {
    pub fn new(rings: Vec<Ring>) -> CircosConfig {
        CircosConfig { rings }
    }

    /// The blank-session configuration.
    pub fn empty() -> CircosConfig {
        CircosConfig::default()
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    pub fn is_empty(&self) -> bool {
        self.rings.is_empty()
    }

    pub fn track_count(&self) -> usize {
        self.rings.iter().map(|r| r.tracks.len()).sum()
    }

    /// Every track with its (ring, position-in-ring) address, outermost first.
    pub fn tracks(&self) -> impl Iterator<Item = (TrackAddr, TrackKind)> + '_ {
        self.rings.iter().enumerate().flat_map(|(ring, r)| {
            r.tracks.iter().enumerate().map(move |(position, &kind)| (TrackAddr { ring, position }, kind))
        })
    }

    pub fn to_bare_string(&self) -> String {
        serialize(self, false)
    }

    pub fn to_wrapped_string(&self) -> String {
        serialize(self, true)
    }

    pub fn to_sequence(&self) -> TokenSequence {
        to_sequence(self)
    }

    /// `<start>`, the flattened sequence, then `<end>`.
    pub fn wrapped_tokens(&self) -> Vec<Token> {
        let mut out = Vec::with_capacity(self.track_count() + self.rings.len() + 1);
        out.push(Token::Start);
        out.extend(to_sequence(self).tokens);
        out.push(Token::End);
        out
    }
}

/// Address of one track inside a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrackAddr {
    pub ring: usize,
    pub position: usize,
}

impl fmt::Display for TrackAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.ring, self.position)
    }
}

impl fmt::Display for CircosConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self, false))
    }
}

impl FromStr for CircosConfig {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

// Stored form is the wrapped string.
impl Serialize for CircosConfig {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_wrapped_string())
    }
}

impl<'de> Deserialize<'de> for CircosConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Flat track/split form of a configuration, without `<start>`/`<end>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TokenSequence {
    tokens: Vec<Token>,
}

impl TokenSequence {
    pub fn as_slice(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn into_tokens(self) -> Vec<Token> {
        self.tokens
    }
}

impl From<Vec<Token>> for TokenSequence {
    fn from(tokens: Vec<Token>) -> Self {
        TokenSequence { tokens }
    }
}

/// Lexes `<name>` tokens, recording the byte offset of each `<`.
fn lex(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if b != b'<' {
            let ch = text[i..].chars().next().unwrap_or('\u{fffd}');
            return Err(ParseError::UnexpectedChar { ch, offset: i });
        }
        let close = match text[i + 1..].find(['>', '<']) {
            Some(rel) if bytes[i + 1 + rel] == b'>' => i + 1 + rel,
            _ => return Err(ParseError::UnterminatedToken(i)),
        };
        let name = text[i + 1..close].trim();
        match Token::from_name(name) {
            Some(tok) => out.push((tok, i)),
            None => return Err(ParseError::UnknownToken(name.to_string(), i)),
        }
        i = close + 1;
    }
    Ok(out)
}

/// Parses a token string in wrapped or bare form.
pub fn parse(text: &str) -> Result<CircosConfig, ParseError> {
    let mut tokens = lex(text)?;

    if let Some(&(Token::Start, _)) = tokens.first() {
        match tokens.last() {
            Some(&(Token::End, _)) if tokens.len() >= 2 => {
                tokens.pop();
                tokens.remove(0);
            }
            _ => return Err(ParseError::MisplacedStructural { token: "end", offset: text.len() }),
        }
    }

    let mut rings = Vec::new();
    let mut current = Vec::new();
    let mut last_split = None;
    for &(tok, offset) in &tokens {
        match tok {
            Token::Track(kind) => current.push(kind),
            Token::Split => {
                if current.is_empty() {
                    return Err(ParseError::EmptyRing(offset));
                }
                rings.push(Ring { tracks: std::mem::take(&mut current) });
                last_split = Some(offset);
            }
            Token::Start | Token::End => return Err(ParseError::MisplacedStructural { token: tok.name(), offset }),
        }
    }
    if current.is_empty() {
        if let Some(offset) = last_split {
            return Err(ParseError::EmptyRing(offset));
        }
    } else {
        rings.push(Ring { tracks: current });
    }
    Ok(CircosConfig { rings })
}

/// Emits the canonical lowercase token string.
pub fn serialize(config: &CircosConfig, wrapped: bool) -> String {
    let mut out = String::new();
    if wrapped {
        out.push_str("<start>");
    }
    for (i, ring) in config.rings.iter().enumerate() {
        if i > 0 {
            out.push_str("<split>");
        }
        for kind in &ring.tracks {
            out.push('<');
            out.push_str(kind.name());
            out.push('>');
        }
    }
    if wrapped {
        out.push_str("<end>");
    }
    out
}

pub fn to_sequence(config: &CircosConfig) -> TokenSequence {
    let mut tokens = Vec::new();
    for (i, ring) in config.rings.iter().enumerate() {
        if i > 0 {
            tokens.push(Token::Split);
        }
        tokens.extend(ring.tracks.iter().copied().map(Token::Track));
    }
    TokenSequence { tokens }
}

/// Inverse of [`to_sequence`]. Offsets in errors are token indices.
pub fn from_sequence(seq: &[Token]) -> Result<CircosConfig, ParseError> {
    let mut rings = Vec::new();
    let mut current = Vec::new();
    for (i, &tok) in seq.iter().enumerate() {
        match tok {
            Token::Track(kind) => current.push(kind),
            Token::Split => {
                if current.is_empty() {
                    return Err(ParseError::EmptyRing(i));
                }
                rings.push(Ring { tracks: std::mem::take(&mut current) });
            }
            Token::Start | Token::End => return Err(ParseError::MisplacedStructural { token: tok.name(), offset: i }),
        }
    }
    if current.is_empty() {
        if !seq.is_empty() {
            return Err(ParseError::EmptyRing(seq.len() - 1));
        }
    } else {
        rings.push(Ring { tracks: current });
    }
    Ok(CircosConfig { rings })
}
