//! Plot geometry: angular axis, radial bands, tile lanes and value scaling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{CircosConfig, TrackKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LayoutError {
    #[error("karyotype has no blocks")]
    EmptyKaryotype,
    #[error("gaps of {gap}° between {blocks} blocks leave no room for data")]
    GapTooLarge { gap: f64, blocks: usize },
    #[error("{rings} rings leave bands thinner than {min_px} px")]
    TooManyRings { rings: usize, min_px: f64 },
    #[error("invalid canvas: {0}")]
    InvalidCanvas(String),
}

/// Minimum usable band thickness.
pub const MIN_BAND_PX: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: f64,
    pub height: f64,
    pub gap_degrees: f64,
    pub outer_radius_fraction: f64,
    pub chord_reserve_fraction: f64,
    /// Share of each band left empty on its inner side.
    pub ring_padding_fraction: f64,
    pub marker_radius: f64,
    /// Bézier control points sit at this fraction of the chord radius.
    pub bezier_control_factor: f64,
}

impl Default for Canvas {
    fn default() -> Self {
        Canvas {
            width: 800.0,
            height: 800.0,
            gap_degrees: 2.0,
            outer_radius_fraction: 0.45,
            chord_reserve_fraction: 0.30,
            ring_padding_fraction: 0.10,
            marker_radius: 2.0,
            bezier_control_factor: 0.2,
        }
    }
}

impl Canvas {
    pub fn min_dimension(&self) -> f64 {
        self.width.min(self.height)
    }

    pub fn center(&self) -> (f64, f64) {
        (self.width / 2.0, self.height / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSpan {
    pub id: String,
    pub length: u64,
    pub start_deg: f64,
    pub end_deg: f64,
}

impl BlockSpan {
    pub fn span(&self) -> f64 {
        self.end_deg - self.start_deg
    }

    /// Angle of a base-pair position, clockwise from 12 o'clock.
    pub fn angle(&self, position: f64) -> f64 {
        self.start_deg + self.span() * (position / self.length as f64)
    }
}

/// Block angles laid out clockwise from 12 o'clock, one gap after each.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngularScale {
    pub blocks: Vec<BlockSpan>,
    pub gap_degrees: f64,
}

impl AngularScale {
    pub fn block(&self, id: &str) -> Option<&BlockSpan> {
        self.blocks.iter().find(|b| b.id == id)
    }

    pub fn angle(&self, block: &str, position: f64) -> Option<f64> {
        self.block(block).map(|b| b.angle(position))
    }

    pub fn total_degrees(&self) -> f64 {
        self.blocks.iter().map(|b| b.span()).sum::<f64>() + self.gap_degrees * self.blocks.len() as f64
    }
}

/// `span_i = (360 - gap * K) * L_i / sum(L)`.
pub fn angular_scale<'a, I>(blocks: I, gap_degrees: f64) -> Result<AngularScale, LayoutError>
where
    I: IntoIterator<Item = (&'a str, u64)>,
{
    let blocks: Vec<(&str, u64)> = blocks.into_iter().collect();
    if blocks.is_empty() {
        return Err(LayoutError::EmptyKaryotype);
    }
    let k = blocks.len() as f64;
    if gap_degrees < 0.0 || gap_degrees * k >= 360.0 {
        return Err(LayoutError::GapTooLarge { gap: gap_degrees, blocks: blocks.len() });
    }
    let total: f64 = blocks.iter().map(|&(_, l)| l as f64).sum();
    let available = 360.0 - gap_degrees * k;
    let mut at = 0.0;
    let mut out = Vec::with_capacity(blocks.len());
    for (id, length) in blocks {
        let span = available * length as f64 / total;
        out.push(BlockSpan { id: id.to_string(), length, start_deg: at, end_deg: at + span });
        at += span + gap_degrees;
    }
    Ok(AngularScale { blocks: out, gap_degrees })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub inner: f64,
    pub outer: f64,
}

impl Band {
    pub fn thickness(&self) -> f64 {
        self.outer - self.inner
    }
}

/// Radii of every ring. Rings without a chord split the annulus between
/// the outer radius and the chord reserve evenly, outermost first, each
/// leaving its padding share empty on the inner side. Rings holding a chord
/// take the central disc.
pub fn radial_bands(config: &CircosConfig, canvas: &Canvas) -> Result<Vec<Band>, LayoutError> {
    let min = canvas.min_dimension();
    let outer = canvas.outer_radius_fraction * min;
    let reserve = canvas.chord_reserve_fraction * min;
    if !(min > 0.0 && outer > reserve && reserve >= 0.0) {
        return Err(LayoutError::InvalidCanvas(format!("outer radius {outer} must exceed chord reserve {reserve}")));
    }
    let is_chord = |i: usize| config.rings()[i].contains(TrackKind::Chord);
    let stacked = (0..config.rings().len()).filter(|&i| !is_chord(i)).count();
    let thickness = if stacked > 0 { (outer - reserve) / stacked as f64 } else { 0.0 };
    let usable = thickness * (1.0 - canvas.ring_padding_fraction);
    if stacked > 0 && usable < MIN_BAND_PX {
        return Err(LayoutError::TooManyRings { rings: config.rings().len(), min_px: MIN_BAND_PX });
    }
    let mut slot = 0;
    Ok((0..config.rings().len())
        .map(|i| {
            if is_chord(i) {
                Band { inner: 0.0, outer: reserve }
            } else {
                let top = outer - thickness * slot as f64;
                slot += 1;
                Band { inner: top - usable, outer: top }
            }
        })
        .collect())
}

/// Greedy first-fit lane assignment. Intervals are visited by
/// `(group, start)` and go to the first lane of their group whose last
/// interval ends strictly before they start. Returns one lane per input,
/// in input order.
pub fn pack_lanes<G: Ord>(intervals: &[(G, u64, u64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..intervals.len()).collect();
    order.sort_by(|&a, &b| intervals[a].0.cmp(&intervals[b].0).then(intervals[a].1.cmp(&intervals[b].1)));
    let mut lanes = vec![0; intervals.len()];
    let mut lane_ends: Vec<u64> = Vec::new();
    let mut group: Option<&G> = None;
    for i in order {
        let (g, start, end) = &intervals[i];
        if group != Some(g) {
            lane_ends.clear();
            group = Some(g);
        }
        let lane = match lane_ends.iter().position(|&e| e < *start) {
            Some(l) => l,
            None => {
                lane_ends.push(0);
                lane_ends.len() - 1
            }
        };
        lane_ends[lane] = *end;
        lanes[i] = lane;
    }
    lanes
}

/// Value domain of a track: `"auto"` or `[min, max]` in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "DomainRepr", into = "DomainRepr")]
pub enum Domain {
    #[default]
    Auto,
    Fixed(f64, f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DomainRepr {
    Tag(String),
    Range(f64, f64),
}

impl TryFrom<DomainRepr> for Domain {
    type Error = String;

    fn try_from(r: DomainRepr) -> Result<Self, Self::Error> {
        match r {
            DomainRepr::Tag(t) if t == "auto" => Ok(Domain::Auto),
            DomainRepr::Tag(t) => Err(format!("unknown domain `{t}`")),
            DomainRepr::Range(a, b) => Ok(Domain::Fixed(a, b)),
        }
    }
}

impl From<Domain> for DomainRepr {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Auto => DomainRepr::Tag("auto".into()),
            Domain::Fixed(a, b) => DomainRepr::Range(a, b),
        }
    }
}

/// Maps values onto [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizer {
    min: f64,
    max: f64,
}

impl Normalizer {
    pub fn new(domain: Domain, values: &[f64]) -> Normalizer {
        match domain {
            Domain::Fixed(min, max) => Normalizer { min, max },
            Domain::Auto => {
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if min.is_finite() {
                    Normalizer { min, max }
                } else {
                    Normalizer { min: 0.0, max: 0.0 }
                }
            }
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.min, self.max)
    }

    /// Clamped into [0, 1]; a degenerate domain maps everything to 0.5.
    pub fn apply(&self, v: f64) -> f64 {
        if self.max <= self.min {
            return 0.5;
        }
        ((v - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
    }
}
