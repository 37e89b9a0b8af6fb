//! Plot sessions and their SVG rendering.
//!
//! A [`PlotSession`] holds a configuration, uploaded datasets, and one
//! [`TrackBinding`] per track tying it to a dataset and a style.

pub mod data;
pub mod layout;
pub mod svg;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{CircosConfig, TrackAddr, TrackKind};

pub use data::{DataError, Dataset, DatasetData, DatasetKind};
pub use layout::{Canvas, Domain, LayoutError};
pub use svg::{render_hash, render_svg};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("no track at {0}")]
    NoSuchTrack(TrackAddr),
    #[error("dataset `{dataset}` ({kind}) cannot feed a {track} track")]
    IncompatibleDataset { dataset: String, kind: DatasetKind, track: TrackKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    #[default]
    Out,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackStyle {
    /// Primary color first; heatmaps ramp from the first to the second.
    pub colors: Vec<String>,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default)]
    pub domain: Domain,
    pub opacity: f64,
}

impl TrackStyle {
    pub fn default_for(kind: TrackKind) -> TrackStyle {
        let (colors, opacity): (&[&str], f64) = match kind {
            TrackKind::Ideogram => (&["#9e9e9e"], 1.0),
            TrackKind::Highlight => (&["#e15759"], 0.7),
            TrackKind::Line => (&["#4e79a7"], 1.0),
            TrackKind::Scatter => (&["#f28e2b"], 1.0),
            TrackKind::Histogram => (&["#59a14f"], 1.0),
            TrackKind::Heatmap => (&["#fff5eb", "#d94801"], 1.0),
            TrackKind::Tile => (&["#76b7b2"], 1.0),
            TrackKind::Chord => (&["#b07aa1"], 0.6),
            TrackKind::Others => (&["#bab0ac"], 0.5),
        };
        TrackStyle {
            colors: colors.iter().map(|c| c.to_string()).collect(),
            direction: Direction::Out,
            domain: Domain::Auto,
            opacity,
        }
    }

    pub fn primary(&self) -> &str {
        self.colors.first().map(String::as_str).unwrap_or("#000000")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrackBinding {
    pub track: TrackAddr,
    pub kind: TrackKind,
    pub dataset_id: String,
    pub style: TrackStyle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
pub enum BindWarning {
    #[error("no {} dataset for {kind} track {track}", DatasetKind::for_track(*kind))]
    NoCompatibleDataset { track: TrackAddr, kind: TrackKind },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSession {
    pub id: String,
    pub config: CircosConfig,
    /// Insertion order.
    pub datasets: Vec<Dataset>,
    pub bindings: Vec<TrackBinding>,
    #[serde(default)]
    pub canvas: Canvas,
    #[serde(default)]
    next_dataset: u64,
}

impl PlotSession {
    pub fn new(id: impl Into<String>) -> PlotSession {
        PlotSession {
            id: id.into(),
            config: CircosConfig::empty(),
            datasets: Vec::new(),
            bindings: Vec::new(),
            canvas: Canvas::default(),
            next_dataset: 0,
        }
    }

    pub fn dataset(&self, id: &str) -> Option<&Dataset> {
        self.datasets.iter().find(|d| d.id == id)
    }

    /// Karyotype blocks of every karyotype dataset, in insertion order.
    pub fn axis_blocks(&self) -> Vec<&data::KaryotypeBlock> {
        self.datasets
            .iter()
            .filter_map(|d| match &d.data {
                DatasetData::Karyotype(b) => Some(b.iter()),
                _ => None,
            })
            .flatten()
            .collect()
    }

    /// Validates `data` against the current axis and stores it. Returns the
    /// new dataset id. Attachment and link data need their karyotype first.
    pub fn add_dataset(&mut self, name: impl Into<String>, data: DatasetData) -> Result<String, DataError> {
        data::validate_against(&data, &self.axis_blocks())?;
        self.next_dataset += 1;
        let id = format!("ds{}", self.next_dataset);
        self.datasets.push(Dataset { id: id.clone(), name: name.into(), marker: None, data });
        Ok(id)
    }

    /// Drops the dataset and every binding to it.
    pub fn remove_dataset(&mut self, id: &str) -> Result<(), DataError> {
        let before = self.datasets.len();
        self.datasets.retain(|d| d.id != id);
        if self.datasets.len() == before {
            return Err(DataError::NotFound(id.to_string()));
        }
        self.bindings.retain(|b| b.dataset_id != id);
        Ok(())
    }

    pub fn binding(&self, track: TrackAddr) -> Option<&TrackBinding> {
        self.bindings.iter().find(|b| b.track == track)
    }

    /// Replaces the configuration. Bindings whose address still holds a
    /// track of the same kind survive; the rest are re-bound.
    pub fn set_config(&mut self, config: CircosConfig) -> Vec<BindWarning> {
        let kinds: Vec<(TrackAddr, TrackKind)> = config.tracks().collect();
        self.bindings.retain(|b| kinds.iter().any(|&(addr, kind)| addr == b.track && kind == b.kind));
        self.config = config;
        self.auto_bind()
    }

    /// Binds every unbound track. A track takes the first compatible
    /// dataset not yet used by any track, else the first compatible one.
    /// Its style is copied from the nearest bound track of the same kind,
    /// else the kind's default.
    pub fn auto_bind(&mut self) -> Vec<BindWarning> {
        let tracks: Vec<(TrackAddr, TrackKind)> = self.config.tracks().collect();
        let mut warnings = Vec::new();
        for (flat, &(addr, kind)) in tracks.iter().enumerate() {
            if self.binding(addr).is_some() {
                continue;
            }
            let wanted = DatasetKind::for_track(kind);
            let compatible: Vec<&Dataset> = self.datasets.iter().filter(|d| d.kind() == wanted).collect();
            let chosen = compatible
                .iter()
                .find(|d| !self.bindings.iter().any(|b| b.dataset_id == d.id))
                .or_else(|| compatible.first());
            let Some(dataset) = chosen else {
                warnings.push(BindWarning::NoCompatibleDataset { track: addr, kind });
                continue;
            };
            let style = self
                .bindings
                .iter()
                .filter(|b| b.kind == kind)
                .filter_map(|b| {
                    let pos = tracks.iter().position(|&(a, _)| a == b.track)?;
                    Some((pos.abs_diff(flat), pos, b))
                })
                .min_by_key(|&(dist, pos, _)| (dist, pos))
                .map(|(_, _, b)| b.style.clone())
                .unwrap_or_else(|| TrackStyle::default_for(kind));
            self.bindings.push(TrackBinding { track: addr, kind, dataset_id: dataset.id.clone(), style });
        }
        self.bindings.sort_by_key(|b| b.track);
        warnings
    }

    /// Rebinds one track and/or replaces its style.
    pub fn update_binding(
        &mut self,
        track: TrackAddr,
        dataset_id: Option<&str>,
        style: Option<TrackStyle>,
    ) -> Result<&TrackBinding, RenderError> {
        let kind =
            self.config.tracks().find(|&(a, _)| a == track).map(|(_, k)| k).ok_or(RenderError::NoSuchTrack(track))?;
        if let Some(id) = dataset_id {
            let ds = self.dataset(id).ok_or_else(|| DataError::NotFound(id.to_string()))?;
            if ds.kind() != DatasetKind::for_track(kind) {
                return Err(RenderError::IncompatibleDataset { dataset: id.to_string(), kind: ds.kind(), track: kind });
            }
        }
        let idx = match self.bindings.iter().position(|b| b.track == track) {
            Some(i) => i,
            None => {
                let id = dataset_id.ok_or_else(|| DataError::NotFound("(none)".into()))?;
                self.bindings.push(TrackBinding {
                    track,
                    kind,
                    dataset_id: id.to_string(),
                    style: TrackStyle::default_for(kind),
                });
                self.bindings.sort_by_key(|b| b.track);
                self.bindings.iter().position(|b| b.track == track).unwrap()
            }
        };
        let b = &mut self.bindings[idx];
        if let Some(id) = dataset_id {
            b.dataset_id = id.to_string();
        }
        if let Some(style) = style {
            b.style = style;
        }
        Ok(&self.bindings[idx])
    }
}
