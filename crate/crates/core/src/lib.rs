//! Circos plot authoring: the configuration token language, corpus analytics,
//! similarity retrieval, the merged reference DAG, recommendation and SVG
//! rendering.

pub mod analysis;
pub mod config;
pub mod corpus;
pub mod dag;
pub mod recommend;
pub mod render;
pub mod retrieval;

pub use analysis::{ConditionalMatrix, CorpusDistributions, RingClass};
pub use config::{parse, serialize, CircosConfig, ParseError, Ring, Token, TrackAddr, TrackKind};
pub use corpus::{Corpus, CorpusError, CorpusRecord, ImportReport};
pub use dag::{DagError, DagExport, DagLayout, EdgeClass, ReferenceDag};
pub use recommend::{
    GenerationProvider, HttpGenerator, MockProvider, PromptBundle, RecommendError, Recommendation, Recommender,
};
pub use render::{render_hash, render_svg, Dataset, DatasetData, DatasetKind, PlotSession, RenderError, TrackBinding};
pub use retrieval::{
    EmbeddingProvider, EmbeddingVector, HashingEmbedder, HttpEmbedder, RetrievalError, RetrievalHit, VectorIndex,
};
