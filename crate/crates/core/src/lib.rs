//! Mining adjectival properties of named entities from text.
//!
//! Candidate properties are extracted from short entity descriptions and
//! ranked by four interchangeable scorers:
//!
//! * TF-IDF over the description corpus ([`properties`]),
//! * signed simple log-likelihood over story-corpus co-occurrences
//!   ([`relatedness`]),
//! * word-level skip-gram embeddings and
//! * subword (character n-gram) skip-gram embeddings ([`embeddings`]).
//!
//! Top-ranked lists can then be expanded through a property–noun
//! association resource ([`expansion`]). The [`pipeline`] module wires the
//! stages together with an on-disk cache between them.

pub mod corpus;
pub mod embeddings;
mod error;
mod meta;
pub mod expansion;
pub mod fixture;
pub mod pipeline;
pub mod properties;
pub mod ranker;
pub mod relatedness;
pub mod vocab;

pub use corpus::{Document, DocumentKind, Sentence};
pub use embeddings::{EmbeddingModel, Metric, TrainConfig, TrainMode};
pub use error::{Error, Result};
pub use expansion::{AssociationResource, Expansion, ExpansionStatus};
pub use properties::{AdjectiveLexicon, EntityProperties, TfIdfModel};
pub use ranker::{ModelTag, RankStatus, RankedProperties, Scorer};
pub use relatedness::{CoocMode, CoocModel};
pub use vocab::{SamplingDistribution, Vocabulary};

/// Free-form run metadata embedded in model files (config hash, seed,
/// corpus statistics). Keys and values must not contain tabs or newlines.
pub type Metadata = std::collections::BTreeMap<String, String>;
