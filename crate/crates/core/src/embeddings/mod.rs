//! Skip-gram negative-sampling embeddings, word-level and subword.

mod config;
mod hogwild;
pub mod io;
mod model;
pub mod sgns;
pub mod subword;
pub mod train;

pub use config::{TrainConfig, TrainMode};
pub use io::TextEmbeddings;
pub use model::{EmbeddingModel, Metric};
pub use sgns::{sgns_loss_and_grads, SgnsGrads};
pub use subword::{extract_ngrams, fnv1a_32, hash_ngram, SubwordIndex};
pub use train::{train, train_streaming, train_with_stats, IdCorpus, TrainStats};
