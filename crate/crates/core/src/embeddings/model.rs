use std::fmt;
use std::str::FromStr;

use super::config::{TrainConfig, TrainMode};
use super::subword::SubwordIndex;
use crate::error::{Error, Result};
use crate::vocab::Vocabulary;
use crate::Metadata;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Dot,
    Cosine,
}

impl Metric {
    pub fn apply(self, a: &[f32], b: &[f32]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum();
        match self {
            Metric::Dot => dot,
            Metric::Cosine => {
                let na = a.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
                let nb = b.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
                if na == 0.0 || nb == 0.0 {
                    0.0
                } else {
                    dot / (na * nb)
                }
            }
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Dot => "dot",
            Metric::Cosine => "cosine",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(Metric::Dot),
            "cosine" => Ok(Metric::Cosine),
            _ => Err(Error::Config(format!("unknown metric `{}`", s))),
        }
    }
}

/// Trained skip-gram vectors.
///
/// The input table holds one row per vocabulary word, followed in subword
/// mode by `buckets` n-gram rows. The output table holds one row per word.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    pub(crate) config: TrainConfig,
    pub(crate) vocab: Vocabulary,
    pub(crate) input: Vec<f32>,
    pub(crate) output: Vec<f32>,
    // Input-table rows of each word's n-grams (subword mode only).
    pub(crate) subwords: Vec<Vec<u32>>,
    pub metadata: Metadata,
}

impl EmbeddingModel {
    pub(crate) fn from_parts(
        config: TrainConfig,
        vocab: Vocabulary,
        input: Vec<f32>,
        output: Vec<f32>,
        metadata: Metadata,
    ) -> Self {
        let subwords = match config.mode {
            TrainMode::Word => Vec::new(),
            TrainMode::Subword => {
                let index = subword_index(&config);
                vocab
                    .words()
                    .iter()
                    .map(|w| bucket_rows(&index, vocab.len(), w))
                    .collect()
            }
        };
        EmbeddingModel {
            config,
            vocab,
            input,
            output,
            subwords,
            metadata,
        }
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn mode(&self) -> TrainMode {
        self.config.mode
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    /// Raw input-table row (word row or n-gram bucket row).
    pub fn input_row(&self, row: usize) -> &[f32] {
        let d = self.config.dim;
        &self.input[row * d..(row + 1) * d]
    }

    pub fn output_row(&self, id: u32) -> &[f32] {
        let d = self.config.dim;
        &self.output[id as usize * d..(id as usize + 1) * d]
    }

    pub fn num_input_rows(&self) -> usize {
        self.input.len() / self.config.dim
    }

    /// Input-table rows of the n-grams of `word` (empty in word mode).
    pub fn subword_rows(&self, word: &str) -> Vec<u32> {
        match self.config.mode {
            TrainMode::Word => Vec::new(),
            TrainMode::Subword => match self.vocab.id(word) {
                Some(id) => self.subwords[id as usize].clone(),
                None => bucket_rows(&subword_index(&self.config), self.vocab.len(), word),
            },
        }
    }

    fn mean_of_rows(&self, rows: impl Iterator<Item = usize>) -> Option<Vec<f32>> {
        let mut acc = vec![0f32; self.config.dim];
        let mut n = 0usize;
        for r in rows {
            for (a, x) in acc.iter_mut().zip(self.input_row(r)) {
                *a += x;
            }
            n += 1;
        }
        if n == 0 {
            return None;
        }
        let scale = n as f32;
        acc.iter_mut().for_each(|a| *a /= scale);
        Some(acc)
    }

    /// Vector of `word`.
    ///
    /// In word mode only in-vocabulary words have vectors. In subword mode
    /// an in-vocabulary word is the mean of its own row and its n-gram rows;
    /// an unknown word is the mean of its n-gram rows alone, which is absent
    /// only when no n-gram fits `minn`.
    pub fn vector(&self, word: &str) -> Result<Option<Vec<f32>>> {
        if word.is_empty() {
            return Err(Error::EmptyWord);
        }
        let id = self.vocab.id(word);
        Ok(match (self.config.mode, id) {
            (TrainMode::Word, Some(id)) => Some(self.input_row(id as usize).to_vec()),
            (TrainMode::Word, None) => None,
            (TrainMode::Subword, Some(id)) => self.mean_of_rows(
                std::iter::once(id as usize)
                    .chain(self.subwords[id as usize].iter().map(|&r| r as usize)),
            ),
            (TrainMode::Subword, None) => {
                self.mean_of_rows(self.subword_rows(word).into_iter().map(|r| r as usize))
            }
        })
    }

    /// `metric(vector(a), vector(b))`, absent when either vector is.
    pub fn similarity(&self, a: &str, b: &str, metric: Metric) -> Option<f64> {
        let va = self.vector(a).ok()??;
        let vb = self.vector(b).ok()??;
        Some(metric.apply(&va, &vb))
    }

    /// Vocabulary word for `name`: exact match, else the most frequent
    /// case-insensitive match.
    pub fn resolve(&self, name: &str) -> Option<&str> {
        if let Some(id) = self.vocab.id(name) {
            return Some(self.vocab.word(id));
        }
        let lower = name.to_lowercase();
        // Ids are ordered by descending count, so the first hit wins.
        self.vocab
            .words()
            .iter()
            .find(|w| w.to_lowercase() == lower)
            .map(String::as_str)
    }
}

pub(crate) fn subword_index(config: &TrainConfig) -> SubwordIndex {
    SubwordIndex::new(config.minn, config.maxn, config.buckets)
}

pub(crate) fn bucket_rows(index: &SubwordIndex, vocab_len: usize, word: &str) -> Vec<u32> {
    index
        .buckets(word)
        .into_iter()
        .map(|b| (vocab_len as u64 + b) as u32)
        .collect()
}
