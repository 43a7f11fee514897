//! Skip-gram negative-sampling trainer.
//!
//! Each worker thread walks a contiguous shard of the corpus for every
//! epoch. Per sentence, frequent tokens are first subsampled; then for each
//! surviving center token a half-width `b` is drawn from `1..=window` and
//! every token within `b` positions becomes a positive context, paired with
//! `negatives` noise tokens from the unigram^0.75 table (a draw equal to the
//! context is redrawn). The learning rate decays linearly from `initial_lr`
//! to `final_lr` over `epochs * tokens` processed tokens.
//!
//! In subword mode the center representation is the mean of the word row
//! and its n-gram rows, and the center gradient is added to each of those
//! rows.
//!
//! With `threads == 1` training is fully deterministic for a given seed.
//! With more threads the tables are updated without locks and results vary
//! between runs.

use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{TrainConfig, TrainMode};
use super::hogwild::HogwildTable;
use super::model::EmbeddingModel;
use super::sgns::{dot_f32, step_coefficient, target_loss};
use crate::error::{Error, Result};
use crate::vocab::{build_negative_table, SamplingDistribution, VocabBuilder, Vocabulary, DEFAULT_NEGATIVE_POWER};
use crate::Metadata;

const MAX_NEGATIVE_REDRAWS: usize = 64;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainStats {
    /// Mean loss per positive pair (including its negatives), per epoch.
    pub epoch_losses: Vec<f64>,
    /// In-vocabulary tokens in the training corpus.
    pub tokens: u64,
    pub sentences: usize,
}

/// Corpus as vocabulary ids, sentences stored back to back.
#[derive(Clone, Debug, Default)]
pub struct IdCorpus {
    tokens: Vec<u32>,
    offsets: Vec<usize>,
}

impl IdCorpus {
    /// Map sentences onto `vocab`, dropping unknown tokens and sentences
    /// left empty.
    pub fn from_sentences<I, S>(vocab: &Vocabulary, sentences: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[String]>,
    {
        let mut corpus = IdCorpus {
            tokens: Vec::new(),
            offsets: vec![0],
        };
        for s in sentences {
            let before = corpus.tokens.len();
            corpus
                .tokens
                .extend(s.as_ref().iter().filter_map(|t| vocab.id(t)));
            if corpus.tokens.len() > before {
                corpus.offsets.push(corpus.tokens.len());
            }
        }
        corpus
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_tokens(&self) -> usize {
        self.tokens.len()
    }

    pub fn sentence(&self, i: usize) -> &[u32] {
        &self.tokens[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// Train on an in-memory corpus.
pub fn train<S: AsRef<[String]>>(sentences: &[S], config: &TrainConfig) -> Result<EmbeddingModel> {
    train_with_stats(sentences, config).map(|(m, _)| m)
}

pub fn train_with_stats<S: AsRef<[String]>>(
    sentences: &[S],
    config: &TrainConfig,
) -> Result<(EmbeddingModel, TrainStats)> {
    config.validate()?;
    let vocab = Vocabulary::build(sentences, config.min_count)?;
    let corpus = IdCorpus::from_sentences(&vocab, sentences);
    train_prepared(vocab, &corpus, config)
}

/// Train from a corpus that can be streamed twice: once to count the
/// vocabulary, once to map it to ids.
pub fn train_streaming<F, I, S>(mut corpus: F, config: &TrainConfig) -> Result<(EmbeddingModel, TrainStats)>
where
    F: FnMut() -> Result<I>,
    I: IntoIterator<Item = S>,
    S: AsRef<[String]>,
{
    config.validate()?;
    let mut builder = VocabBuilder::new();
    for s in corpus()? {
        builder.add_sentence(s.as_ref());
    }
    let vocab = builder.build(config.min_count)?;
    let ids = IdCorpus::from_sentences(&vocab, corpus()?);
    train_prepared(vocab, &ids, config)
}

/// Input rows uniform in `[-0.5/dim, 0.5/dim)`, output rows zero.
fn initial_tables(config: &TrainConfig, vocab_len: usize) -> (Vec<f32>, Vec<f32>) {
    let rows = match config.mode {
        TrainMode::Word => vocab_len,
        TrainMode::Subword => vocab_len + config.buckets as usize,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scale = config.dim as f32;
    let input = (0..rows * config.dim)
        .map(|_| (rng.random::<f32>() - 0.5) / scale)
        .collect();
    (input, vec![0.0; vocab_len * config.dim])
}

fn worker_seed(seed: u64, worker: usize) -> u64 {
    seed ^ (worker as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

struct Shared<'a> {
    config: &'a TrainConfig,
    corpus: &'a IdCorpus,
    input: HogwildTable,
    output: HogwildTable,
    negatives: SamplingDistribution,
    keep: Vec<f32>,
    subwords: &'a [Vec<u32>],
    progress: AtomicU64,
    total_work: u64,
}

impl Shared<'_> {
    fn learning_rate(&self, done: u64) -> f32 {
        let c = self.config;
        if self.total_work == 0 {
            return c.initial_lr;
        }
        let frac = (done as f64 / self.total_work as f64).min(1.0) as f32;
        (c.initial_lr - (c.initial_lr - c.final_lr) * frac).max(c.final_lr)
    }

    /// One SGD step on a single target; returns its loss.
    fn update_target(&self, target: u32, positive: bool, h: &[f32], lr: f32, grad: &mut [f32], u: &mut [f32]) -> f64 {
        self.output.read_row(target as usize, u);
        let f = dot_f32(h, u);
        let g = step_coefficient(f, positive, lr);
        for (gr, x) in grad.iter_mut().zip(u.iter()) {
            *gr += g * x;
        }
        self.output.add_scaled(target as usize, g, h);
        target_loss(f, positive)
    }

    fn run_worker(&self, shard: Range<usize>, worker: usize) -> Vec<(f64, u64)> {
        let c = self.config;
        let dim = c.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(worker_seed(c.seed, worker));
        let mut h = vec![0f32; dim];
        let mut row_buf = vec![0f32; dim];
        let mut u = vec![0f32; dim];
        let mut grad = vec![0f32; dim];
        let mut kept: Vec<u32> = Vec::new();
        let mut rows: Vec<u32> = Vec::new();
        let mut per_epoch = Vec::with_capacity(c.epochs);

        for _ in 0..c.epochs {
            let (mut loss, mut pairs) = (0f64, 0u64);
            for s in shard.clone() {
                let sentence = self.corpus.sentence(s);
                let done = self.progress.fetch_add(sentence.len() as u64, Ordering::Relaxed);
                let lr = self.learning_rate(done);

                kept.clear();
                for &id in sentence {
                    let p = self.keep[id as usize];
                    if p >= 1.0 || rng.random::<f32>() < p {
                        kept.push(id);
                    }
                }

                for pos in 0..kept.len() {
                    let center = kept[pos];
                    let b = rng.random_range(1..=c.window);
                    let lo = pos.saturating_sub(b);
                    let hi = (pos + b).min(kept.len() - 1);

                    rows.clear();
                    rows.push(center);
                    if c.mode == TrainMode::Subword {
                        rows.extend_from_slice(&self.subwords[center as usize]);
                    }
                    let inv = 1.0 / rows.len() as f32;

                    for (cpos, &context) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                        if cpos == pos {
                            continue;
                        }
                        h.fill(0.0);
                        for &r in &rows {
                            self.input.read_row(r as usize, &mut row_buf);
                            h.iter_mut().zip(&row_buf).for_each(|(a, x)| *a += x);
                        }
                        h.iter_mut().for_each(|a| *a *= inv);

                        grad.fill(0.0);
                        loss += self.update_target(context, true, &h, lr, &mut grad, &mut u);
                        for _ in 0..c.negatives {
                            let neg = (0..MAX_NEGATIVE_REDRAWS)
                                .map(|_| self.negatives.sample(&mut rng))
                                .find(|&n| n != context);
                            if let Some(neg) = neg {
                                loss += self.update_target(neg, false, &h, lr, &mut grad, &mut u);
                            }
                        }
                        for &r in &rows {
                            self.input.add_scaled(r as usize, 1.0, &grad);
                        }
                        pairs += 1;
                    }
                }
            }
            per_epoch.push((loss, pairs));
        }
        per_epoch
    }
}

/// Train on a corpus already mapped onto `vocab`.
pub fn train_prepared(
    vocab: Vocabulary,
    corpus: &IdCorpus,
    config: &TrainConfig,
) -> Result<(EmbeddingModel, TrainStats)> {
    config.validate()?;
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let (input, output) = initial_tables(config, vocab.len());
    // Builds the n-gram row lists alongside the initial tables.
    let initial = EmbeddingModel::from_parts(config.clone(), vocab, input, output, Metadata::new());

    let EmbeddingModel {
        config: model_config,
        vocab,
        input,
        output,
        subwords,
        metadata,
    } = initial;

    let shared = Shared {
        config,
        corpus,
        input: HogwildTable::new(input, config.dim),
        output: HogwildTable::new(output, config.dim),
        negatives: build_negative_table(&vocab, DEFAULT_NEGATIVE_POWER)?,
        keep: vocab
            .keep_probabilities(config.sample_t)
            .into_iter()
            .map(|p| p as f32)
            .collect(),
        subwords: &subwords,
        progress: AtomicU64::new(0),
        total_work: config.epochs as u64 * corpus.num_tokens() as u64,
    };

    let n = corpus.len();
    let threads = config.threads.min(n.max(1));
    let results: Vec<Vec<(f64, u64)>> = if threads == 1 {
        vec![shared.run_worker(0..n, 0)]
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let shard = (t * n / threads)..((t + 1) * n / threads);
                    let shared = &shared;
                    scope.spawn(move || shared.run_worker(shard, t))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training thread panicked"))
                .collect()
        })
    };

    let epoch_losses = (0..config.epochs)
        .map(|e| {
            let (loss, pairs) = results
                .iter()
                .map(|r| r[e])
                .fold((0.0, 0u64), |(l, p), (l2, p2)| (l + l2, p + p2));
            if pairs == 0 {
                0.0
            } else {
                loss / pairs as f64
            }
        })
        .collect();

    let Shared { input, output, .. } = shared;
    let model = EmbeddingModel {
        config: model_config,
        vocab,
        input: input.into_vec(),
        output: output.into_vec(),
        subwords,
        metadata,
    };
    let stats = TrainStats {
        epoch_losses,
        tokens: corpus.num_tokens() as u64,
        sentences: corpus.len(),
    };
    Ok((model, stats))
}
