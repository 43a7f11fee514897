//! Token vocabulary with subsampling and negative-sampling statistics.
//!
//! Ids are dense, assigned by descending frequency with lexicographic
//! tie-breaking, so the serialized form is stable across runs.
//!
//! Serialized layout (UTF-8):
//!
//! ```text
//! #total_tokens=N
//! token<TAB>count      (one line per entry, in id order)
//! ```

use std::collections::HashMap;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::error::{Error, Result};

/// Default word2vec-style minimum count.
pub const DEFAULT_MIN_COUNT: u64 = 5;
/// Default subsampling threshold.
pub const DEFAULT_SAMPLE_T: f64 = 1e-3;
/// Default exponent of the negative-sampling distribution.
pub const DEFAULT_NEGATIVE_POWER: f64 = 0.75;

/// Accumulates raw token counts. Builders over disjoint shards can be
/// merged in any order.
#[derive(Clone, Debug, Default)]
pub struct VocabBuilder {
    counts: HashMap<String, u64>,
    total: u64,
}

impl VocabBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sentence<S: AsRef<str>>(&mut self, tokens: &[S]) {
        for t in tokens {
            let t = t.as_ref();
            match self.counts.get_mut(t) {
                Some(c) => *c += 1,
                None => {
                    self.counts.insert(t.to_owned(), 1);
                }
            }
        }
        self.total += tokens.len() as u64;
    }

    pub fn merge(&mut self, other: VocabBuilder) {
        for (t, c) in other.counts {
            *self.counts.entry(t).or_insert(0) += c;
        }
        self.total += other.total;
    }

    pub fn build(self, min_count: u64) -> Result<Vocabulary> {
        if min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        let mut entries: Vec<(String, u64)> = self
            .counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .collect();
        entries.sort_by(|(wa, ca), (wb, cb)| cb.cmp(ca).then_with(|| wa.cmp(wb)));
        let (words, counts) = entries.into_iter().unzip();
        Ok(Vocabulary::from_parts(words, counts, self.total))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    total_tokens: u64,
}

impl Vocabulary {
    /// Count tokens over `sentences`, keeping those seen at least
    /// `min_count` times.
    pub fn build<I, S>(sentences: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[String]>,
    {
        let mut builder = VocabBuilder::new();
        for s in sentences {
            builder.add_sentence(s.as_ref());
        }
        builder.build(min_count)
    }

    fn from_parts(words: Vec<String>, counts: Vec<u64>, total_tokens: u64) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        Vocabulary {
            words,
            counts,
            index,
            total_tokens,
        }
    }

    /// Rebuild from `(token, count)` entries already in id order. Returns
    /// `None` if the order violates the id assignment rule.
    pub(crate) fn from_ordered(entries: Vec<(String, u64)>, total_tokens: u64) -> Option<Self> {
        let ordered = entries
            .windows(2)
            .all(|w| w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
        if !ordered {
            return None;
        }
        let (words, counts) = entries.into_iter().unzip();
        Some(Self::from_parts(words, counts, total_tokens))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Token total of the corpus before `min_count` filtering.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, token: &str) -> Option<u64> {
        self.id(token).map(|id| self.counts[id as usize])
    }

    pub fn count_of(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Probability of keeping an occurrence of `token` under subsampling
    /// threshold `t`.
    pub fn keep_probability(&self, token: &str, t: f64) -> Result<f64> {
        let count = self
            .count(token)
            .ok_or_else(|| Error::UnknownToken(token.to_owned()))?;
        Ok(keep_probability(count, self.total_tokens, t))
    }

    /// Keep probabilities for every id, in id order.
    pub fn keep_probabilities(&self, t: f64) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| keep_probability(c, self.total_tokens, t))
            .collect()
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "#total_tokens={}", self.total_tokens)?;
        for (word, count) in self.words.iter().zip(&self.counts) {
            writeln!(w, "{}\t{}", word, count)?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write(&mut buf).expect("write to Vec");
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();

        let header = lines
            .next()
            .transpose()
            .map_err(|e| Error::io(path, e))?
            .unwrap_or_default();
        let total_tokens = header
            .strip_prefix("#total_tokens=")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| Error::parse(path, 1, "expected `#total_tokens=N` header"))?;

        let mut words = Vec::new();
        let mut counts = Vec::new();
        for (idx, line) in lines.enumerate() {
            let lineno = idx + 2;
            let line = line.map_err(|e| Error::io(path, e))?;
            let (word, count) = line
                .split_once('\t')
                .and_then(|(w, c)| Some((w, c.parse::<u64>().ok()?)))
                .ok_or_else(|| Error::parse(path, lineno, "expected `token<TAB>count`"))?;
            words.push(word.to_owned());
            counts.push(count);
        }

        Ok(Self::from_parts(words, counts, total_tokens))
    }
}

/// `min(1, (sqrt(z/t) + 1) * t/z)` with `z = count / total`.
pub fn keep_probability(count: u64, total: u64, t: f64) -> f64 {
    if count == 0 || total == 0 {
        return 1.0;
    }
    let z = count as f64 / total as f64;
    (((z / t).sqrt() + 1.0) * (t / z)).min(1.0)
}

/// Unigram distribution raised to `power`, used to draw negative samples.
#[derive(Clone, Debug)]
pub struct SamplingDistribution {
    probs: Vec<f64>,
    power: f64,
    alias: WeightedAliasIndex<f64>,
}

impl SamplingDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// Draw a token id.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.alias.sample(rng) as u32
    }
}

pub fn build_negative_table(vocab: &Vocabulary, power: f64) -> Result<SamplingDistribution> {
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let weights: Vec<f64> = vocab.counts().iter().map(|&c| (c as f64).powf(power)).collect();
    let norm: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / norm).collect();
    let alias = WeightedAliasIndex::new(probs.clone())
        .map_err(|e| Error::Config(format!("cannot build negative table: {}", e)))?;
    Ok(SamplingDistribution { probs, power, alias })
}
