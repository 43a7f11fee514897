//! Co-occurrence counting and simple log-likelihood relatedness.
//!
//! Two counting modes are available. In sentence mode the counting unit is
//! a sentence and counts record presence: `N` is the number of sentences,
//! a marginal the number of sentences containing the token and a pair count
//! the number of sentences containing both tokens. In window mode the unit
//! is a token position: marginals are token frequencies and a pair count is
//! the number of unordered position pairs at most `w` apart within one
//! sentence. Tokens outside the vocabulary are skipped (window distances
//! are still measured on the original positions). Pairs of a token with
//! itself are never recorded.
//!
//! The relatedness score is the simple log-likelihood
//! `2 * (O ln(O/E) - (O - E))` with `E = m(a) m(b) / N`, negated when the
//! observed count falls below expectation.
//!
//! Serialized layout (UTF-8):
//!
//! ```text
//! #mode=sentence #N=4
//! #meta<TAB>key=value...
//! tokenA<TAB>tokenB<TAB>count   (A < B, sorted lexicographically)
//! #marginals
//! token<TAB>count               (sorted lexicographically)
//! ```

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::meta;
use crate::ranker::{sort_scored, ModelTag, RankedProperties};
use crate::vocab::Vocabulary;
use crate::Metadata;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CoocMode {
    #[default]
    Sentence,
    /// Half-width of the co-occurrence window.
    Window(usize),
}

impl fmt::Display for CoocMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoocMode::Sentence => f.write_str("sentence"),
            CoocMode::Window(w) => write!(f, "window:{}", w),
        }
    }
}

impl FromStr for CoocMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sentence" => Ok(CoocMode::Sentence),
            _ => s
                .strip_prefix("window:")
                .and_then(|w| w.parse().ok())
                .filter(|&w| w >= 1)
                .map(CoocMode::Window)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "bad co-occurrence mode `{}` (expected `sentence` or `window:N`)",
                        s
                    ))
                }),
        }
    }
}

fn pair_key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Accumulates co-occurrence counts over a shard of sentences.
#[derive(Clone, Debug)]
pub struct CoocCounter {
    mode: CoocMode,
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    marginals: Vec<u64>,
    pairs: HashMap<(u32, u32), u64>,
    units: u64,
    scratch: Vec<u32>,
}

impl CoocCounter {
    pub fn new(vocab: &Vocabulary, mode: CoocMode) -> Self {
        let mut tokens = vocab.words().to_vec();
        tokens.sort();
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        CoocCounter {
            mode,
            marginals: vec![0; tokens.len()],
            tokens,
            index,
            pairs: HashMap::new(),
            units: 0,
            scratch: Vec::new(),
        }
    }

    pub fn add_sentence<S: AsRef<str>>(&mut self, sentence: &[S]) {
        match self.mode {
            CoocMode::Sentence => {
                self.scratch.clear();
                self.scratch
                    .extend(sentence.iter().filter_map(|t| self.index.get(t.as_ref()).copied()));
                self.scratch.sort_unstable();
                self.scratch.dedup();
                for (i, &a) in self.scratch.iter().enumerate() {
                    self.marginals[a as usize] += 1;
                    for &b in &self.scratch[i + 1..] {
                        *self.pairs.entry((a, b)).or_insert(0) += 1;
                    }
                }
                self.units += 1;
            }
            CoocMode::Window(w) => {
                let ids: Vec<Option<u32>> = sentence
                    .iter()
                    .map(|t| self.index.get(t.as_ref()).copied())
                    .collect();
                for (p, a) in ids.iter().enumerate() {
                    let Some(a) = *a else { continue };
                    self.marginals[a as usize] += 1;
                    self.units += 1;
                    for b in ids.iter().skip(p + 1).take(w).flatten() {
                        if *b != a {
                            *self.pairs.entry(pair_key(a, *b)).or_insert(0) += 1;
                        }
                    }
                }
            }
        }
    }

    /// Fold in counts from a shard counted with the same vocabulary and mode.
    pub fn merge(&mut self, other: CoocCounter) {
        assert_eq!(self.mode, other.mode, "merging counters of different modes");
        assert_eq!(self.tokens, other.tokens, "merging counters over different vocabularies");
        for (m, o) in self.marginals.iter_mut().zip(other.marginals) {
            *m += o;
        }
        for (k, c) in other.pairs {
            *self.pairs.entry(k).or_insert(0) += c;
        }
        self.units += other.units;
    }

    /// Finish counting. Tokens that were never counted are dropped.
    pub fn finish(self) -> CoocModel {
        let keep: Vec<u32> = (0..self.tokens.len() as u32)
            .filter(|&i| self.marginals[i as usize] > 0)
            .collect();
        let mut remap = vec![u32::MAX; self.tokens.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old as usize] = new as u32;
        }
        let tokens: Vec<String> = keep.iter().map(|&i| self.tokens[i as usize].clone()).collect();
        let marginals = keep.iter().map(|&i| self.marginals[i as usize]).collect();
        let pairs = self
            .pairs
            .into_iter()
            .map(|((a, b), c)| ((remap[a as usize], remap[b as usize]), c))
            .collect();
        CoocModel::from_parts(self.mode, tokens, marginals, pairs, self.units, Metadata::new())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoocModel {
    mode: CoocMode,
    // Sorted lexicographically; ids follow this order.
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    marginals: Vec<u64>,
    pairs: HashMap<(u32, u32), u64>,
    n: u64,
    pub metadata: Metadata,
}

/// Count co-occurrences over `sentences`, restricted to `vocab`.
pub fn count_cooccurrences<I, S>(sentences: I, vocab: &Vocabulary, mode: CoocMode) -> CoocModel
where
    I: IntoIterator<Item = S>,
    S: AsRef<[String]>,
{
    let mut counter = CoocCounter::new(vocab, mode);
    for s in sentences {
        counter.add_sentence(s.as_ref());
    }
    counter.finish()
}

/// Signed simple log-likelihood for observed `o` and expected `e`.
pub fn signed_simple_ll(o: f64, e: f64) -> f64 {
    let o_ln = if o == 0.0 { 0.0 } else { o * (o / e).ln() };
    let raw = 2.0 * (o_ln - (o - e));
    if o >= e {
        raw
    } else {
        -raw
    }
}

impl CoocModel {
    fn from_parts(
        mode: CoocMode,
        tokens: Vec<String>,
        marginals: Vec<u64>,
        pairs: HashMap<(u32, u32), u64>,
        n: u64,
        metadata: Metadata,
    ) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        CoocModel {
            mode,
            tokens,
            index,
            marginals,
            pairs,
            n,
            metadata,
        }
    }

    pub fn mode(&self) -> CoocMode {
        self.mode
    }

    /// Total number of counting units.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn marginal(&self, token: &str) -> u64 {
        self.index
            .get(token)
            .map(|&i| self.marginals[i as usize])
            .unwrap_or(0)
    }

    pub fn pair_count(&self, a: &str, b: &str) -> u64 {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&a), Some(&b)) if a != b => self.pairs.get(&pair_key(a, b)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Exact match first; otherwise the most frequent case-insensitive match.
    pub fn resolve(&self, token: &str) -> Option<&str> {
        if self.marginal(token) > 0 {
            return self.index.get_key_value(token).map(|(k, _)| k.as_str());
        }
        let lower = token.to_lowercase();
        self.tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.to_lowercase() == lower)
            .max_by(|(i, _), (j, _)| {
                self.marginals[*i]
                    .cmp(&self.marginals[*j])
                    .then_with(|| j.cmp(i))
            })
            .map(|(_, t)| t.as_str())
    }

    pub fn simple_log_likelihood(&self, w1: &str, w2: &str) -> Result<f64> {
        if w1 == w2 {
            return Err(Error::SelfRelatedness(w1.to_owned()));
        }
        let m1 = self.marginal(w1);
        if m1 == 0 {
            return Err(Error::ZeroMarginal(w1.to_owned()));
        }
        let m2 = self.marginal(w2);
        if m2 == 0 {
            return Err(Error::ZeroMarginal(w2.to_owned()));
        }
        let e = m1 as f64 * m2 as f64 / self.n as f64;
        let o = self.pair_count(w1, w2) as f64;
        Ok(signed_simple_ll(o, e))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "#mode={} #N={}", self.mode, self.n).unwrap();
        writeln!(out, "{}", meta::format_line(&self.metadata)).unwrap();
        let mut pairs: Vec<_> = self.pairs.iter().collect();
        pairs.sort_unstable();
        for (&(a, b), c) in pairs {
            writeln!(out, "{}\t{}\t{}", self.tokens[a as usize], self.tokens[b as usize], c).unwrap();
        }
        writeln!(out, "#marginals").unwrap();
        for (t, m) in self.tokens.iter().zip(&self.marginals) {
            writeln!(out, "{}\t{}", t, m).unwrap();
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let bad = || Error::BadFormat {
            path: path.to_owned(),
            expected: "co-occurrence model (`#mode=... #N=...`)",
        };
        let text = String::from_utf8(bytes).map_err(|_| bad())?;
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

        let header = lines.next().map(|(_, l)| l).ok_or_else(bad)?;
        let (mode, n) = header
            .strip_prefix("#mode=")
            .and_then(|r| r.split_once(" #N="))
            .and_then(|(m, n)| Some((m.parse::<CoocMode>().ok()?, n.parse::<u64>().ok()?)))
            .ok_or_else(bad)?;

        let mut metadata = Metadata::new();
        let mut raw_pairs = Vec::new();
        let mut marginal_section = false;
        let mut tokens = Vec::new();
        let mut marginals = Vec::new();

        for (no, line) in lines {
            if let Some(m) = meta::parse_line(line) {
                metadata = m;
                continue;
            }
            if line == "#marginals" {
                marginal_section = true;
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if marginal_section {
                match fields.as_slice() {
                    [t, c] => {
                        tokens.push((*t).to_owned());
                        marginals.push(c.parse().map_err(|_| Error::parse(path, no, "bad count"))?);
                    }
                    _ => return Err(Error::parse(path, no, "expected `token<TAB>count`")),
                }
            } else {
                match fields.as_slice() {
                    [a, b, c] => {
                        let c: u64 = c.parse().map_err(|_| Error::parse(path, no, "bad count"))?;
                        raw_pairs.push((no, (*a).to_owned(), (*b).to_owned(), c));
                    }
                    _ => return Err(Error::parse(path, no, "expected `tokenA<TAB>tokenB<TAB>count`")),
                }
            }
        }

        let index: HashMap<&str, u32> = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i as u32))
            .collect();
        let mut pairs = HashMap::with_capacity(raw_pairs.len());
        for (no, a, b, c) in raw_pairs {
            let (Some(&a), Some(&b)) = (index.get(a.as_str()), index.get(b.as_str())) else {
                return Err(Error::parse(path, no, "pair token missing from marginals"));
            };
            pairs.insert(pair_key(a, b), c);
        }

        Ok(Self::from_parts(mode, tokens, marginals, pairs, n, metadata))
    }
}

/// Score `adjectives` against `entity` and keep the best `top_k`.
///
/// Adjectives the model has never seen are omitted. An entity missing from
/// the model yields an empty ranking flagged as unmodeled.
pub fn rank_properties_relatedness<S: AsRef<str>>(
    model: &CoocModel,
    entity: &str,
    adjectives: &[S],
    top_k: usize,
) -> RankedProperties {
    let Some(resolved) = model.resolve(entity) else {
        return RankedProperties::unmodeled(entity, ModelTag::Relatedness);
    };
    let mut items: Vec<(String, f64)> = adjectives
        .iter()
        .map(AsRef::as_ref)
        .filter(|a| *a != resolved)
        .filter_map(|a| {
            model
                .simple_log_likelihood(resolved, a)
                .ok()
                .map(|s| (a.to_owned(), s))
        })
        .collect();
    items.sort_by(|a, b| a.0.cmp(&b.0));
    items.dedup_by(|a, b| a.0 == b.0);
    sort_scored(&mut items);
    items.truncate(top_k);
    RankedProperties::ranked(entity, ModelTag::Relatedness, items)
}
