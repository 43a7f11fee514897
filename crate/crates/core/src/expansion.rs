//! Property expansion through a property–noun association resource.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ranker::sort_scored;

/// Sparse nonnegative noun vector of one property, sorted by noun.
pub type NounVector = Vec<(String, f64)>;

/// Property → noun weights. Every stored row has at least one positive entry.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AssociationResource {
    rows: BTreeMap<String, NounVector>,
}

impl AssociationResource {
    /// Build from `(property, noun, weight)` triples; duplicates are summed,
    /// zero totals dropped. Panics on a negative weight.
    pub fn from_triples<I, P, N>(triples: I) -> Self
    where
        I: IntoIterator<Item = (P, N, f64)>,
        P: Into<String>,
        N: Into<String>,
    {
        let mut acc: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (p, n, w) in triples {
            assert!(w >= 0.0, "association weights must be nonnegative");
            *acc.entry(p.into()).or_default().entry(n.into()).or_default() += w;
        }
        Self::from_accumulated(acc)
    }

    fn from_accumulated(acc: BTreeMap<String, BTreeMap<String, f64>>) -> Self {
        let rows = acc
            .into_iter()
            .filter_map(|(p, nouns)| {
                let v: NounVector = nouns.into_iter().filter(|(_, w)| *w > 0.0).collect();
                (!v.is_empty()).then_some((p, v))
            })
            .collect();
        AssociationResource { rows }
    }

    /// Reads `property<TAB>noun<TAB>weight` lines. Empty lines and `#`
    /// comments are ignored.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut acc: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let no = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let [p, n, w] = line.split('\t').collect::<Vec<_>>()[..] else {
                return Err(Error::parse(path, no, "expected `property<TAB>noun<TAB>weight`"));
            };
            let w: f64 = w
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, no, format!("bad weight `{}`", w)))?;
            if !w.is_finite() || w < 0.0 {
                return Err(Error::parse(path, no, format!("weight must be a nonnegative number, got {}", w)));
            }
            *acc.entry(p.to_owned()).or_default().entry(n.to_owned()).or_default() += w;
        }
        Ok(Self::from_accumulated(acc))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn properties(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }

    pub fn row(&self, property: &str) -> Option<&[(String, f64)]> {
        self.rows.get(property).map(Vec::as_slice)
    }

    pub fn weight(&self, property: &str, noun: &str) -> f64 {
        self.row(property)
            .and_then(|r| r.binary_search_by(|(n, _)| n.as_str().cmp(noun)).ok().map(|i| r[i].1))
            .unwrap_or(0.0)
    }
}

/// Similarity between two property rows.
pub trait AssociationScorer {
    fn score(&self, a: &[(String, f64)], b: &[(String, f64)]) -> f64;
}

/// Cosine of sparse noun vectors.
#[derive(Clone, Copy, Debug, Default)]
pub struct Cosine;

impl AssociationScorer for Cosine {
    fn score(&self, a: &[(String, f64)], b: &[(String, f64)]) -> f64 {
        let (mut i, mut j, mut dot) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    dot += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        let na = a.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        let nb = b.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            dot / (na * nb)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpansionStatus {
    Expanded,
    NoSeedsMatched,
}

impl ExpansionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ExpansionStatus::Expanded => "ok",
            ExpansionStatus::NoSeedsMatched => "no seeds matched",
        }
    }
}

impl fmt::Display for ExpansionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub items: Vec<(String, f64)>,
    pub status: ExpansionStatus,
    /// Seeds that were found in the resource.
    pub matched_seeds: usize,
}

/// Expand with mean cosine similarity to the seeds.
pub fn expand_properties<S: AsRef<str>>(seeds: &[S], resource: &AssociationResource, k: usize) -> Expansion {
    expand_properties_with(seeds, resource, k, &Cosine)
}

/// Candidates are resource properties that are not seeds; each scores the
/// mean of `scorer` against the seeds present in the resource.
pub fn expand_properties_with<S: AsRef<str>>(
    seeds: &[S],
    resource: &AssociationResource,
    k: usize,
    scorer: &dyn AssociationScorer,
) -> Expansion {
    let seed_set: BTreeSet<&str> = seeds.iter().map(AsRef::as_ref).collect();
    let matched: Vec<&[(String, f64)]> = seed_set.iter().filter_map(|s| resource.row(s)).collect();
    if matched.is_empty() {
        return Expansion {
            items: Vec::new(),
            status: ExpansionStatus::NoSeedsMatched,
            matched_seeds: 0,
        };
    }
    let mut items: Vec<(String, f64)> = if k == 0 {
        Vec::new()
    } else {
        resource
            .rows
            .iter()
            .filter(|(p, _)| !seed_set.contains(p.as_str()))
            .map(|(p, row)| {
                let total: f64 = matched.iter().map(|s| scorer.score(row, s)).sum();
                (p.clone(), total / matched.len() as f64)
            })
            .collect()
    };
    sort_scored(&mut items);
    items.truncate(k);
    Expansion {
        items,
        status: ExpansionStatus::Expanded,
        matched_seeds: matched.len(),
    }
}
