//! One ranking interface over all four scorers.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::embeddings::{EmbeddingModel, Metric, TrainMode};
use crate::error::{Error, Result};
use crate::properties::{rank_properties_tfidf, AdjectiveLexicon, EntityProperties, TfIdfModel};
use crate::relatedness::{rank_properties_relatedness, CoocModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelTag {
    Tfidf,
    Relatedness,
    W2v,
    Subword,
}

impl ModelTag {
    pub const ALL: [ModelTag; 4] = [ModelTag::Tfidf, ModelTag::Relatedness, ModelTag::W2v, ModelTag::Subword];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelTag::Tfidf => "tfidf",
            ModelTag::Relatedness => "relatedness",
            ModelTag::W2v => "w2v",
            ModelTag::Subword => "subword",
        }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown model `{}` (expected tfidf, relatedness, w2v or subword)", s)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankStatus {
    Ranked,
    /// The scorer has no representation of the entity.
    EntityUnmodeled,
}

impl RankStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RankStatus::Ranked => "ok",
            RankStatus::EntityUnmodeled => "entity unmodeled",
        }
    }
}

impl fmt::Display for RankStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Adjectives for one entity, best first.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedProperties {
    pub entity: String,
    pub model_tag: ModelTag,
    /// Similarity metric used by embedding scorers.
    pub metric: Option<Metric>,
    pub items: Vec<(String, f64)>,
    pub status: RankStatus,
}

impl RankedProperties {
    pub fn ranked(entity: impl Into<String>, model_tag: ModelTag, items: Vec<(String, f64)>) -> Self {
        RankedProperties {
            entity: entity.into(),
            model_tag,
            metric: None,
            items,
            status: RankStatus::Ranked,
        }
    }

    pub fn unmodeled(entity: impl Into<String>, model_tag: ModelTag) -> Self {
        RankedProperties {
            entity: entity.into(),
            model_tag,
            metric: None,
            items: Vec::new(),
            status: RankStatus::EntityUnmodeled,
        }
    }

    pub fn adjectives(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|(a, _)| a.as_str())
    }
}

/// Descending score, ties broken by ascending name.
pub fn sort_scored(items: &mut [(String, f64)]) {
    items.sort_by(|(na, sa), (nb, sb)| {
        sb.partial_cmp(sa)
            .unwrap_or(Ordering::Equal)
            .then_with(|| na.cmp(nb))
    });
}

/// Anything that can order candidate adjectives for an entity.
pub trait Scorer {
    fn tag(&self) -> ModelTag;

    fn rank_candidates(&self, entity: &str, candidates: &AdjectiveLexicon, metric: Metric, top_k: usize) -> RankedProperties;
}

/// Rank `candidates` for `entity` with any scorer.
pub fn rank(
    scorer: &dyn Scorer,
    entity: &str,
    candidates: &AdjectiveLexicon,
    metric: Metric,
    top_k: usize,
) -> Result<RankedProperties> {
    if candidates.is_empty() {
        return Err(Error::Config("candidate list is empty".into()));
    }
    Ok(scorer.rank_candidates(entity, candidates, metric, top_k))
}

impl Scorer for TfIdfModel {
    fn tag(&self) -> ModelTag {
        ModelTag::Tfidf
    }

    /// Ranks the candidates that occur in the entity's description.
    fn rank_candidates(&self, entity: &str, candidates: &AdjectiveLexicon, _metric: Metric, top_k: usize) -> RankedProperties {
        let Some(row) = self.resolve_entity(entity) else {
            return RankedProperties::unmodeled(entity, ModelTag::Tfidf);
        };
        let props = EntityProperties {
            entity: entity.to_owned(),
            properties: self
                .row(row)
                .map(|(t, _)| t)
                .filter(|t| candidates.contains(t))
                .map(str::to_owned)
                .collect(),
        };
        rank_properties_tfidf(self, &props, top_k).expect("entity resolved above")
    }
}

impl Scorer for CoocModel {
    fn tag(&self) -> ModelTag {
        ModelTag::Relatedness
    }

    fn rank_candidates(&self, entity: &str, candidates: &AdjectiveLexicon, _metric: Metric, top_k: usize) -> RankedProperties {
        let adjectives: Vec<&str> = candidates.iter().collect();
        rank_properties_relatedness(self, entity, &adjectives, top_k)
    }
}

impl Scorer for EmbeddingModel {
    fn tag(&self) -> ModelTag {
        embedding_tag(self)
    }

    fn rank_candidates(&self, entity: &str, candidates: &AdjectiveLexicon, metric: Metric, top_k: usize) -> RankedProperties {
        EmbeddingRanker::new(self, candidates.iter()).rank(entity, metric, top_k)
    }
}

fn embedding_tag(model: &EmbeddingModel) -> ModelTag {
    match model.mode() {
        TrainMode::Word => ModelTag::W2v,
        TrainMode::Subword => ModelTag::Subword,
    }
}

/// Embedding scorer with candidate vectors computed once, for ranking many
/// entities against the same lexicon.
pub struct EmbeddingRanker<'a> {
    model: &'a EmbeddingModel,
    candidates: Vec<(String, Vec<f32>)>,
}

impl<'a> EmbeddingRanker<'a> {
    /// Candidates without a vector (unknown words in word mode) are dropped.
    pub fn new<I, S>(model: &'a EmbeddingModel, candidates: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let candidates = candidates
            .into_iter()
            .filter_map(|c| {
                let c = c.as_ref();
                let v = model.vector(c).ok()??;
                Some((c.to_owned(), v))
            })
            .collect();
        EmbeddingRanker { model, candidates }
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    /// Entity vector: exact vocabulary match, then case-insensitive match,
    /// then (subword mode only) n-gram composition.
    fn entity_vector(&self, entity: &str) -> Option<Vec<f32>> {
        if entity.is_empty() {
            return None;
        }
        match self.model.resolve(entity) {
            Some(word) => self.model.vector(word).ok().flatten(),
            None => self.model.vector(entity).ok().flatten(),
        }
    }

    pub fn rank(&self, entity: &str, metric: Metric, top_k: usize) -> RankedProperties {
        let tag = embedding_tag(self.model);
        let Some(ev) = self.entity_vector(entity) else {
            let mut r = RankedProperties::unmodeled(entity, tag);
            r.metric = Some(metric);
            return r;
        };
        let mut items: Vec<(String, f64)> = self
            .candidates
            .iter()
            .map(|(c, v)| (c.clone(), metric.apply(&ev, v)))
            .collect();
        sort_scored(&mut items);
        items.truncate(top_k);
        let mut r = RankedProperties::ranked(entity, tag, items);
        r.metric = Some(metric);
        r
    }
}

/// Agreement between the top of two rankings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Overlap {
    pub count: usize,
    pub jaccard: f64,
}

/// Overlap count and Jaccard index of the top-`depth` adjective sets.
/// Two empty sets count as identical.
pub fn compare_rankings(a: &RankedProperties, b: &RankedProperties, depth: usize) -> Result<Overlap> {
    if a.entity != b.entity {
        return Err(Error::EntityMismatch(a.entity.clone(), b.entity.clone()));
    }
    let sa: BTreeSet<&str> = a.adjectives().take(depth).collect();
    let sb: BTreeSet<&str> = b.adjectives().take(depth).collect();
    let count = sa.intersection(&sb).count();
    let union = sa.union(&sb).count();
    let jaccard = if union == 0 { 1.0 } else { count as f64 / union as f64 };
    Ok(Overlap { count, jaccard })
}
