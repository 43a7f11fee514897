//! Candidate property extraction and TF-IDF ranking over descriptions.
//!
//! Entities are the documents and their description tokens the features.
//! The weighting is the smooth-idf, L2-normalized variant:
//!
//! ```text
//! tf(t, e)  = raw count of t in e's description
//! idf(t)    = ln((1 + N) / (1 + df(t))) + 1
//! cell(e,t) = tf * idf, each row scaled to unit L2 norm
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::{tokenize_text, Document};
use crate::error::{Error, Result};
use crate::meta;
use crate::ranker::{sort_scored, ModelTag, RankedProperties};
use crate::Metadata;

const TFIDF_MAGIC: &str = "#propmine-tfidf v1";

/// Set of admissible adjectives, stored lowercased.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjectiveLexicon {
    adjectives: BTreeSet<String>,
}

impl AdjectiveLexicon {
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        AdjectiveLexicon {
            adjectives: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    /// One adjective per line; `#` starts a comment line.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let lexicon = Self::from_words(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        );
        if lexicon.is_empty() {
            return Err(Error::EmptyLexicon(path.to_owned()));
        }
        Ok(lexicon)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.adjectives.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.adjectives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjectives.is_empty()
    }

    /// Adjectives in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.adjectives.iter().map(String::as_str)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntityProperties {
    pub entity: String,
    pub properties: BTreeSet<String>,
}

/// Pulls candidate properties out of an entity description.
pub trait PropertyExtractor {
    fn extract(&self, doc: &Document) -> EntityProperties;
}

impl PropertyExtractor for AdjectiveLexicon {
    fn extract(&self, doc: &Document) -> EntityProperties {
        let properties = tokenize_text(&doc.text, true)
            .into_iter()
            .flat_map(|s| s.into_tokens())
            .filter(|t| self.adjectives.contains(t))
            .collect();
        EntityProperties {
            entity: doc.entity.clone().unwrap_or_else(|| doc.id.clone()),
            properties,
        }
    }
}

/// Lexicon lookup over the lowercased description tokens.
pub fn extract_properties(doc: &Document, lexicon: &AdjectiveLexicon) -> EntityProperties {
    lexicon.extract(doc)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TfIdfModel {
    entities: Vec<String>,
    entity_index: HashMap<String, usize>,
    terms: Vec<String>,
    term_index: HashMap<String, u32>,
    idf: Vec<f64>,
    // Sparse rows, sorted by term id.
    rows: Vec<Vec<(u32, f64)>>,
    pub metadata: Metadata,
}

/// Build the entity × term TF-IDF matrix from entity descriptions.
pub fn build_tfidf(descriptions: &[Document]) -> TfIdfModel {
    let mut term_counts: Vec<HashMap<String, u64>> = Vec::with_capacity(descriptions.len());
    for doc in descriptions {
        let mut counts = HashMap::new();
        for sentence in tokenize_text(&doc.text, true) {
            for t in sentence.into_tokens() {
                *counts.entry(t).or_insert(0) += 1;
            }
        }
        term_counts.push(counts);
    }

    let mut df: HashMap<&str, u64> = HashMap::new();
    for counts in &term_counts {
        for t in counts.keys() {
            *df.entry(t.as_str()).or_insert(0) += 1;
        }
    }

    let mut terms: Vec<String> = df.keys().map(|t| (*t).to_owned()).collect();
    terms.sort();
    let term_index: HashMap<String, u32> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as u32))
        .collect();

    let n = descriptions.len() as f64;
    let idf: Vec<f64> = terms
        .iter()
        .map(|t| ((1.0 + n) / (1.0 + df[t.as_str()] as f64)).ln() + 1.0)
        .collect();

    let rows = term_counts
        .iter()
        .map(|counts| {
            let mut row: Vec<(u32, f64)> = counts
                .iter()
                .map(|(t, &tf)| {
                    let id = term_index[t];
                    (id, tf as f64 * idf[id as usize])
                })
                .collect();
            row.sort_by_key(|&(id, _)| id);
            let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (_, v) in &mut row {
                    *v /= norm;
                }
            }
            row
        })
        .collect();

    let entities: Vec<String> = descriptions
        .iter()
        .map(|d| d.entity.clone().unwrap_or_else(|| d.id.clone()))
        .collect();

    TfIdfModel::from_parts(entities, terms, idf, rows, Metadata::new())
}

impl TfIdfModel {
    fn from_parts(
        entities: Vec<String>,
        terms: Vec<String>,
        idf: Vec<f64>,
        rows: Vec<Vec<(u32, f64)>>,
        metadata: Metadata,
    ) -> Self {
        let entity_index = entities
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let term_index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        TfIdfModel {
            entities,
            entity_index,
            terms,
            term_index,
            idf,
            rows,
            metadata,
        }
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.term_index.get(term).map(|&i| self.idf[i as usize])
    }

    /// Exact name first, then a case-insensitive match.
    pub fn resolve_entity(&self, name: &str) -> Option<usize> {
        if let Some(&i) = self.entity_index.get(name) {
            return Some(i);
        }
        let lower = name.to_lowercase();
        self.entities.iter().position(|e| e.to_lowercase() == lower)
    }

    /// Weight of `term` for the entity at row `entity`.
    pub fn cell(&self, entity: usize, term: &str) -> f64 {
        let Some(&id) = self.term_index.get(term) else {
            return 0.0;
        };
        let row = &self.rows[entity];
        row.binary_search_by_key(&id, |&(t, _)| t)
            .map(|pos| row[pos].1)
            .unwrap_or(0.0)
    }

    pub fn score(&self, entity: &str, term: &str) -> Option<f64> {
        self.resolve_entity(entity).map(|i| self.cell(i, term))
    }

    /// Nonzero cells of an entity's row as `(term, weight)`.
    pub fn row(&self, entity: usize) -> impl Iterator<Item = (&str, f64)> {
        self.rows[entity]
            .iter()
            .map(move |&(t, v)| (self.terms[t as usize].as_str(), v))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", TFIDF_MAGIC).unwrap();
        writeln!(out, "{}", meta::format_line(&self.metadata)).unwrap();
        writeln!(out, "#entities\t{}", self.entities.len()).unwrap();
        for e in &self.entities {
            writeln!(out, "{}", e).unwrap();
        }
        writeln!(out, "#terms\t{}", self.terms.len()).unwrap();
        for (t, idf) in self.terms.iter().zip(&self.idf) {
            writeln!(out, "{}\t{}", t, idf).unwrap();
        }
        writeln!(out, "#cells").unwrap();
        for (e, row) in self.rows.iter().enumerate() {
            for &(t, v) in row {
                writeln!(out, "{}\t{}\t{}", e, t, v).unwrap();
            }
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
            expected: "TF-IDF model (`#propmine-tfidf v1`)",
        };
        let text = String::from_utf8(bytes).map_err(|_| bad())?;
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        if lines.next().map(|(_, l)| l) != Some(TFIDF_MAGIC) {
            return Err(bad());
        }
        let perr = |line: usize, msg: &str| Error::parse(path, line, msg);

        let mut metadata = Metadata::new();
        let mut next = lines.next();
        if let Some(m) = next.and_then(|(_, l)| meta::parse_line(l)) {
            metadata = m;
            next = lines.next();
        }

        let section_len = |entry: Option<(usize, &str)>, name: &str| -> Result<usize> {
            let (no, line) = entry.ok_or_else(|| perr(0, "truncated file"))?;
            line.strip_prefix(name)
                .and_then(|r| r.strip_prefix('\t'))
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| perr(no, &format!("expected `{}<TAB>N`", name)))
        };

        let n_entities = section_len(next, "#entities")?;
        let mut entities = Vec::with_capacity(n_entities);
        for _ in 0..n_entities {
            let (_, l) = lines.next().ok_or_else(|| perr(0, "truncated entity list"))?;
            entities.push(l.to_owned());
        }

        let n_terms = section_len(lines.next(), "#terms")?;
        let mut terms = Vec::with_capacity(n_terms);
        let mut idf = Vec::with_capacity(n_terms);
        for _ in 0..n_terms {
            let (no, l) = lines.next().ok_or_else(|| perr(0, "truncated term list"))?;
            let (t, v) = l
                .split_once('\t')
                .and_then(|(t, v)| Some((t, v.parse::<f64>().ok()?)))
                .ok_or_else(|| perr(no, "expected `term<TAB>idf`"))?;
            terms.push(t.to_owned());
            idf.push(v);
        }

        match lines.next() {
            Some((_, "#cells")) => {}
            Some((no, _)) => return Err(perr(no, "expected `#cells`")),
            None => return Err(perr(0, "truncated file")),
        }
        let mut rows = vec![Vec::new(); n_entities];
        for (no, l) in lines {
            let mut fields = l.split('\t');
            let parsed = (|| {
                let e: usize = fields.next()?.parse().ok()?;
                let t: u32 = fields.next()?.parse().ok()?;
                let v: f64 = fields.next()?.parse().ok()?;
                (e < n_entities && (t as usize) < n_terms).then_some((e, t, v))
            })();
            let (e, t, v) = parsed.ok_or_else(|| perr(no, "bad cell line"))?;
            rows[e].push((t, v));
        }
        for row in &mut rows {
            row.sort_by_key(|&(t, _)| t);
        }

        Ok(Self::from_parts(entities, terms, idf, rows, metadata))
    }
}

/// Order an entity's extracted properties by their TF-IDF weight.
pub fn rank_properties_tfidf(
    model: &TfIdfModel,
    props: &EntityProperties,
    top_k: usize,
) -> Result<RankedProperties> {
    let row = model
        .resolve_entity(&props.entity)
        .ok_or_else(|| Error::UnknownEntity(props.entity.clone()))?;
    let mut items: Vec<(String, f64)> = props
        .properties
        .iter()
        .map(|p| (p.clone(), model.cell(row, p)))
        .collect();
    sort_scored(&mut items);
    items.truncate(top_k);
    Ok(RankedProperties::ranked(
        props.entity.clone(),
        ModelTag::Tfidf,
        items,
    ))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn docs(texts: &[(&str, &str)]) -> Vec<Document> {
        texts
            .iter()
            .map(|(e, t)| Document::entity_description(*e, *t))
            .collect()
    }

    fn props(entity: &str, words: &[&str]) -> EntityProperties {
        EntityProperties {
            entity: entity.into(),
            properties: words.iter().map(|w| w.to_string()).collect(),
        }
    }

    /// Dense evaluation of the weighting formula, written independently of
    /// the sparse implementation.
    fn oracle(texts: &[Vec<String>]) -> (Vec<String>, Vec<Vec<f64>>) {
        let mut vocab: Vec<String> = texts.iter().flatten().cloned().collect();
        vocab.sort();
        vocab.dedup();
        let n = texts.len() as f64;
        let mut m = vec![vec![0.0; vocab.len()]; texts.len()];
        for (j, term) in vocab.iter().enumerate() {
            let df = texts.iter().filter(|d| d.contains(term)).count() as f64;
            let idf = ((1.0 + n) / (1.0 + df)).ln() + 1.0;
            for (i, d) in texts.iter().enumerate() {
                let tf = d.iter().filter(|t| *t == term).count() as f64;
                m[i][j] = tf * idf;
            }
        }
        for row in &mut m {
            let norm: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
        }
        (vocab, m)
    }

    #[test]
    fn lexicon_loading() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("adj.txt");
        fs::write(&p, "cute\nYellow\ncute\n").unwrap();
        let lex = AdjectiveLexicon::load(&p).unwrap();
        assert_eq!(lex.iter().collect::<Vec<_>>(), ["cute", "yellow"]);
        assert!(lex.contains("YELLOW"));

        fs::write(&p, "# hdr\nelectric\n").unwrap();
        assert_eq!(AdjectiveLexicon::load(&p).unwrap().iter().collect::<Vec<_>>(), ["electric"]);

        fs::write(&p, "").unwrap();
        assert!(matches!(AdjectiveLexicon::load(&p), Err(Error::EmptyLexicon(_))));
    }

    #[test]
    fn extraction() {
        let lex = AdjectiveLexicon::from_words(["cute", "electric", "yellow", "tall"]);
        let doc = Document::entity_description("Pikachu", "Pikachu is a cute electric yellow mouse");
        let p = extract_properties(&doc, &lex);
        assert_eq!(p, props("Pikachu", &["cute", "electric", "yellow"]));

        let none = Document::entity_description("Onix", "A rock snake.");
        assert!(extract_properties(&none, &lex).properties.is_empty());

        let caps = Document::entity_description("X", "CUTE cute");
        assert_eq!(extract_properties(&caps, &lex).properties.len(), 1);
    }

    #[test]
    fn two_document_example() {
        let m = build_tfidf(&docs(&[("d1", "cute yellow electric"), ("d2", "cute rocky")]));
        assert!((m.idf("cute").unwrap() - 1.0).abs() < 1e-12);
        assert!((m.idf("yellow").unwrap() - 1.405_465_108_108_164_4).abs() < 1e-12);
        let d1 = m.resolve_entity("d1").unwrap();
        assert!((m.cell(d1, "cute") - 0.449_436_4).abs() < 1e-6);
        assert!((m.cell(d1, "yellow") - 0.631_667_2).abs() < 1e-6);
        assert!((m.cell(d1, "electric") - 0.631_667_2).abs() < 1e-6);
        assert_eq!(m.cell(d1, "rocky"), 0.0);

        let r = rank_properties_tfidf(&m, &props("d1", &["cute", "yellow"]), 10).unwrap();
        let names: Vec<_> = r.items.iter().map(|(a, _)| a.as_str()).collect();
        assert_eq!(names, ["yellow", "cute"]);
        assert!((r.items[0].1 - 0.631_667_2).abs() < 1e-6);
        assert!((r.items[1].1 - 0.449_436_4).abs() < 1e-6);
    }

    #[test]
    fn single_document_rows_follow_tf() {
        let m = build_tfidf(&docs(&[("e", "a a b")]));
        assert_eq!(m.idf("a"), Some(1.0));
        let norm = 5f64.sqrt();
        assert!((m.cell(0, "a") - 2.0 / norm).abs() < 1e-12);
        assert!((m.cell(0, "b") - 1.0 / norm).abs() < 1e-12);
    }

    #[test]
    fn ranking_edge_cases() {
        let m = build_tfidf(&docs(&[("d1", "cute yellow electric"), ("d2", "cute rocky")]));
        assert!(rank_properties_tfidf(&m, &props("d1", &[]), 5).unwrap().items.is_empty());
        // yellow and electric tie; lexicographic order decides.
        let r = rank_properties_tfidf(&m, &props("d1", &["yellow", "electric", "tall"]), 5).unwrap();
        let names: Vec<_> = r.items.iter().map(|(a, _)| a.as_str()).collect();
        assert_eq!(names, ["electric", "yellow", "tall"]);
        assert_eq!(r.items[2].1, 0.0);
        let r = rank_properties_tfidf(&m, &props("D1", &["yellow", "electric"]), 1).unwrap();
        assert_eq!(r.items.len(), 1);
        assert!(matches!(
            rank_properties_tfidf(&m, &props("nobody", &["cute"]), 5),
            Err(Error::UnknownEntity(_))
        ));
    }

    #[test]
    fn text_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("tfidf.model");
        let mut m = build_tfidf(&docs(&[("d1", "cute yellow electric"), ("d2", "cute rocky"), ("d3", "")]));
        m.metadata.insert("seed".into(), "1".into());
        m.save(&p).unwrap();
        assert_eq!(TfIdfModel::load(&p).unwrap(), m);

        fs::write(&p, "garbage").unwrap();
        assert!(matches!(TfIdfModel::load(&p), Err(Error::BadFormat { .. })));
    }

    fn corpus_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
        proptest::collection::vec(
            proptest::collection::vec((0..20u8).prop_map(|i| format!("t{}", i)), 0..12),
            1..=10,
        )
    }

    proptest! {
        #[test]
        fn matches_dense_oracle(texts in corpus_strategy()) {
            let ds: Vec<Document> = texts
                .iter()
                .enumerate()
                .map(|(i, t)| Document::entity_description(format!("e{}", i), t.join(" ")))
                .collect();
            let m = build_tfidf(&ds);
            let (vocab, dense) = oracle(&texts);
            for (i, row) in dense.iter().enumerate() {
                let norm: f64 = m.row(i).map(|(_, v)| v * v).sum::<f64>().sqrt();
                prop_assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-9);
                for (j, term) in vocab.iter().enumerate() {
                    prop_assert!((m.cell(i, term) - row[j]).abs() < 1e-9);
                    prop_assert_eq!(m.cell(i, term) > 0.0, texts[i].contains(term));
                }
            }
        }

        #[test]
        fn duplication_preserves_ranking(texts in corpus_strategy(), k in 2usize..4) {
            let make = |rep: usize| -> Vec<Document> {
                texts
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        let text = vec![t.join(" "); rep].join(" ");
                        Document::entity_description(format!("e{}", i), text)
                    })
                    .collect()
            };
            let (m1, mk) = (build_tfidf(&make(1)), build_tfidf(&make(k)));
            for (i, t) in texts.iter().enumerate() {
                let p = EntityProperties {
                    entity: format!("e{}", i),
                    properties: t.iter().cloned().collect(),
                };
                let r1 = rank_properties_tfidf(&m1, &p, 100).unwrap();
                let rk = rank_properties_tfidf(&mk, &p, 100).unwrap();
                let o1: Vec<_> = r1.items.iter().map(|x| &x.0).collect();
                let ok: Vec<_> = rk.items.iter().map(|x| &x.0).collect();
                prop_assert_eq!(o1, ok);
            }
        }
    }
}
