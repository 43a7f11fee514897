//! Stage-cached pipeline: prepare, train, rank, expand, export.
//!
//! Each stage reads its inputs from disk and writes its outputs under the
//! configured output directory:
//!
//! ```text
//! cache/corpus.txt      one tokenized sentence per line
//! cache/vocab.tsv       token counts over the cache
//! cache/manifest.tsv    stories kept by the word filter
//! models/w2v.bin  models/subword.bin  models/relatedness.cooc  models/tfidf.model
//! ranked/<model>.tsv    ranked/comparison.tsv
//! expanded/<model>.tsv
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{filter_min_words, load_entity_descriptions, load_story_corpus, tokenize_text, Document};
use crate::embeddings::io::MAGIC as EMBEDDING_MAGIC;
use crate::embeddings::{train_with_stats, EmbeddingModel, Metric, TrainConfig, TrainMode};
use crate::error::{Error, Result};
use crate::expansion::{expand_properties, AssociationResource, ExpansionStatus};
use crate::properties::{build_tfidf, AdjectiveLexicon, TfIdfModel};
use crate::ranker::{EmbeddingRanker, ModelTag, RankStatus, RankedProperties, Scorer};
use crate::relatedness::{count_cooccurrences, CoocMode, CoocModel};
use crate::vocab::Vocabulary;
use crate::Metadata;

pub const RANKED_MAGIC: &str = "#propmine-ranked v1";
pub const EXPANDED_MAGIC: &str = "#propmine-expanded v1";
pub const COMPARISON_MAGIC: &str = "#propmine-comparison v1";
const MANIFEST_MAGIC: &str = "#propmine-manifest v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub descriptions: String,
    pub stories: String,
    pub adjectives: String,
    pub associations: String,
    pub output: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub min_words: usize,
    pub lowercase: bool,
}

/// Hyperparameters of one embedding model. The n-gram keys only matter for
/// the subword model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSection {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr: f32,
    pub final_lr: f32,
    pub min_count: u64,
    pub sample: f64,
    pub minn: usize,
    pub maxn: usize,
    pub buckets: u64,
    pub threads: usize,
}

impl EmbeddingSection {
    fn from_train(c: &TrainConfig) -> Self {
        EmbeddingSection {
            dim: c.dim,
            window: c.window,
            negatives: c.negatives,
            epochs: c.epochs,
            lr: c.initial_lr,
            final_lr: c.final_lr,
            min_count: c.min_count,
            sample: c.sample_t,
            minn: c.minn,
            maxn: c.maxn,
            buckets: c.buckets,
            threads: c.threads,
        }
    }

    pub fn to_train(&self, mode: TrainMode, seed: u64) -> TrainConfig {
        TrainConfig {
            mode,
            dim: self.dim,
            window: self.window,
            negatives: self.negatives,
            epochs: self.epochs,
            initial_lr: self.lr,
            final_lr: self.final_lr,
            min_count: self.min_count,
            sample_t: self.sample,
            minn: self.minn,
            maxn: self.maxn,
            buckets: self.buckets,
            seed,
            threads: self.threads,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelatednessSection {
    /// `sentence` or `window:N`.
    pub mode: String,
    pub min_count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankSection {
    pub top_k: usize,
    /// `dot` or `cosine`, used by the embedding models.
    pub metric: String,
    pub models: Vec<String>,
    /// Depth of the overlap report written to the log.
    pub compare_depth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandSection {
    pub k: usize,
    /// How many top-ranked adjectives seed the expansion.
    pub seeds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
}

/// Full pipeline configuration. Relative paths resolve against the
/// directory of the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: PathsSection,
    pub corpus: CorpusSection,
    pub w2v: EmbeddingSection,
    pub subword: EmbeddingSection,
    pub relatedness: RelatednessSection,
    pub rank: RankSection,
    pub expand: ExpandSection,
    pub run: RunSection,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            paths: PathsSection {
                descriptions: "descriptions.tsv".into(),
                stories: "stories".into(),
                adjectives: "adjectives.txt".into(),
                associations: "associations.tsv".into(),
                output: "out".into(),
            },
            corpus: CorpusSection {
                min_words: 10_000,
                lowercase: false,
            },
            w2v: EmbeddingSection::from_train(&TrainConfig::word()),
            subword: EmbeddingSection::from_train(&TrainConfig::subword()),
            relatedness: RelatednessSection {
                mode: CoocMode::Sentence.to_string(),
                min_count: 1,
            },
            rank: RankSection {
                top_k: 10,
                metric: Metric::Dot.to_string(),
                models: ModelTag::ALL.iter().map(|t| t.to_string()).collect(),
                compare_depth: 5,
            },
            expand: ExpandSection { k: 10, seeds: 10 },
            run: RunSection { seed: 1 },
            base_dir: PathBuf::from("."),
        }
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// `section.key=value`; the value is read as a TOML literal when possible
/// and as a bare string otherwise.
fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let bad = || Error::Config(format!("override `{}` must look like `section.key=value`", assignment));
    let (key, raw) = assignment.split_once('=').ok_or_else(bad)?;
    let (section, field) = key.trim().split_once('.').ok_or_else(bad)?;
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_owned()));
    let Some(toml::Value::Table(sec)) = table.get_mut(section) else {
        return Err(Error::Config(format!("unknown config section `{}`", section)));
    };
    sec.insert(field.to_owned(), value);
    Ok(())
}

impl PipelineConfig {
    /// Read `path`, fill unspecified keys with defaults and apply
    /// `section.key=value` overrides.
    pub fn load<S: AsRef<str>>(path: impl AsRef<Path>, overrides: &[S]) -> Result<Self> {
        let path = path.as_ref();
        if !path.is_file() {
            return Err(Error::MissingInput { what: "config file", path: path.to_owned() });
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base_dir, overrides)
    }

    pub fn from_toml<S: AsRef<str>>(text: &str, base_dir: impl Into<PathBuf>, overrides: &[S]) -> Result<Self> {
        let user: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.message().to_owned()))?;
        let mut table = toml::Table::try_from(PipelineConfig::default()).expect("defaults serialize");
        merge(&mut table, user);
        for o in overrides {
            apply_override(&mut table, o.as_ref())?;
        }
        let mut cfg: PipelineConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_owned()))?;
        cfg.base_dir = base_dir.into();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = dir.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank.top_k == 0 {
            return Err(Error::Config("rank.top_k must be at least 1".into()));
        }
        if self.expand.seeds == 0 {
            return Err(Error::Config("expand.seeds must be at least 1".into()));
        }
        if self.relatedness.min_count == 0 {
            return Err(Error::Config("relatedness.min_count must be at least 1".into()));
        }
        self.cooc_mode()?;
        self.metric()?;
        self.models()?;
        self.train_config(TrainMode::Word).validate()?;
        self.train_config(TrainMode::Subword).validate()?;
        Ok(())
    }

    pub fn resolve(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_owned()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.paths.output)
    }

    pub fn cooc_mode(&self) -> Result<CoocMode> {
        self.relatedness.mode.parse()
    }

    pub fn metric(&self) -> Result<Metric> {
        self.rank.metric.parse()
    }

    pub fn models(&self) -> Result<Vec<ModelTag>> {
        if self.rank.models.is_empty() {
            return Err(Error::Config("rank.models must name at least one model".into()));
        }
        self.rank.models.iter().map(|m| m.parse()).collect()
    }

    pub fn train_config(&self, mode: TrainMode) -> TrainConfig {
        match mode {
            TrainMode::Word => self.w2v.to_train(mode, self.run.seed),
            TrainMode::Subword => self.subword.to_train(mode, self.run.seed),
        }
    }

    /// Short SHA-256 digest of the resolved configuration. The output
    /// directory is left out so relocated runs stay comparable.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.paths.output.clear();
        let canonical = toml::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{:02x}", b);
            s
        })
    }

    fn require(&self, what: &'static str, p: &str) -> Result<PathBuf> {
        let path = self.resolve(p);
        if path.exists() {
            Ok(path)
        } else {
            Err(Error::MissingInput { what, path })
        }
    }
}

/// Files under the output directory.
#[derive(Clone, Debug)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(cfg: &PipelineConfig) -> Self {
        Layout { root: cfg.output_dir() }
    }

    pub fn corpus(&self) -> PathBuf {
        self.root.join("cache/corpus.txt")
    }

    pub fn vocab(&self) -> PathBuf {
        self.root.join("cache/vocab.tsv")
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("cache/manifest.tsv")
    }

    pub fn model(&self, tag: ModelTag) -> PathBuf {
        let name = match tag {
            ModelTag::W2v => "w2v.bin",
            ModelTag::Subword => "subword.bin",
            ModelTag::Relatedness => "relatedness.cooc",
            ModelTag::Tfidf => "tfidf.model",
        };
        self.root.join("models").join(name)
    }

    pub fn ranked(&self, tag: ModelTag) -> PathBuf {
        self.root.join("ranked").join(format!("{}.tsv", tag))
    }

    pub fn comparison(&self) -> PathBuf {
        self.root.join("ranked/comparison.tsv")
    }

    pub fn expanded(&self, tag: ModelTag) -> PathBuf {
        self.root.join("expanded").join(format!("{}.tsv", tag))
    }
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, content).map_err(|e| Error::io(path, e))
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) => fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        None => Ok(()),
    }
}

fn base_metadata(cfg: &PipelineConfig) -> Metadata {
    let mut m = Metadata::new();
    m.insert("config_hash".into(), cfg.hash());
    m.insert("seed".into(), cfg.run.seed.to_string());
    m
}

fn meta_line(m: &Metadata) -> String {
    crate::meta::format_line(m)
}

/// Summary of the prepare stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrepareReport {
    pub documents: usize,
    pub filtered_out: usize,
    pub unreadable: usize,
    pub sentences: usize,
    pub tokens: usize,
}

/// Tokenize the story corpus into the cache.
pub fn prepare(cfg: &PipelineConfig) -> Result<PrepareReport> {
    let stories_dir = cfg.require("story directory", &cfg.paths.stories)?;
    let layout = Layout::new(cfg);
    let mut reader = load_story_corpus(&stories_dir)?;

    let mut total = 0usize;
    let docs: Vec<Document> = filter_min_words(reader.by_ref().inspect(|_| total += 1), cfg.corpus.min_words).collect();
    let unreadable = reader.skipped();
    if docs.is_empty() {
        return Err(Error::Pipeline(format!(
            "no documents after filtering ({} read from {}, min_words={})",
            total,
            stories_dir.display(),
            cfg.corpus.min_words
        )));
    }

    let mut corpus = String::new();
    let mut manifest = String::new();
    let mut meta = base_metadata(cfg);
    let mut sentences_all: Vec<Vec<String>> = Vec::new();
    let mut n_sentences = 0;
    let mut n_tokens = 0;
    writeln!(manifest, "{}", MANIFEST_MAGIC).unwrap();
    let mut rows = String::new();
    for doc in &docs {
        let sentences = tokenize_text(&doc.text, cfg.corpus.lowercase);
        let tokens: usize = sentences.iter().map(|s| s.len()).sum();
        writeln!(rows, "{}\t{}\t{}", doc.id, tokens, sentences.len()).unwrap();
        n_sentences += sentences.len();
        n_tokens += tokens;
        for s in sentences {
            corpus.push_str(&s.join(" "));
            corpus.push('\n');
            sentences_all.push(s.into_tokens());
        }
    }
    meta.insert("documents".into(), docs.len().to_string());
    meta.insert("filtered_out".into(), (total - docs.len()).to_string());
    meta.insert("sentences".into(), n_sentences.to_string());
    meta.insert("tokens".into(), n_tokens.to_string());
    writeln!(manifest, "{}", meta_line(&meta)).unwrap();
    manifest.push_str("#story\ttokens\tsentences\n");
    manifest.push_str(&rows);

    let vocab = Vocabulary::build(&sentences_all, 1)?;
    write_file(&layout.corpus(), &corpus)?;
    write_file(&layout.manifest(), &manifest)?;
    ensure_parent(&layout.vocab())?;
    vocab.save(layout.vocab())?;

    let report = PrepareReport {
        documents: docs.len(),
        filtered_out: total - docs.len(),
        unreadable,
        sentences: n_sentences,
        tokens: n_tokens,
    };
    info!(
        "prepared {} documents ({} below min_words, {} unreadable), {} sentences, {} tokens",
        report.documents, report.filtered_out, report.unreadable, report.sentences, report.tokens
    );
    Ok(report)
}

/// Tokenized sentences from the prepare cache.
pub fn read_cache(cfg: &PipelineConfig) -> Result<Vec<Vec<String>>> {
    let path = Layout::new(cfg).corpus();
    if !path.is_file() {
        return Err(Error::Pipeline(format!(
            "corpus cache {} not found; run `propmine prepare` first",
            path.display()
        )));
    }
    let f = File::open(&path).map_err(|e| Error::io(&path, e))?;
    BufReader::new(f)
        .lines()
        .map(|l| {
            l.map(|l| l.split(' ').filter(|t| !t.is_empty()).map(str::to_owned).collect())
                .map_err(|e| Error::io(&path, e))
        })
        .collect()
}

fn load_descriptions(cfg: &PipelineConfig) -> Result<Vec<Document>> {
    let path = cfg.require("descriptions file", &cfg.paths.descriptions)?;
    load_entity_descriptions(path)
}

/// Train one model and write it to its slot under `models/`.
pub fn train_model(cfg: &PipelineConfig, which: ModelTag) -> Result<PathBuf> {
    let layout = Layout::new(cfg);
    let out = layout.model(which);
    let mut meta = base_metadata(cfg);
    meta.insert("model".into(), which.to_string());
    match which {
        ModelTag::Tfidf => {
            let docs = load_descriptions(cfg)?;
            let mut model = build_tfidf(&docs);
            meta.insert("entities".into(), docs.len().to_string());
            model.metadata = meta;
            ensure_parent(&out)?;
            model.save(&out)?;
        }
        ModelTag::Relatedness => {
            let sentences = read_cache(cfg)?;
            let mode = cfg.cooc_mode()?;
            let vocab = Vocabulary::build(&sentences, cfg.relatedness.min_count)?;
            let mut model = count_cooccurrences(&sentences, &vocab, mode);
            meta.insert("sentences".into(), sentences.len().to_string());
            meta.insert("min_count".into(), cfg.relatedness.min_count.to_string());
            model.metadata = meta;
            ensure_parent(&out)?;
            model.save(&out)?;
        }
        ModelTag::W2v | ModelTag::Subword => {
            let sentences = read_cache(cfg)?;
            let mode = if which == ModelTag::W2v { TrainMode::Word } else { TrainMode::Subword };
            let tc = cfg.train_config(mode);
            if tc.threads > 1 {
                warn!("training {} with {} threads; output will not be bit-reproducible", which, tc.threads);
            }
            let (mut model, stats) = train_with_stats(&sentences, &tc)?;
            meta.insert("sentences".into(), stats.sentences.to_string());
            meta.insert("tokens".into(), stats.tokens.to_string());
            meta.insert("vocab".into(), model.vocab().len().to_string());
            if let Some(loss) = stats.epoch_losses.last() {
                meta.insert("final_loss".into(), format!("{:.6}", loss));
            }
            model.metadata = meta;
            ensure_parent(&out)?;
            model.save(&out)?;
        }
    }
    info!("trained {} -> {}", which, out.display());
    Ok(out)
}

/// A loaded scorer of any kind.
pub enum AnyModel {
    Tfidf(TfIdfModel),
    Relatedness(CoocModel),
    Embedding(EmbeddingModel),
}

impl AnyModel {
    pub fn load(tag: ModelTag, path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::Pipeline(format!(
                "model file {} not found; run `propmine train --model {}` first",
                path.display(),
                tag
            )));
        }
        Ok(match tag {
            ModelTag::Tfidf => AnyModel::Tfidf(TfIdfModel::load(path)?),
            ModelTag::Relatedness => AnyModel::Relatedness(CoocModel::load(path)?),
            ModelTag::W2v | ModelTag::Subword => {
                let m = EmbeddingModel::load(path)?;
                let want = if tag == ModelTag::W2v { TrainMode::Word } else { TrainMode::Subword };
                if m.mode() != want {
                    return Err(Error::Pipeline(format!(
                        "{}: holds a {} model, expected {}",
                        path.display(),
                        m.mode(),
                        want
                    )));
                }
                AnyModel::Embedding(m)
            }
        })
    }
}

fn fmt_score(s: f64) -> String {
    format!("{:.6}", s)
}

fn ranked_tsv(rankings: &[RankedProperties], tag: ModelTag, cfg: &PipelineConfig, metric: Option<Metric>) -> String {
    let hash = cfg.hash();
    let mut meta = base_metadata(cfg);
    meta.insert("model".into(), tag.to_string());
    meta.insert("top_k".into(), cfg.rank.top_k.to_string());
    if let Some(m) = metric {
        meta.insert("metric".into(), m.to_string());
    }
    let mut out = String::new();
    writeln!(out, "{}", RANKED_MAGIC).unwrap();
    writeln!(out, "{}", meta_line(&meta)).unwrap();
    out.push_str("#entity\tadjective\tscore\trank\tmodel_tag\tstatus\tconfig_hash\n");
    for r in rankings {
        if r.status == RankStatus::EntityUnmodeled {
            writeln!(out, "{}\t\t\t\t{}\t{}\t{}", r.entity, tag, r.status, hash).unwrap();
        } else if r.items.is_empty() {
            writeln!(out, "{}\t\t\t\t{}\tno candidates\t{}", r.entity, tag, hash).unwrap();
        } else {
            for (i, (adj, score)) in r.items.iter().enumerate() {
                writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}\t{}", r.entity, adj, fmt_score(*score), i + 1, tag, r.status, hash)
                    .unwrap();
            }
        }
    }
    out
}

/// Rank every described entity with one model.
pub fn rank_entities(model: &AnyModel, entities: &[String], candidates: &AdjectiveLexicon, metric: Metric, top_k: usize) -> Vec<RankedProperties> {
    match model {
        AnyModel::Embedding(m) => {
            let ranker = EmbeddingRanker::new(m, candidates.iter());
            entities.iter().map(|e| ranker.rank(e, metric, top_k)).collect()
        }
        AnyModel::Tfidf(m) => entities.iter().map(|e| m.rank_candidates(e, candidates, metric, top_k)).collect(),
        AnyModel::Relatedness(m) => entities.iter().map(|e| m.rank_candidates(e, candidates, metric, top_k)).collect(),
    }
}

/// Rank all entities with every configured model and write the per-model
/// and side-by-side TSVs.
pub fn rank(cfg: &PipelineConfig) -> Result<Vec<PathBuf>> {
    let lex_path = cfg.require("adjective lexicon", &cfg.paths.adjectives)?;
    let docs = load_descriptions(cfg)?;
    let candidates = AdjectiveLexicon::load(lex_path)?;
    let metric = cfg.metric()?;
    let layout = Layout::new(cfg);
    let entities: Vec<String> = docs.iter().filter_map(|d| d.entity.clone()).collect();

    let mut written = Vec::new();
    let mut all: Vec<(ModelTag, Vec<RankedProperties>)> = Vec::new();
    for tag in cfg.models()? {
        let model = AnyModel::load(tag, &layout.model(tag))?;
        let rankings = rank_entities(&model, &entities, &candidates, metric, cfg.rank.top_k);
        let unmodeled = rankings.iter().filter(|r| r.status == RankStatus::EntityUnmodeled).count();
        if unmodeled > 0 {
            info!("{}: {} of {} entities unmodeled", tag, unmodeled, entities.len());
        }
        let m = matches!(model, AnyModel::Embedding(_)).then_some(metric);
        let path = layout.ranked(tag);
        write_file(&path, &ranked_tsv(&rankings, tag, cfg, m))?;
        written.push(path);
        all.push((tag, rankings));
    }

    log_overlaps(&all, cfg.rank.compare_depth);

    let hash = cfg.hash();
    let mut cmp = String::new();
    writeln!(cmp, "{}", COMPARISON_MAGIC).unwrap();
    let mut meta = base_metadata(cfg);
    meta.insert("metric".into(), metric.to_string());
    writeln!(cmp, "{}", meta_line(&meta)).unwrap();
    cmp.push_str("#entity\tmodel_tag\trank\tadjective\tscore\tconfig_hash\n");
    for (i, entity) in entities.iter().enumerate() {
        for (tag, rankings) in &all {
            for (r, (adj, score)) in rankings[i].items.iter().enumerate() {
                writeln!(cmp, "{}\t{}\t{}\t{}\t{}\t{}", entity, tag, r + 1, adj, fmt_score(*score), hash).unwrap();
            }
        }
    }
    let path = layout.comparison();
    write_file(&path, &cmp)?;
    written.push(path);
    Ok(written)
}

fn log_overlaps(all: &[(ModelTag, Vec<RankedProperties>)], depth: usize) {
    for (i, (ta, ra)) in all.iter().enumerate() {
        for (tb, rb) in &all[i + 1..] {
            let js: Vec<f64> = ra
                .iter()
                .zip(rb)
                .filter(|(a, b)| a.status == RankStatus::Ranked && b.status == RankStatus::Ranked)
                .filter_map(|(a, b)| crate::ranker::compare_rankings(a, b, depth).ok())
                .map(|o| o.jaccard)
                .collect();
            if !js.is_empty() {
                info!(
                    "mean top-{} Jaccard {} vs {}: {:.3}",
                    depth,
                    ta,
                    tb,
                    js.iter().sum::<f64>() / js.len() as f64
                );
            }
        }
    }
}

/// One ranked-TSV row that carries an adjective.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedRow {
    pub entity: String,
    pub adjective: String,
    pub score: f64,
    pub rank: usize,
}

/// Entities in file order, each with its ranked adjectives (possibly none).
pub fn read_ranked_tsv(path: &Path) -> Result<Vec<(String, Vec<RankedRow>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    if lines.next().map(|(_, l)| l) != Some(RANKED_MAGIC) {
        return Err(Error::BadFormat { path: path.to_owned(), expected: "ranked TSV" });
    }
    let mut out: Vec<(String, Vec<RankedRow>)> = Vec::new();
    for (no, line) in lines {
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 7 {
            return Err(Error::parse(path, no, "expected 7 tab-separated fields"));
        }
        let entity = f[0];
        if out.last().map(|(e, _)| e.as_str()) != Some(entity) {
            out.push((entity.to_owned(), Vec::new()));
        }
        if f[1].is_empty() {
            continue;
        }
        let score = f[2].parse().map_err(|_| Error::parse(path, no, "bad score"))?;
        let rank = f[3].parse().map_err(|_| Error::parse(path, no, "bad rank"))?;
        out.last_mut().unwrap().1.push(RankedRow {
            entity: entity.to_owned(),
            adjective: f[1].to_owned(),
            score,
            rank,
        });
    }
    for (_, rows) in &mut out {
        rows.sort_by_key(|r| r.rank);
    }
    Ok(out)
}

/// Expand each entity's top-ranked adjectives for every configured model.
pub fn expand(cfg: &PipelineConfig) -> Result<Vec<PathBuf>> {
    let res_path = cfg.require("association resource", &cfg.paths.associations)?;
    let resource = AssociationResource::load(res_path)?;
    let layout = Layout::new(cfg);
    let hash = cfg.hash();
    let mut written = Vec::new();
    for tag in cfg.models()? {
        let ranked_path = layout.ranked(tag);
        if !ranked_path.is_file() {
            return Err(Error::Pipeline(format!(
                "ranked file {} not found; run `propmine rank` first",
                ranked_path.display()
            )));
        }
        let ranked = read_ranked_tsv(&ranked_path)?;
        let mut meta = base_metadata(cfg);
        meta.insert("model".into(), tag.to_string());
        meta.insert("k".into(), cfg.expand.k.to_string());
        meta.insert("seeds".into(), cfg.expand.seeds.to_string());
        let mut out = String::new();
        writeln!(out, "{}", EXPANDED_MAGIC).unwrap();
        writeln!(out, "{}", meta_line(&meta)).unwrap();
        out.push_str("#entity\tmodel_tag\tnew_property\tscore\tstatus\tconfig_hash\n");
        let mut failed = 0;
        for (entity, rows) in &ranked {
            let seeds: Vec<&str> = rows.iter().take(cfg.expand.seeds).map(|r| r.adjective.as_str()).collect();
            let e = expand_properties(&seeds, &resource, cfg.expand.k);
            match e.status {
                ExpansionStatus::NoSeedsMatched => {
                    failed += 1;
                    writeln!(out, "{}\t{}\t\t\t{}\t{}", entity, tag, e.status, hash).unwrap();
                }
                ExpansionStatus::Expanded if e.items.is_empty() => {
                    writeln!(out, "{}\t{}\t\t\tno candidates\t{}", entity, tag, hash).unwrap();
                }
                ExpansionStatus::Expanded => {
                    for (p, s) in &e.items {
                        writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", entity, tag, p, fmt_score(*s), e.status, hash).unwrap();
                    }
                }
            }
        }
        if failed > 0 {
            info!("{}: no seeds matched for {} of {} entities", tag, failed, ranked.len());
        }
        let path = layout.expanded(tag);
        write_file(&path, &out)?;
        written.push(path);
    }
    Ok(written)
}

/// Write an embedding model file as word2vec text.
pub fn export(model_path: &Path, out_path: &Path) -> Result<()> {
    let mut magic = [0u8; 8];
    let is_embedding = File::open(model_path)
        .map_err(|e| Error::io(model_path, e))?
        .read_exact(&mut magic)
        .is_ok()
        && &magic == EMBEDDING_MAGIC;
    if !is_embedding {
        return Err(Error::Pipeline(format!(
            "{}: not an embedding model (expected `{}` header); only w2v and subword models can be exported",
            model_path.display(),
            String::from_utf8_lossy(EMBEDDING_MAGIC)
        )));
    }
    let model = EmbeddingModel::load(model_path)?;
    ensure_parent(out_path)?;
    let f = File::create(out_path).map_err(|e| Error::io(out_path, e))?;
    let mut w = std::io::BufWriter::new(f);
    model.write_word2vec_text(&mut w).map_err(|e| Error::io(out_path, e))?;
    std::io::Write::flush(&mut w).map_err(|e| Error::io(out_path, e))?;
    Ok(())
}

/// Every stage in order, training the models named in `rank.models`.
pub fn run_all(cfg: &PipelineConfig) -> Result<BTreeMap<&'static str, Vec<PathBuf>>> {
    let mut out = BTreeMap::new();
    prepare(cfg)?;
    let layout = Layout::new(cfg);
    out.insert("cache", vec![layout.corpus(), layout.vocab(), layout.manifest()]);
    let mut models = Vec::new();
    for tag in cfg.models()? {
        models.push(train_model(cfg, tag)?);
    }
    out.insert("models", models);
    out.insert("ranked", rank(cfg)?);
    out.insert("expanded", expand(cfg)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = PipelineConfig::from_toml("[rank]\ntop_k = 3\n", ".", &["w2v.dim=7", "relatedness.mode=window:2"]).unwrap();
        assert_eq!(cfg.rank.top_k, 3);
        assert_eq!(cfg.w2v.dim, 7);
        assert_eq!(cfg.cooc_mode().unwrap(), CoocMode::Window(2));
        assert_eq!(cfg.subword.lr, 0.05);
        assert_eq!(cfg.w2v.lr, 0.025);
    }

    #[test]
    fn invalid_configs_are_validation_errors() {
        for (text, o) in [
            ("[rank]\ntop_k = 0\n", ""),
            ("[nonsense]\nx = 1\n", ""),
            ("[rank]\nbogus = 1\n", ""),
            ("", "rank.metric=manhattan"),
            ("", "nosection.key=1"),
            ("", "w2v.dim=0"),
            ("not toml at all [", ""),
        ] {
            let overrides: Vec<&str> = if o.is_empty() { vec![] } else { vec![o] };
            let err = PipelineConfig::from_toml(text, ".", &overrides).unwrap_err();
            assert!(err.is_validation(), "{:?} -> {}", (text, o), err);
        }
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let a = PipelineConfig::from_toml("", ".", &["paths.output=x"]).unwrap();
        let b = PipelineConfig::from_toml("", "/elsewhere", &["paths.output=y"]).unwrap();
        let c = PipelineConfig::from_toml("", ".", &["run.seed=2"]).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
