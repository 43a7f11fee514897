use std::fs;
use std::path::Path;

use propmine::embeddings::io::TextEmbeddings;
use propmine::expansion::{expand_properties, AssociationResource};
use propmine::fixture::{self, ABSENT_ENTITY, ENTITIES, SHORT_STORY};
use propmine::pipeline::{self, Layout, PipelineConfig};
use propmine::{Error, ModelTag, TfIdfModel};

fn fixture_config(dir: &Path, overrides: &[&str]) -> PipelineConfig {
    fixture::write_fixture(dir).unwrap();
    PipelineConfig::load(dir.join(fixture::FILE_CONFIG), overrides).unwrap()
}

/// Two entities, three stories, tiny models.
fn toy(dir: &Path, overrides: &[&str]) -> PipelineConfig {
    fs::create_dir_all(dir.join("stories")).unwrap();
    fs::write(dir.join("descriptions.tsv"), "Pikachu\tA cute yellow electric mouse.\nOnix\tA huge rocky snake.\n").unwrap();
    fs::write(dir.join("adjectives.txt"), "cute\nyellow\nelectric\nhuge\nrocky\ntall\n").unwrap();
    fs::write(dir.join("associations.tsv"), "cute\tkitten\t2\nadorable\tkitten\t1\nrocky\tcave\t3\nstony\tcave\t1\n").unwrap();
    for (i, s) in [
        "Pikachu was cute and yellow. Pikachu is electric. Onix was huge.",
        "Onix is rocky and huge. Pikachu was yellow! Onix was rocky.",
        "The electric Pikachu met the rocky Onix. Pikachu was cute.",
    ]
    .iter()
    .enumerate()
    {
        fs::write(dir.join("stories").join(format!("s{}.txt", i)), s).unwrap();
    }
    let config = "[corpus]\nmin_words = 5\n[w2v]\ndim = 8\nmin_count = 1\n[subword]\ndim = 8\nmin_count = 1\nbuckets = 100\n[rank]\ntop_k = 3\nmodels = [\"relatedness\", \"w2v\"]\n";
    fs::write(dir.join("propmine.toml"), config).unwrap();
    PipelineConfig::load(dir.join("propmine.toml"), overrides).unwrap()
}

fn data_lines(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split('\t').map(str::to_owned).collect())
        .collect()
}

#[test]
fn prepare_is_deterministic_and_filters_short_stories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config(dir.path(), &[]);
    let layout = Layout::new(&cfg);
    let report = pipeline::prepare(&cfg).unwrap();
    assert_eq!(report.filtered_out, 1);
    let first: Vec<Vec<u8>> = [layout.corpus(), layout.vocab(), layout.manifest()].iter().map(|p| fs::read(p).unwrap()).collect();
    pipeline::prepare(&cfg).unwrap();
    let second: Vec<Vec<u8>> = [layout.corpus(), layout.vocab(), layout.manifest()].iter().map(|p| fs::read(p).unwrap()).collect();
    assert_eq!(first, second);

    let manifest = fs::read_to_string(layout.manifest()).unwrap();
    assert!(!manifest.contains(SHORT_STORY));
    assert_eq!(data_lines(&layout.manifest()).len(), report.documents);
}

#[test]
fn prepare_errors() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir_all(dir.path().join("stories")).unwrap();
    let cfg = PipelineConfig::from_toml::<&str>("", dir.path(), &[]).unwrap();
    let err = pipeline::prepare(&cfg).unwrap_err();
    assert!(err.to_string().contains("no documents after filtering"), "{}", err);
    assert!(!err.is_validation());

    let cfg = PipelineConfig::from_toml::<&str>("[paths]\nstories = \"nowhere\"\n", dir.path(), &[]).unwrap();
    let err = pipeline::prepare(&cfg).unwrap_err();
    assert!(matches!(err, Error::MissingInput { .. }), "{}", err);
    assert!(err.is_validation());
}

#[test]
fn train_requires_cache_except_tfidf() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path(), &[]);
    for tag in [ModelTag::W2v, ModelTag::Subword, ModelTag::Relatedness] {
        let err = pipeline::train_model(&cfg, tag).unwrap_err();
        assert!(err.to_string().contains("run `propmine prepare`"), "{}", err);
    }
    let path = pipeline::train_model(&cfg, ModelTag::Tfidf).unwrap();
    let model = TfIdfModel::load(&path).unwrap();
    assert_eq!(model.entities(), ["Pikachu", "Onix"]);
    assert!(model.metadata.contains_key("config_hash"));
}

#[test]
fn window_mode_is_recorded_in_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path(), &["relatedness.mode=window:2"]);
    pipeline::prepare(&cfg).unwrap();
    let path = pipeline::train_model(&cfg, ModelTag::Relatedness).unwrap();
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("#mode=window:2 #N="), "{}", text.lines().next().unwrap());
}

#[test]
fn seeded_training_reproduces_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path(), &["run.seed=7"]);
    pipeline::prepare(&cfg).unwrap();
    for tag in [ModelTag::W2v, ModelTag::Subword] {
        let p = pipeline::train_model(&cfg, tag).unwrap();
        let a = fs::read(&p).unwrap();
        pipeline::train_model(&cfg, tag).unwrap();
        assert_eq!(a, fs::read(&p).unwrap(), "{}", tag);
    }
}

#[test]
fn rank_output_contract() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path(), &[]);
    pipeline::prepare(&cfg).unwrap();
    for tag in cfg.models().unwrap() {
        pipeline::train_model(&cfg, tag).unwrap();
    }
    let written = pipeline::rank(&cfg).unwrap();
    assert_eq!(written.len(), 3);
    let layout = Layout::new(&cfg);
    let cmp = data_lines(&layout.comparison());
    assert!(!cmp.is_empty() && cmp.len() <= 2 * 2 * 3);
    assert!(cmp.iter().all(|r| r.len() == 6));

    let hash = cfg.hash();
    for tag in cfg.models().unwrap() {
        let rows = data_lines(&layout.ranked(tag));
        for entity in ["Pikachu", "Onix"] {
            let n = rows.iter().filter(|r| r[0] == entity).count();
            assert!((1..=3).contains(&n), "{} {} has {} rows", tag, entity, n);
        }
        for r in &rows {
            assert_eq!(r.len(), 7);
            assert_eq!(r[4], tag.to_string());
            assert_eq!(r[6], hash);
        }
    }
}

#[test]
fn rank_reports_corrupt_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path(), &[]);
    pipeline::prepare(&cfg).unwrap();
    pipeline::train_model(&cfg, ModelTag::Relatedness).unwrap();
    let layout = Layout::new(&cfg);
    fs::write(layout.model(ModelTag::W2v), b"garbage").unwrap();
    let err = pipeline::rank(&cfg).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("w2v.bin") && msg.contains("embedding model"), "{}", msg);
}

#[test]
fn unmodeled_entity_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config(dir.path(), &[]);
    pipeline::run_all(&cfg).unwrap();
    let layout = Layout::new(&cfg);
    let rows = data_lines(&layout.ranked(ModelTag::W2v));
    let missing: Vec<_> = rows.iter().filter(|r| r[0] == ABSENT_ENTITY).collect();
    assert_eq!(missing.len(), 1);
    assert_eq!(missing[0][5], "entity unmodeled");
    assert!(missing[0][1].is_empty());

    // Subword composes the name from n-grams instead.
    let rows = data_lines(&layout.ranked(ModelTag::Subword));
    assert!(rows.iter().filter(|r| r[0] == ABSENT_ENTITY).all(|r| r[5] == "ok"));

    let top_k = cfg.rank.top_k;
    for tag in ModelTag::ALL {
        let rows = data_lines(&layout.ranked(tag));
        for e in ENTITIES {
            assert!(rows.iter().filter(|r| r[0] == e.name).count() <= top_k);
        }
    }
}

#[test]
fn expand_uses_available_seeds_and_respects_k() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path(), &["expand.k=1"]);
    pipeline::prepare(&cfg).unwrap();
    pipeline::train_model(&cfg, ModelTag::Relatedness).unwrap();
    pipeline::train_model(&cfg, ModelTag::W2v).unwrap();
    pipeline::rank(&cfg).unwrap();
    pipeline::expand(&cfg).unwrap();

    let layout = Layout::new(&cfg);
    let resource = AssociationResource::load(dir.path().join("associations.tsv")).unwrap();
    for tag in cfg.models().unwrap() {
        let ranked = pipeline::read_ranked_tsv(&layout.ranked(tag)).unwrap();
        let expanded = data_lines(&layout.expanded(tag));
        for (entity, rows) in &ranked {
            // Rankings are at most three long, so all of them seed.
            assert!(rows.len() <= 3);
            let seeds: Vec<&str> = rows.iter().map(|r| r.adjective.as_str()).collect();
            let want = expand_properties(&seeds, &resource, 1);
            let got: Vec<_> = expanded.iter().filter(|r| &r[0] == entity).collect();
            assert!(!got.is_empty() && got.len() <= 1);
            if let Some((p, _)) = want.items.first() {
                assert_eq!(&got[0][2], p);
            } else {
                assert!(got[0][2].is_empty());
            }
        }
    }
}

#[test]
fn expand_requires_resource() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path(), &["paths.associations=missing.tsv"]);
    let err = pipeline::expand(&cfg).unwrap_err();
    assert!(err.is_validation(), "{}", err);
}

#[test]
fn export_word2vec_text() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir_all(dir.path().join("stories")).unwrap();
    fs::write(dir.path().join("stories/s.txt"), "a b c. c b a. b c a.").unwrap();
    let cfg = PipelineConfig::from_toml::<&str>(
        "[corpus]\nmin_words = 1\n[w2v]\ndim = 4\nmin_count = 1\n[subword]\ndim = 4\nmin_count = 1\nbuckets = 50\n",
        dir.path(),
        &[],
    )
    .unwrap();
    pipeline::prepare(&cfg).unwrap();
    let layout = Layout::new(&cfg);

    let model = pipeline::train_model(&cfg, ModelTag::W2v).unwrap();
    let out = dir.path().join("w2v.vec");
    pipeline::export(&model, &out).unwrap();
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert_eq!(text.lines().next().unwrap(), "3 4");

    // Re-import, re-export: same bytes.
    let parsed = TextEmbeddings::read(text.as_bytes()).unwrap();
    let mut again = Vec::new();
    parsed.write(&mut again).unwrap();
    assert_eq!(String::from_utf8(again).unwrap(), text);

    let sub = pipeline::train_model(&cfg, ModelTag::Subword).unwrap();
    pipeline::export(&sub, &out).unwrap();
    let header = fs::read_to_string(&out).unwrap().lines().next().unwrap().to_owned();
    assert_eq!(header, "3 4 # subword minn=3 maxn=6 buckets=50");

    pipeline::train_model(&cfg, ModelTag::Relatedness).unwrap();
    let err = pipeline::export(&layout.model(ModelTag::Relatedness), &out).unwrap_err();
    assert!(err.to_string().contains("not an embedding model"), "{}", err);
}
