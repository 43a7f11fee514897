use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use propmine::corpus::tokenize_text;
use propmine::embeddings::{extract_ngrams, fnv1a_32, train, EmbeddingModel};
use propmine::fixture::{ENTITIES, UNSEEN_ADJECTIVES};
use propmine::ranker::EmbeddingRanker;
use propmine::relatedness::{count_cooccurrences, CoocMode};
use propmine::{Metric, TrainConfig, TrainMode, Vocabulary};
use propmine_bench::{fixture_sentences, fixture_text, zipf_sentences};

fn tokenize(c: &mut Criterion) {
    let text = fixture_text(1);
    let mut g = c.benchmark_group("tokenize");
    g.throughput(Throughput::Bytes(text.len() as u64));
    g.bench_function("fixture", |b| b.iter(|| tokenize_text(black_box(&text), false)));
    g.finish();
}

fn cooccurrence(c: &mut Criterion) {
    let sentences = fixture_sentences(4);
    let vocab = Vocabulary::build(&sentences, 1).unwrap();
    let tokens: u64 = sentences.iter().map(|s| s.len() as u64).sum();
    let mut g = c.benchmark_group("cooccurrence");
    g.throughput(Throughput::Elements(tokens));
    for mode in [CoocMode::Sentence, CoocMode::Window(5)] {
        g.bench_with_input(BenchmarkId::from_parameter(mode), &mode, |b, &m| {
            b.iter(|| count_cooccurrences(black_box(&sentences), &vocab, m))
        });
    }
    g.finish();
}

fn subword_hashing(c: &mut Criterion) {
    let words = ["Pikachu", "Omanyte", "electric", "prehistoric", "a"];
    c.bench_function("ngrams+fnv", |b| {
        b.iter(|| {
            words
                .iter()
                .flat_map(|w| extract_ngrams(black_box(w), 3, 6))
                .map(|g| fnv1a_32(g.as_bytes()))
                .fold(0u32, u32::wrapping_add)
        })
    });
}

fn config(mode: TrainMode, threads: usize) -> TrainConfig {
    TrainConfig {
        dim: 64,
        epochs: 1,
        buckets: 50_000,
        threads,
        ..TrainConfig::for_mode(mode)
    }
}

fn training(c: &mut Criterion) {
    let sentences = zipf_sentences(200_000, 20_000, 1);
    let tokens: u64 = sentences.iter().map(|s| s.len() as u64).sum();
    let mut g = c.benchmark_group("train_epoch");
    g.sample_size(10);
    g.throughput(Throughput::Elements(tokens));
    for mode in [TrainMode::Word, TrainMode::Subword] {
        for threads in [1, 4] {
            let cfg = config(mode, threads);
            g.bench_with_input(BenchmarkId::new(mode.to_string(), threads), &cfg, |b, cfg| {
                b.iter(|| train(black_box(&sentences), cfg).unwrap())
            });
        }
    }
    g.finish();
}

fn ranking(c: &mut Criterion) {
    let sentences = fixture_sentences(1);
    let model: EmbeddingModel = train(&sentences, &config(TrainMode::Subword, 1)).unwrap();
    let candidates: Vec<&str> = ENTITIES
        .iter()
        .flat_map(|e| e.adjectives.iter().copied())
        .chain(UNSEEN_ADJECTIVES.iter().copied())
        .collect();
    c.bench_function("rank_all_entities_subword", |b| {
        b.iter(|| {
            let ranker = EmbeddingRanker::new(&model, &candidates);
            ENTITIES
                .iter()
                .map(|e| ranker.rank(e.name, Metric::Cosine, 10).items.len())
                .sum::<usize>()
        })
    });
}

criterion_group!(benches, tokenize, cooccurrence, subword_hashing, training, ranking);
criterion_main!(benches);
