//! Shared inputs for the benchmarks in `benches/`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use propmine::corpus::tokenize_text;
use propmine::fixture::{Fixture, FixtureOptions};

/// Fixture stories joined into one text, `scale` times the default size.
pub fn fixture_text(scale: usize) -> String {
    let f = Fixture::generate(&FixtureOptions {
        stories: 24 * scale,
        ..FixtureOptions::default()
    });
    f.stories.into_iter().map(|(_, s)| s).collect::<Vec<_>>().join("\n")
}

pub fn fixture_sentences(scale: usize) -> Vec<Vec<String>> {
    tokenize_text(&fixture_text(scale), false)
        .into_iter()
        .map(|s| s.into_tokens())
        .collect()
}

/// Random sentences over a Zipf-distributed vocabulary, closer to natural
/// text than the fixture's few dozen word types.
pub fn zipf_sentences(tokens: usize, vocab: usize, seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zipf = Zipf::new(vocab as f64, 1.0).expect("valid Zipf parameters");
    let mut out = Vec::new();
    let mut left = tokens;
    while left > 0 {
        let len = rng.random_range(5..=25).min(left);
        out.push((0..len).map(|_| format!("w{}", zipf.sample(&mut rng) as u64)).collect());
        left -= len;
    }
    out
}
