//! Deterministic synthetic corpus for tests, benchmarks and demos.
//!
//! Every entity co-occurs only with its own adjective set in the stories.
//! One entity appears in the descriptions but never in the stories, one
//! story is too short to survive the word filter, and the lexicon contains
//! adjectives that never occur in the stories at all.

use std::fs;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub struct FixtureEntity {
    pub name: &'static str,
    pub adjectives: &'static [&'static str],
    /// Nouns tied to this entity's adjectives in the association resource.
    pub nouns: &'static [&'static str],
    /// Adjectives only the association resource knows about.
    pub extra: &'static [&'static str],
}

pub const ENTITIES: &[FixtureEntity] = &[
    FixtureEntity { name: "Pikachu", adjectives: &["electric", "yellow", "cute"], nouns: &["spark", "battery", "lemon", "kitten"], extra: &["shocking", "golden"] },
    FixtureEntity { name: "Onix", adjectives: &["rocky", "huge", "heavy"], nouns: &["boulder", "mountain", "cave"], extra: &["stony", "massive"] },
    FixtureEntity { name: "Omanyte", adjectives: &["fossil", "prehistoric", "spiral"], nouns: &["shell", "museum", "ammonite"], extra: &["ancient", "coiled"] },
    FixtureEntity { name: "Horsea", adjectives: &["bubbly", "aquatic", "tiny"], nouns: &["reef", "wave", "seahorse"], extra: &["watery", "marine"] },
    FixtureEntity { name: "Abra", adjectives: &["psychic", "sleepy", "hypnotic"], nouns: &["dream", "spoon", "mind"], extra: &["mystic", "telepathic"] },
    FixtureEntity { name: "Magmar", adjectives: &["fiery", "molten", "fierce"], nouns: &["volcano", "flame", "lava"], extra: &["scorching", "blazing"] },
    FixtureEntity { name: "Pidgeot", adjectives: &["feathered", "swift", "majestic"], nouns: &["sky", "wing", "nest"], extra: &["soaring", "airborne"] },
    FixtureEntity { name: "Jolteon", adjectives: &["spiky", "charged", "agile"], nouns: &["needle", "thunder", "fox"], extra: &["prickly", "static"] },
];

/// Described but never mentioned in any story.
pub const ABSENT_ENTITY: &str = "Missingno";

/// Lexicon adjectives used in stories without any entity nearby.
pub const DISTRACTORS: &[&str] = &["sunny", "quiet", "ordinary", "happy", "tired", "green", "old", "rainy"];

/// Lexicon adjectives that never occur in the stories.
pub const UNSEEN_ADJECTIVES: &[&str] = &["omani", "swime", "squirtish", "crab-like", "glitchy"];

/// Shared by every description, so TF-IDF pushes them down.
const GENERIC: &[&str] = &["original", "powerful", "strange"];

const PLACES: &[&str] = &["forest", "town", "river", "field", "road", "garden"];
const PEOPLE: &[&str] = &["Ash", "Misty", "Brock", "the trainer", "the professor", "a child"];

pub const FILE_DESCRIPTIONS: &str = "descriptions.tsv";
pub const DIR_STORIES: &str = "stories";
pub const FILE_ADJECTIVES: &str = "adjectives.txt";
pub const FILE_ASSOCIATIONS: &str = "associations.tsv";
pub const FILE_CONFIG: &str = "propmine.toml";

/// Name of the story that falls below the word filter.
pub const SHORT_STORY: &str = "story_short.txt";

#[derive(Clone, Debug)]
pub struct FixtureOptions {
    pub seed: u64,
    pub stories: usize,
    pub sentences_per_story: usize,
}

impl Default for FixtureOptions {
    fn default() -> Self {
        FixtureOptions {
            seed: 42,
            stories: 24,
            sentences_per_story: 120,
        }
    }
}

/// All fixture files as in-memory text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub descriptions: String,
    pub stories: Vec<(String, String)>,
    pub adjectives: String,
    pub associations: String,
    pub config: String,
}

impl Fixture {
    pub fn generate(opts: &FixtureOptions) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut stories: Vec<(String, String)> = (0..opts.stories)
            .map(|i| (format!("story_{:03}.txt", i), story(&mut rng, opts.sentences_per_story)))
            .collect();
        stories.push((SHORT_STORY.to_owned(), "Pikachu was cute. The end.\n".to_owned()));
        Fixture {
            descriptions: descriptions(),
            stories,
            adjectives: adjectives(),
            associations: associations(),
            config: CONFIG.to_owned(),
        }
    }

    /// Total size in bytes of all files.
    pub fn size(&self) -> usize {
        self.descriptions.len()
            + self.adjectives.len()
            + self.associations.len()
            + self.config.len()
            + self.stories.iter().map(|(_, s)| s.len()).sum::<usize>()
    }

    /// Writes the fixture under `dir`, creating it if needed.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let stories = dir.join(DIR_STORIES);
        fs::create_dir_all(&stories).map_err(|e| Error::io(&stories, e))?;
        let put = |path: &Path, text: &str| fs::write(path, text).map_err(|e| Error::io(path, e));
        put(&dir.join(FILE_DESCRIPTIONS), &self.descriptions)?;
        put(&dir.join(FILE_ADJECTIVES), &self.adjectives)?;
        put(&dir.join(FILE_ASSOCIATIONS), &self.associations)?;
        put(&dir.join(FILE_CONFIG), &self.config)?;
        for (name, text) in &self.stories {
            put(&stories.join(name), text)?;
        }
        Ok(())
    }
}

/// Generate with default options and write to `dir`.
pub fn write_fixture(dir: impl AsRef<Path>) -> Result<Fixture> {
    let f = Fixture::generate(&FixtureOptions::default());
    f.write(dir)?;
    Ok(f)
}

fn pick<'a, R: Rng>(rng: &mut R, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).expect("nonempty")
}

fn two<'a, R: Rng>(rng: &mut R, xs: &[&'a str]) -> (&'a str, &'a str) {
    let mut v = xs.to_vec();
    v.shuffle(rng);
    (v[0], v[1])
}

fn story<R: Rng>(rng: &mut R, sentences: usize) -> String {
    // Each story features a few entities.
    let mut cast: Vec<&FixtureEntity> = ENTITIES.iter().collect();
    cast.shuffle(rng);
    cast.truncate(3);

    let mut out = String::new();
    for _ in 0..sentences {
        let s = if rng.random_bool(0.2) {
            neutral_sentence(rng)
        } else {
            let e = cast[rng.random_range(0..cast.len())];
            entity_sentence(rng, e)
        };
        out.push_str(&s);
        out.push(if rng.random_bool(0.3) { '\n' } else { ' ' });
    }
    if !out.ends_with('\n') {
        out.push('\n');
    }
    out
}

fn entity_sentence<R: Rng>(rng: &mut R, e: &FixtureEntity) -> String {
    let (a, b) = two(rng, e.adjectives);
    let n = e.name;
    let place = pick(rng, PLACES);
    let who = pick(rng, PEOPLE);
    match rng.random_range(0..6) {
        0 => format!("{} was {} and {}.", n, a, b),
        1 => format!("The {} {} walked into the {}.", a, n, place),
        2 => format!("{} said that {} looked very {} today.", who, n, a),
        3 => format!("Everyone knew {} was {}!", n, a),
        4 => format!("Was {} always this {} and {}?", n, a, b),
        _ => format!("Near the {} the {} {} felt {}.", place, b, n, a),
    }
}

fn neutral_sentence<R: Rng>(rng: &mut R) -> String {
    let d = pick(rng, DISTRACTORS);
    let place = pick(rng, PLACES);
    let who = pick(rng, PEOPLE);
    match rng.random_range(0..3) {
        0 => format!("It was a {} day by the {}.", d, place),
        1 => format!("{} felt {} after the long walk.", who, d),
        _ => format!("The {} was {} and calm.", place, d),
    }
}

fn descriptions() -> String {
    let mut out = String::new();
    for (i, e) in ENTITIES.iter().enumerate() {
        let g = GENERIC[i % GENERIC.len()];
        let [a, b, c] = [e.adjectives[0], e.adjectives[1], e.adjectives[2]];
        out.push_str(&format!(
            "{}\t{} is an original creature. It is {} and {}, and people call it {} and {}. A {} {} is rarely seen.\n",
            e.name, e.name, a, b, g, c, a, e.name
        ));
    }
    out.push_str(&format!(
        "{}\t{} is a strange and original glitch. Nobody has met a strange {}.\n",
        ABSENT_ENTITY, ABSENT_ENTITY, ABSENT_ENTITY
    ));
    out
}

fn adjectives() -> String {
    let mut words: Vec<&str> = ENTITIES.iter().flat_map(|e| e.adjectives.iter().copied()).collect();
    words.extend(DISTRACTORS);
    words.extend(UNSEEN_ADJECTIVES);
    words.extend(GENERIC);
    let mut out = String::from("# candidate adjectives, one per line\n");
    for w in words {
        out.push_str(w);
        out.push('\n');
    }
    out
}

fn associations() -> String {
    let mut out = String::new();
    for e in ENTITIES {
        for (i, adj) in e.adjectives.iter().chain(e.extra).enumerate() {
            for (j, noun) in e.nouns.iter().enumerate() {
                // Vary the weights so scores are not all tied.
                let w = 1 + (i + 2 * j) % 4;
                out.push_str(&format!("{}\t{}\t{}\n", adj, noun, w));
            }
        }
    }
    // A weak cross-link so some expansions cross entity groups.
    out.push_str("cute\tsky\t1\nswift\tkitten\t1\n");
    out
}

const CONFIG: &str = r#"# Pipeline configuration for the synthetic fixture.
# Paths are relative to this file.

[paths]
descriptions = "descriptions.tsv"
stories = "stories"
adjectives = "adjectives.txt"
associations = "associations.tsv"
output = "out"

[corpus]
min_words = 50
lowercase = false

[w2v]
dim = 32
window = 5
negatives = 5
epochs = 10
min_count = 5
threads = 1

[subword]
dim = 32
window = 5
negatives = 5
epochs = 10
min_count = 5
minn = 3
maxn = 6
buckets = 20000
threads = 1

[relatedness]
mode = "sentence"
min_count = 1

[rank]
top_k = 5
metric = "dot"

[expand]
k = 5
seeds = 10

[run]
seed = 1
"#;
