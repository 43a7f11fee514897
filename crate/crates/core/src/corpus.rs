//! Document ingestion and tokenization.
//!
//! Two inputs are supported: an entity-description TSV (`entity<TAB>text`,
//! UTF-8, no header) and a story directory holding one plaintext story per
//! file. Tokenization is rule based and deterministic:
//!
//! * sentences end at `.`, `!` or `?` followed by whitespace or end of text;
//! * words are whitespace separated, stripped of leading and trailing
//!   characters other than letters, digits and `-`, and dropped when no
//!   letter or digit remains.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader};
use std::ops::Deref;
use std::path::{Path, PathBuf};

use log::warn;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DocumentKind {
    EntityDescription,
    Story,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub kind: DocumentKind,
    /// Set exactly when `kind` is `EntityDescription`.
    pub entity: Option<String>,
    pub text: String,
}

impl Document {
    pub fn entity_description(entity: impl Into<String>, text: impl Into<String>) -> Self {
        let entity = entity.into();
        Document {
            id: entity.clone(),
            kind: DocumentKind::EntityDescription,
            entity: Some(entity),
            text: text.into(),
        }
    }

    pub fn story(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            kind: DocumentKind::Story,
            entity: None,
            text: text.into(),
        }
    }

    /// Number of whitespace-separated words.
    pub fn word_count(&self) -> usize {
        self.text.split_whitespace().count()
    }
}

/// An ordered run of tokens.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Sentence(Vec<String>);

impl Sentence {
    pub fn new(tokens: Vec<String>) -> Self {
        debug_assert!(tokens
            .iter()
            .all(|t| !t.is_empty() && !t.contains(char::is_whitespace)));
        Sentence(tokens)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }
}

impl Deref for Sentence {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl From<Vec<String>> for Sentence {
    fn from(tokens: Vec<String>) -> Self {
        Sentence::new(tokens)
    }
}

/// Read an entity-description TSV.
pub fn load_entity_descriptions(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    let mut seen = HashSet::new();

    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        let (entity, text) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, lineno, "expected `entity<TAB>description`"))?;
        if entity.is_empty() {
            return Err(Error::parse(path, lineno, "empty entity name"));
        }
        if !seen.insert(entity.to_owned()) {
            return Err(Error::DuplicateEntity(entity.to_owned()));
        }
        docs.push(Document::entity_description(entity, text));
    }

    Ok(docs)
}

/// Streams the stories of a directory, one document per top-level file.
///
/// Files are visited in lexicographic order of their names. Hidden files
/// and subdirectories are ignored. Files that cannot be read as UTF-8 are
/// skipped with a warning and counted in [`StoryReader::skipped`].
pub struct StoryReader {
    files: std::vec::IntoIter<PathBuf>,
    skipped: usize,
}

impl StoryReader {
    pub fn skipped(&self) -> usize {
        self.skipped
    }
}

impl Iterator for StoryReader {
    type Item = Document;

    fn next(&mut self) -> Option<Document> {
        for path in self.files.by_ref() {
            match fs::read(&path).map(String::from_utf8) {
                Ok(Ok(text)) => {
                    let id = path
                        .file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    return Some(Document::story(id, text));
                }
                Ok(Err(_)) => {
                    warn!("skipping {}: invalid UTF-8", path.display());
                    self.skipped += 1;
                }
                Err(err) => {
                    warn!("skipping {}: {}", path.display(), err);
                    self.skipped += 1;
                }
            }
        }
        None
    }
}

pub fn load_story_corpus(dir: impl AsRef<Path>) -> Result<StoryReader> {
    let dir = dir.as_ref();
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let hidden = entry.file_name().to_string_lossy().starts_with('.');
        let is_file = entry.file_type().map(|t| t.is_file()).unwrap_or(false);
        if is_file && !hidden {
            files.push(entry.path());
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));

    Ok(StoryReader {
        files: files.into_iter(),
        skipped: 0,
    })
}

/// Keep documents with at least `min_words` whitespace-separated words.
pub fn filter_min_words<I>(docs: I, min_words: usize) -> impl Iterator<Item = Document>
where
    I: IntoIterator<Item = Document>,
{
    docs.into_iter().filter(move |d| d.word_count() >= min_words)
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Split text into raw sentences. Terminators stay with their sentence.
pub fn tokenize_sentences(text: &str) -> Vec<&str> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();

    while let Some((idx, c)) = chars.next() {
        if !is_terminator(c) {
            continue;
        }
        let at_boundary = match chars.peek() {
            None => true,
            Some(&(_, next)) => next.is_whitespace(),
        };
        if at_boundary {
            let end = idx + c.len_utf8();
            let sentence = text[start..end].trim();
            if !sentence.is_empty() {
                sentences.push(sentence);
            }
            start = end;
        }
    }

    let rest = text[start..].trim();
    if !rest.is_empty() {
        sentences.push(rest);
    }

    sentences
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-'
}

/// Split a sentence into word tokens. The result may be empty.
pub fn tokenize_words(sentence: &str, lowercase: bool) -> Sentence {
    let tokens = sentence
        .split_whitespace()
        .map(|raw| raw.trim_matches(|c: char| !is_word_char(c)))
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .map(|t| if lowercase { t.to_lowercase() } else { t.to_owned() })
        .collect();
    Sentence(tokens)
}

/// Sentence- then word-tokenize a text, dropping sentences without tokens.
pub fn tokenize_text(text: &str, lowercase: bool) -> Vec<Sentence> {
    tokenize_sentences(text)
        .into_iter()
        .map(|s| tokenize_words(s, lowercase))
        .filter(|s| !s.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use proptest::prelude::*;

    use super::*;

    fn toks(s: &Sentence) -> Vec<&str> {
        s.iter().map(String::as_str).collect()
    }

    #[test]
    fn loads_descriptions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.tsv");
        fs::write(&path, "Pikachu\tPikachu is a cute electric mouse.\n").unwrap();
        let docs = load_entity_descriptions(&path).unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].entity.as_deref(), Some("Pikachu"));
        assert_eq!(docs[0].id, "Pikachu");
        assert_eq!(docs[0].kind, DocumentKind::EntityDescription);
        assert_eq!(docs[0].text, "Pikachu is a cute electric mouse.");
    }

    #[test]
    fn empty_description_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.tsv");
        fs::write(&path, "").unwrap();
        assert!(load_entity_descriptions(&path).unwrap().is_empty());
    }

    #[test]
    fn description_without_tab_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.tsv");
        fs::write(&path, "Pikachu is cute\n").unwrap();
        match load_entity_descriptions(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn duplicate_entity_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.tsv");
        fs::write(&path, "Abra\tpsychic\nAbra\tsleepy\n").unwrap();
        assert!(matches!(
            load_entity_descriptions(&path),
            Err(Error::DuplicateEntity(e)) if e == "Abra"
        ));
    }

    #[test]
    fn stories_in_lexicographic_order_top_level_only() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["c.txt", "a.txt", "b.txt"] {
            fs::write(dir.path().join(name), format!("story {}", name)).unwrap();
        }
        fs::create_dir(dir.path().join("nested")).unwrap();
        fs::write(dir.path().join("nested/d.txt"), "hidden away").unwrap();

        let ids: Vec<_> = load_story_corpus(dir.path()).unwrap().map(|d| d.id).collect();
        assert_eq!(ids, ["a.txt", "b.txt", "c.txt"]);
    }

    #[test]
    fn invalid_utf8_story_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("good.txt"), "fine").unwrap();
        let mut f = fs::File::create(dir.path().join("bad.txt")).unwrap();
        f.write_all(&[b'o', b'k', 0xff, b'!']).unwrap();
        drop(f);

        let mut reader = load_story_corpus(dir.path()).unwrap();
        let docs: Vec<_> = reader.by_ref().collect();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].kind, DocumentKind::Story);
        assert_eq!(reader.skipped(), 1);
    }

    #[test]
    fn empty_story_dir() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(load_story_corpus(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn min_words_boundary() {
        let doc = |n: usize| Document::story(n.to_string(), vec!["w"; n].join(" "));
        let kept: Vec<_> = filter_min_words(vec![doc(9_999), doc(10_000)], 10_000)
            .map(|d| d.id)
            .collect();
        assert_eq!(kept, ["10000"]);
        assert_eq!(filter_min_words(vec![doc(0), doc(3)], 0).count(), 2);
    }

    #[test]
    fn sentence_splitting() {
        assert_eq!(tokenize_sentences("A b. C d!"), ["A b.", "C d!"]);
        assert!(tokenize_sentences("").is_empty());
        assert_eq!(tokenize_sentences("Mr. X ran."), ["Mr.", "X ran."]);
        assert_eq!(tokenize_sentences("What?! No way"), ["What?!", "No way"]);
        assert_eq!(tokenize_sentences("3.14 is pi.  "), ["3.14 is pi."]);
        assert!(tokenize_sentences("   \n ").is_empty());
    }

    #[test]
    fn word_splitting() {
        assert_eq!(toks(&tokenize_words("cute, yellow!", false)), ["cute", "yellow"]);
        assert_eq!(toks(&tokenize_words("crab-like foe", false)), ["crab-like", "foe"]);
        assert!(tokenize_words("--- !!", false).is_empty());
        assert_eq!(toks(&tokenize_words("\"Pikachu's\" Day", true)), ["pikachu's", "day"]);
        assert_eq!(toks(&tokenize_words("Pokémon!", false)), ["Pokémon"]);
    }

    proptest! {
        #[test]
        fn tokens_are_well_formed(text in "\\PC{0,80}", lower in any::<bool>()) {
            for sentence in tokenize_text(&text, lower) {
                prop_assert!(!sentence.is_empty());
                for t in sentence.iter() {
                    prop_assert!(!t.is_empty());
                    prop_assert!(!t.contains(char::is_whitespace));
                }
            }
        }

        #[test]
        fn tokens_come_from_source(text in "[a-zA-Z0-9 .,!?'-]{0,80}") {
            for sentence in tokenize_text(&text, false) {
                for t in sentence.iter() {
                    prop_assert!(text.contains(t.as_str()));
                }
            }
        }

        #[test]
        fn filter_yields_subsequence(counts in proptest::collection::vec(0usize..20, 0..12), min in 0usize..20) {
            let docs: Vec<_> = counts
                .iter()
                .enumerate()
                .map(|(i, &n)| Document::story(i.to_string(), vec!["x"; n].join(" ")))
                .collect();
            let kept: Vec<_> = filter_min_words(docs.clone(), min).collect();
            let expected: Vec<_> = docs.into_iter().filter(|d| d.word_count() >= min).collect();
            prop_assert_eq!(kept, expected);
        }
    }
}
