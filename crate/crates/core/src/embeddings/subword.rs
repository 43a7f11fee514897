//! Character n-grams and their hash buckets.

/// Begin-of-word marker.
pub const BOW: char = '<';
/// End-of-word marker.
pub const EOW: char = '>';

const FNV_OFFSET_BASIS: u32 = 2_166_136_261;
const FNV_PRIME: u32 = 16_777_619;

/// Character n-grams of `<word>` with lengths in `minn..=maxn`.
///
/// N-grams are emitted position-major: all lengths starting at the first
/// character, then all starting at the second, and so on. Repeated n-grams
/// are kept.
pub fn extract_ngrams(word: &str, minn: usize, maxn: usize) -> Vec<String> {
    let padded: Vec<char> = std::iter::once(BOW)
        .chain(word.chars())
        .chain(std::iter::once(EOW))
        .collect();
    let mut ngrams = Vec::new();
    for start in 0..padded.len() {
        for n in minn.max(1)..=maxn {
            if start + n > padded.len() {
                break;
            }
            ngrams.push(padded[start..start + n].iter().collect());
        }
    }
    ngrams
}

/// 32-bit FNV-1a.
pub fn fnv1a_32(bytes: &[u8]) -> u32 {
    bytes.iter().fold(FNV_OFFSET_BASIS, |h, &b| {
        (h ^ u32::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// Bucket of an n-gram: FNV-1a of its UTF-8 bytes modulo `buckets`.
pub fn hash_ngram(ngram: &str, buckets: u64) -> u64 {
    u64::from(fnv1a_32(ngram.as_bytes())) % buckets
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubwordIndex {
    pub minn: usize,
    pub maxn: usize,
    pub buckets: u64,
}

impl SubwordIndex {
    pub fn new(minn: usize, maxn: usize, buckets: u64) -> Self {
        SubwordIndex {
            minn,
            maxn,
            buckets,
        }
    }

    /// Buckets of every n-gram of `word`, in n-gram order.
    pub fn buckets(&self, word: &str) -> Vec<u64> {
        extract_ngrams(word, self.minn, self.maxn)
            .iter()
            .map(|g| hash_ngram(g, self.buckets))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use proptest::prelude::*;

    use super::*;

    #[test]
    fn ngrams_of_cute() {
        let grams = extract_ngrams("cute", 3, 6);
        assert_eq!(
            grams,
            [
                "<cu", "<cut", "<cute", "<cute>", "cut", "cute", "cute>", "ute", "ute>", "te>"
            ]
        );
        let by_length: BTreeSet<&str> = [
            "<cu", "cut", "ute", "te>", "<cut", "cute", "ute>", "<cute", "cute>", "<cute>",
        ]
        .into_iter()
        .collect();
        assert_eq!(grams.iter().map(String::as_str).collect::<BTreeSet<_>>(), by_length);
    }

    #[test]
    fn short_words() {
        assert_eq!(extract_ngrams("a", 3, 6), ["<a>"]);
        assert_eq!(extract_ngrams("ab", 3, 3), ["<ab", "ab>"]);
        assert!(extract_ngrams("a", 4, 6).is_empty());
    }

    #[test]
    fn ngrams_count_characters_not_bytes() {
        assert_eq!(extract_ngrams("é", 3, 3), ["<é>"]);
    }

    #[test]
    fn fnv_vectors() {
        // Published FNV-1a 32-bit test vectors.
        assert_eq!(fnv1a_32(b""), 0x811C_9DC5);
        assert_eq!(fnv1a_32(b"a"), 0xE40C_292C);
        assert_eq!(fnv1a_32(b"foobar"), 0xBF9C_F968);
        assert_eq!(hash_ngram("a", 1 << 32), 3_826_002_220);
        assert_eq!(hash_ngram("", 1000), 2_166_136_261 % 1000);
        assert_eq!(hash_ngram("anything", 1), 0);
    }

    proptest! {
        #[test]
        fn ngram_lengths_in_range(word in "\\PC{1,12}", minn in 1usize..5, extra in 0usize..4) {
            let maxn = minn + extra;
            let padded = word.chars().count() + 2;
            for g in extract_ngrams(&word, minn, maxn) {
                let n = g.chars().count();
                prop_assert!(n >= minn && n <= maxn.min(padded));
            }
            let full = format!("<{}>", word);
            let has_full = extract_ngrams(&word, minn, maxn).contains(&full);
            prop_assert_eq!(has_full, padded <= maxn && padded >= minn);
        }

        #[test]
        fn buckets_in_range(word in "\\PC{1,12}", buckets in 1u64..5000) {
            let idx = SubwordIndex::new(3, 6, buckets);
            prop_assert!(idx.buckets(&word).iter().all(|&b| b < buckets));
        }
    }
}
