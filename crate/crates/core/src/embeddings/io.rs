//! Embedding file formats.
//!
//! # word2vec text
//!
//! ```text
//! V D[ # subword minn=3 maxn=6 buckets=2000000]
//! word f1 f2 ... fD
//! ```
//!
//! One line per vocabulary word in id order; components printed with six
//! decimals. Subword models export the composed word vectors and record
//! their n-gram settings in a trailing header comment. The n-gram table
//! itself is only stored in the native format.
//!
//! # Native binary
//!
//! All integers and floats little-endian.
//!
//! ```text
//! magic        8 bytes  "PMEMBED1"
//! mode         u8       0 = word, 1 = subword
//! dim          u32
//! minn, maxn   u32, u32
//! buckets      u64
//! seed         u64
//! window, negatives, epochs            u32 x 3
//! initial_lr, final_lr                 f32 x 2
//! min_count    u64
//! sample_t     f64
//! threads      u32
//! metadata     u32 length + UTF-8 `#meta` line
//! total_tokens u64
//! vocab_len    u64, then per word: u32 length + UTF-8 bytes + u64 count
//! input_rows   u64, then input_rows * dim f32
//! output       vocab_len * dim f32
//! ```

use std::fs;
use std::io::{self, BufRead, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::config::{TrainConfig, TrainMode};
use super::model::EmbeddingModel;
use crate::error::{Error, Result};
use crate::meta;
use crate::vocab::Vocabulary;

pub const MAGIC: &[u8; 8] = b"PMEMBED1";

/// Word vectors as read from a word2vec text file.
#[derive(Clone, Debug, PartialEq)]
pub struct TextEmbeddings {
    pub words: Vec<String>,
    pub dim: usize,
    /// Row-major, `words.len() * dim`.
    pub vectors: Vec<f64>,
    /// Anything after the two header numbers, e.g. the subword settings.
    pub header_comment: Option<String>,
}

impl TextEmbeddings {
    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        let i = self.words.iter().position(|w| w == word)?;
        Some(&self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    pub fn write<W: Write>(&self, w: W) -> io::Result<()> {
        let rows = self.vectors.chunks(self.dim.max(1));
        write_text(w, self.words.iter().map(String::as_str).zip(rows), self.words.len(), self.dim, self.header_comment.as_deref())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let src = Path::new("<word2vec text>");
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()
            .map_err(|e| Error::io(src, e))?
            .ok_or_else(|| Error::parse(src, 1, "missing header"))?;
        let (shape, comment) = match header.split_once(" #") {
            Some((s, c)) => (s, Some(format!("#{}", c))),
            None => (header.as_str(), None),
        };
        let mut nums = shape.split_whitespace().map(str::parse::<usize>);
        let (n, dim) = match (nums.next(), nums.next(), nums.next()) {
            (Some(Ok(n)), Some(Ok(d)), None) => (n, d),
            _ => return Err(Error::parse(src, 1, "expected `V D` header")),
        };

        let mut words = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n * dim);
        for (idx, line) in lines.enumerate() {
            let lineno = idx + 2;
            let line = line.map_err(|e| Error::io(src, e))?;
            let mut parts = line.split(' ');
            let word = parts
                .next()
                .filter(|w| !w.is_empty())
                .ok_or_else(|| Error::parse(src, lineno, "missing word"))?;
            let before = vectors.len();
            for p in parts {
                vectors.push(
                    p.parse::<f64>()
                        .map_err(|_| Error::parse(src, lineno, format!("bad component `{}`", p)))?,
                );
            }
            if vectors.len() - before != dim {
                return Err(Error::parse(src, lineno, format!("expected {} components", dim)));
            }
            words.push(word.to_owned());
        }
        if words.len() != n {
            return Err(Error::parse(src, 1, format!("header promises {} words, found {}", n, words.len())));
        }

        Ok(TextEmbeddings {
            words,
            dim,
            vectors,
            header_comment: comment,
        })
    }
}

fn write_text<'a, W, I, F>(w: W, rows: I, n: usize, dim: usize, comment: Option<&str>) -> io::Result<()>
where
    W: Write,
    I: Iterator<Item = (&'a str, &'a [F])>,
    F: Copy + Into<f64> + 'a,
{
    let mut w = BufWriter::new(w);
    match comment {
        Some(c) => writeln!(w, "{} {} {}", n, dim, c)?,
        None => writeln!(w, "{} {}", n, dim)?,
    }
    for (word, v) in rows {
        w.write_all(word.as_bytes())?;
        for &x in v {
            write!(w, " {:.6}", x.into())?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()
}

fn subword_comment(config: &TrainConfig) -> Option<String> {
    match config.mode {
        TrainMode::Word => None,
        TrainMode::Subword => Some(format!(
            "# subword minn={} maxn={} buckets={}",
            config.minn, config.maxn, config.buckets
        )),
    }
}

impl EmbeddingModel {
    /// Export word vectors in word2vec text format.
    pub fn write_word2vec_text<W: Write>(&self, w: W) -> io::Result<()> {
        let words = self.vocab.words();
        let vectors: Vec<Vec<f32>> = words
            .iter()
            .map(|word| {
                self.vector(word)
                    .ok()
                    .flatten()
                    .expect("vocabulary words always have vectors")
            })
            .collect();
        write_text(
            w,
            words.iter().map(String::as_str).zip(vectors.iter().map(Vec::as_slice)),
            words.len(),
            self.config.dim,
            subword_comment(&self.config).as_deref(),
        )
    }

    pub fn write_binary<W: Write>(&self, w: W) -> io::Result<()> {
        let mut w = BufWriter::new(w);
        let c = &self.config;
        w.write_all(MAGIC)?;
        w.write_u8(match c.mode {
            TrainMode::Word => 0,
            TrainMode::Subword => 1,
        })?;
        w.write_u32::<LittleEndian>(c.dim as u32)?;
        w.write_u32::<LittleEndian>(c.minn as u32)?;
        w.write_u32::<LittleEndian>(c.maxn as u32)?;
        w.write_u64::<LittleEndian>(c.buckets)?;
        w.write_u64::<LittleEndian>(c.seed)?;
        w.write_u32::<LittleEndian>(c.window as u32)?;
        w.write_u32::<LittleEndian>(c.negatives as u32)?;
        w.write_u32::<LittleEndian>(c.epochs as u32)?;
        w.write_f32::<LittleEndian>(c.initial_lr)?;
        w.write_f32::<LittleEndian>(c.final_lr)?;
        w.write_u64::<LittleEndian>(c.min_count)?;
        w.write_f64::<LittleEndian>(c.sample_t)?;
        w.write_u32::<LittleEndian>(c.threads as u32)?;

        let meta_line = meta::format_line(&self.metadata);
        w.write_u32::<LittleEndian>(meta_line.len() as u32)?;
        w.write_all(meta_line.as_bytes())?;

        w.write_u64::<LittleEndian>(self.vocab.total_tokens())?;
        w.write_u64::<LittleEndian>(self.vocab.len() as u64)?;
        for (word, &count) in self.vocab.words().iter().zip(self.vocab.counts()) {
            w.write_u32::<LittleEndian>(word.len() as u32)?;
            w.write_all(word.as_bytes())?;
            w.write_u64::<LittleEndian>(count)?;
        }

        w.write_u64::<LittleEndian>(self.num_input_rows() as u64)?;
        for &x in &self.input {
            w.write_f32::<LittleEndian>(x)?;
        }
        for &x in &self.output {
            w.write_f32::<LittleEndian>(x)?;
        }
        w.flush()
    }

    pub fn read_binary<R: Read>(mut r: R) -> io::Result<Self> {
        let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_owned());

        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        let mode = match r.read_u8()? {
            0 => TrainMode::Word,
            1 => TrainMode::Subword,
            _ => return Err(bad("bad mode")),
        };
        let dim = r.read_u32::<LittleEndian>()? as usize;
        let minn = r.read_u32::<LittleEndian>()? as usize;
        let maxn = r.read_u32::<LittleEndian>()? as usize;
        let buckets = r.read_u64::<LittleEndian>()?;
        let seed = r.read_u64::<LittleEndian>()?;
        let window = r.read_u32::<LittleEndian>()? as usize;
        let negatives = r.read_u32::<LittleEndian>()? as usize;
        let epochs = r.read_u32::<LittleEndian>()? as usize;
        let initial_lr = r.read_f32::<LittleEndian>()?;
        let final_lr = r.read_f32::<LittleEndian>()?;
        let min_count = r.read_u64::<LittleEndian>()?;
        let sample_t = r.read_f64::<LittleEndian>()?;
        let threads = r.read_u32::<LittleEndian>()? as usize;
        let config = TrainConfig {
            mode,
            dim,
            window,
            negatives,
            epochs,
            initial_lr,
            final_lr,
            min_count,
            sample_t,
            minn,
            maxn,
            buckets,
            seed,
            threads,
        };
        if dim == 0 {
            return Err(bad("zero dimension"));
        }

        let meta_len = r.read_u32::<LittleEndian>()? as usize;
        let meta_line = String::from_utf8(read_bytes(&mut r, meta_len)?).map_err(|_| bad("metadata not UTF-8"))?;
        let metadata = meta::parse_line(&meta_line).ok_or_else(|| bad("bad metadata"))?;

        let total_tokens = r.read_u64::<LittleEndian>()?;
        let vocab_len = r.read_u64::<LittleEndian>()? as usize;
        let mut entries = Vec::with_capacity(vocab_len.min(1 << 20));
        for _ in 0..vocab_len {
            let len = r.read_u32::<LittleEndian>()? as usize;
            let word = String::from_utf8(read_bytes(&mut r, len)?).map_err(|_| bad("word not UTF-8"))?;
            let count = r.read_u64::<LittleEndian>()?;
            entries.push((word, count));
        }
        let vocab = Vocabulary::from_ordered(entries, total_tokens).ok_or_else(|| bad("vocabulary not in id order"))?;

        let rows = r.read_u64::<LittleEndian>()? as usize;
        let expected_rows = match mode {
            TrainMode::Word => vocab_len,
            TrainMode::Subword => vocab_len + buckets as usize,
        };
        if rows != expected_rows {
            return Err(bad("input table size does not match header"));
        }
        let input = read_f32s(&mut r, rows * dim)?;
        let output = read_f32s(&mut r, vocab_len * dim)?;

        Ok(EmbeddingModel::from_parts(config, vocab, input, output, metadata))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_binary(file).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_binary(io::BufReader::new(file)).map_err(|e| match e.kind() {
            io::ErrorKind::InvalidData | io::ErrorKind::UnexpectedEof => Error::BadFormat {
                path: path.to_owned(),
                expected: "embedding model (magic `PMEMBED1`)",
            },
            _ => Error::io(path, e),
        })
    }
}

fn read_bytes<R: Read>(r: &mut R, len: usize) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    r.take(len as u64).read_to_end(&mut buf)?;
    if buf.len() != len {
        return Err(io::ErrorKind::UnexpectedEof.into());
    }
    Ok(buf)
}

fn read_f32s<R: Read>(r: &mut R, n: usize) -> io::Result<Vec<f32>> {
    let bytes = read_bytes(r, n * 4)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}
