use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::vocab::{DEFAULT_MIN_COUNT, DEFAULT_SAMPLE_T};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrainMode {
    /// One vector per vocabulary word.
    Word,
    /// Word vector plus hashed character n-gram vectors.
    Subword,
}

impl fmt::Display for TrainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainMode::Word => "word",
            TrainMode::Subword => "subword",
        })
    }
}

impl FromStr for TrainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(TrainMode::Word),
            "subword" => Ok(TrainMode::Subword),
            _ => Err(Error::Config(format!("unknown training mode `{}`", s))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub mode: TrainMode,
    pub dim: usize,
    /// Maximum context half-width; the effective width is drawn uniformly
    /// from `1..=window` per center token.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f32,
    pub final_lr: f32,
    pub min_count: u64,
    pub sample_t: f64,
    pub minn: usize,
    pub maxn: usize,
    pub buckets: u64,
    pub seed: u64,
    pub threads: usize,
}

impl TrainConfig {
    /// word2vec skip-gram defaults.
    pub fn word() -> Self {
        TrainConfig {
            mode: TrainMode::Word,
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            final_lr: 0.0001,
            min_count: DEFAULT_MIN_COUNT,
            sample_t: DEFAULT_SAMPLE_T,
            minn: 3,
            maxn: 6,
            buckets: 2_000_000,
            seed: 1,
            threads: 1,
        }
    }

    /// fastText skip-gram defaults.
    pub fn subword() -> Self {
        TrainConfig {
            mode: TrainMode::Subword,
            initial_lr: 0.05,
            final_lr: 0.0,
            ..Self::word()
        }
    }

    pub fn for_mode(mode: TrainMode) -> Self {
        match mode {
            TrainMode::Word => Self::word(),
            TrainMode::Subword => Self::subword(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_owned()));
        if self.dim == 0 {
            return fail("dim must be at least 1");
        }
        if self.window == 0 {
            return fail("window must be at least 1");
        }
        if self.min_count == 0 {
            return fail("min_count must be at least 1");
        }
        if !(self.sample_t > 0.0) {
            return fail("sample_t must be positive");
        }
        if !(self.initial_lr.is_finite() && self.final_lr.is_finite())
            || self.final_lr < 0.0
            || self.final_lr > self.initial_lr
        {
            return fail("learning rates must satisfy 0 <= final_lr <= initial_lr");
        }
        if self.threads == 0 {
            return fail("threads must be at least 1");
        }
        if self.mode == TrainMode::Subword {
            if self.minn == 0 || self.minn > self.maxn {
                return fail("n-gram lengths must satisfy 1 <= minn <= maxn");
            }
            if self.buckets == 0 {
                return fail("buckets must be at least 1");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        TrainConfig::word().validate().unwrap();
        TrainConfig::subword().validate().unwrap();
        assert_eq!(TrainConfig::subword().initial_lr, 0.05);
        assert_eq!(TrainConfig::word().initial_lr, 0.025);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            TrainConfig { dim: 0, ..TrainConfig::word() },
            TrainConfig { final_lr: 0.5, ..TrainConfig::word() },
            TrainConfig { minn: 5, maxn: 4, ..TrainConfig::subword() },
            TrainConfig { buckets: 0, ..TrainConfig::subword() },
            TrainConfig { threads: 0, ..TrainConfig::word() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{:?}", c);
        }
        // n-gram settings only matter in subword mode.
        TrainConfig { minn: 5, maxn: 4, ..TrainConfig::word() }.validate().unwrap();
    }
}
