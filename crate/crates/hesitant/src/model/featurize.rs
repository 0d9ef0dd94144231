//! Hashed bag-of-n-grams featurizer.
//!
//! Unigrams and adjacent bigrams are hashed with a seeded FNV-1a into a fixed
//! number of buckets. The hash is pinned here (not delegated to the standard
//! library) so feature indices are stable across platforms and toolchains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense vector of hashed n-gram counts, optionally L2-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0).count()
    }

    /// Scale to unit Euclidean norm; the zero vector is left unchanged.
    pub fn l2_normalize(&mut self) {
        let norm = self.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut self.values {
                *v /= norm;
            }
        }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Seeded FNV-1a over the n-gram parts, with a unit separator between parts.
pub fn hash_ngram(hash_seed: u64, parts: &[&str]) -> u64 {
    let mut h = FNV_OFFSET;
    for byte in hash_seed.to_le_bytes() {
        h = (h ^ u64::from(byte)).wrapping_mul(FNV_PRIME);
    }
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            h = (h ^ 0x1f).wrapping_mul(FNV_PRIME);
        }
        for &byte in part.as_bytes() {
            h = (h ^ u64::from(byte)).wrapping_mul(FNV_PRIME);
        }
    }
    h
}

/// Accumulate hashed unigram and adjacent-bigram counts into `dim` buckets.
pub fn featurize(tokens: &[String], dim: usize, hash_seed: u64) -> Result<FeatureVector> {
    if dim < 2 {
        return Err(Error::validation("feature dimension must be at least 2"));
    }
    let mut values = vec![0.0; dim];
    for token in tokens {
        let idx = (hash_ngram(hash_seed, &[token]) % dim as u64) as usize;
        values[idx] += 1.0;
    }
    for pair in tokens.windows(2) {
        let idx = (hash_ngram(hash_seed, &[&pair[0], &pair[1]]) % dim as u64) as usize;
        values[idx] += 1.0;
    }
    Ok(FeatureVector { values })
}

/// Featurizer settings carried in the experiment config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeaturizerConfig {
    pub dim: usize,
    pub hash_seed: u64,
    pub l2_normalize: bool,
}

impl Default for FeaturizerConfig {
    fn default() -> Self {
        FeaturizerConfig {
            dim: 4096,
            hash_seed: 0,
            l2_normalize: true,
        }
    }
}

impl FeaturizerConfig {
    pub fn features(&self, tokens: &[String]) -> Result<FeatureVector> {
        let mut fv = featurize(tokens, self.dim, self.hash_seed)?;
        if self.l2_normalize {
            fv.l2_normalize();
        }
        Ok(fv)
    }
}
