use std::hash::Hasher;

use fnv::FnvHasher;
use regex::Regex;

use super::{EmbeddingConfig, EmbeddingVector};
use crate::error::{Error, Result};
use crate::pipeline::DatasetRecord;

/// Lowercased maximal alphanumeric runs, or regex matches when a pattern
/// is given.
pub fn tokenize(text: &str, pattern: Option<&Regex>) -> Vec<String> {
    let lower = text.to_lowercase();
    match pattern {
        Some(re) => re.find_iter(&lower).map(|m| m.as_str().to_string()).collect(),
        None => lower
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect(),
    }
}

fn stable_hash(token: &str, seed: u64) -> u64 {
    let mut h = FnvHasher::default();
    h.write(&seed.to_le_bytes());
    h.write(token.as_bytes());
    h.finish()
}

/// Signed feature hashing of one text, L2-normalized. Texts without tokens
/// map to the zero vector.
pub fn hash_text(text: &str, dim: usize, seed: u64, pattern: Option<&Regex>) -> EmbeddingVector {
    let mut v = vec![0.0; dim];
    for tok in tokenize(text, pattern) {
        let index = (stable_hash(&tok, seed) % dim as u64) as usize;
        // the sign comes from an independently seeded hash
        let sign = if stable_hash(&tok, !seed) >> 63 == 0 { 1.0 } else { -1.0 };
        v[index] += sign;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

pub fn embed_hashing(config: &EmbeddingConfig, records: &[DatasetRecord]) -> Result<Vec<EmbeddingVector>> {
    if config.dim < 2 {
        return Err(Error::Config("hashing embedder needs dim >= 2".into()));
    }
    let pattern = config
        .token_pattern
        .as_deref()
        .map(Regex::new)
        .transpose()
        .map_err(|e| Error::Config(format!("bad token pattern: {e}")))?;
    Ok(records
        .iter()
        .map(|r| hash_text(&r.text, config.dim, config.hash_seed, pattern.as_ref()))
        .collect())
}
