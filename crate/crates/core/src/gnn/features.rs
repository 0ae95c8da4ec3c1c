//! Node input features.
//!
//! A category's input vector is the L2-normalized histogram of its hashed
//! character trigrams concatenated with a learnable per-category embedding.
//! Hashing keeps features defined for names never seen in training, which is
//! what makes the predictor usable zero-shot.

use crate::error::{Error, Result};
use crate::gnn::{LinkModel, Mat};
use crate::relation::CatId;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET ^ seed;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Hashed character-trigram histogram of `name`, L2-normalized.
///
/// The name is framed with `^`/`$` so even one-letter names produce a
/// trigram; the result has unit norm for every non-empty name and is
/// deterministic given (name, dim, seed).
pub fn trigram_features(name: &str, dim: usize, seed: u64) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    if name.is_empty() || dim == 0 {
        return out;
    }
    let framed: Vec<u8> = std::iter::once(b'^')
        .chain(name.bytes())
        .chain(std::iter::once(b'$'))
        .collect();
    for window in framed.windows(3) {
        let bucket = (fnv1a(seed, window) % dim as u64) as usize;
        out[bucket] += 1.0;
    }
    let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut out {
            *x /= norm;
        }
    }
    out
}

/// Input feature matrix for the given categories, one row per entry:
/// hashed trigram block then the model's learnable embedding row.
pub fn node_features(model: &LinkModel, cats: &[CatId]) -> Result<Mat> {
    if cats.is_empty() {
        return Err(Error::Invalid("ontology must be non-empty".into()));
    }
    let cfg = &model.config;
    let mut mat = Mat::zeros(cats.len(), cfg.input_dim());
    for (row, &cat) in cats.iter().enumerate() {
        let idx = cat.0 as usize;
        let name = model
            .categories
            .get(idx)
            .ok_or_else(|| Error::UnknownCategory(format!("category index {idx}")))?;
        let tg = trigram_features(name, cfg.hash_dim, cfg.hash_seed);
        let r = mat.row_mut(row);
        r[..cfg.hash_dim].copy_from_slice(&tg);
        r[cfg.hash_dim..].copy_from_slice(model.embed_row(idx));
    }
    Ok(mat)
}
