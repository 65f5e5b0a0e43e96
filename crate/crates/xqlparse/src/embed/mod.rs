//! Text embeddings: providers, caching, and similarity.
//!
//! Retrieval-style components (nearest-neighbour parsing, demonstration
//! selection, intent centroids) all reduce to cosine similarity over unit
//! vectors. The [`EmbeddingProvider`] trait abstracts where vectors come
//! from: [`MockEmbedder`] is a deterministic character-n-gram hasher good
//! enough to give related texts related vectors offline, and
//! [`HttpEmbedder`] talks to a real embeddings API. [`EmbedStore`] adds
//! memoisation and an optional on-disk cache keyed by provider and text
//! fingerprint.

mod http;
mod mock;
mod store;

pub use http::{HttpEmbedder, EMBED_KEY_ENV};
pub use mock::MockEmbedder;
pub use store::EmbedStore;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("transport failure after retries: {0}")]
    Transport(String),
    #[error("API error {status}: {body}")]
    Api { status: u16, body: String },
    #[error("malformed API response: {0}")]
    BadResponse(String),
    #[error("embedding cache I/O: {0}")]
    CacheIo(#[from] std::io::Error),
    #[error("embedding cache line {line} is malformed: {reason}")]
    CacheFormat { line: usize, reason: String },
}

/// Anything that turns text into a vector. Implementations return unit
/// vectors (callers may rely on cosine == dot).
pub trait EmbeddingProvider: Sync {
    /// Stable identifier; part of the cache key, so two providers never
    /// share cached vectors.
    fn name(&self) -> &str;

    fn embed(&self, text: &str) -> Result<Vec<f32>, EmbedError>;
}

/// Cosine similarity. Zero-norm vectors are treated as orthogonal to
/// everything rather than poisoning downstream sorts with NaN.
pub fn cosine(a: &[f32], b: &[f32]) -> f32 {
    assert_eq!(a.len(), b.len(), "cosine over mismatched dimensions");
    let dot: f32 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f32 = a.iter().map(|x| x * x).sum::<f32>().sqrt();
    let nb: f32 = b.iter().map(|x| x * x).sum::<f32>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// One retrieved neighbour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborHit {
    pub index: usize,
    pub score: f32,
}

/// Indices of the `k` corpus vectors most similar to `query`, sorted by
/// descending score with ascending index breaking ties — fully deterministic
/// for a fixed corpus order.
pub fn top_k(query: &[f32], corpus: &[Vec<f32>], k: usize) -> Vec<NeighborHit> {
    let mut hits: Vec<NeighborHit> = corpus
        .iter()
        .enumerate()
        .map(|(index, v)| {
            let raw = cosine(query, v);
            let score = if raw.is_nan() { f32::NEG_INFINITY } else { raw };
            NeighborHit { index, score }
        })
        .collect();
    hits.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("NaN filtered above")
            .then(a.index.cmp(&b.index))
    });
    hits.truncate(k);
    hits
}

/// L2-normalised mean of a non-empty set of vectors; `None` when the set is
/// empty or the mean has zero norm.
pub fn centroid<'a>(vectors: impl IntoIterator<Item = &'a [f32]>) -> Option<Vec<f32>> {
    let mut iter = vectors.into_iter();
    let first = iter.next()?;
    let mut sum: Vec<f32> = first.to_vec();
    let mut count = 1usize;
    for v in iter {
        assert_eq!(v.len(), sum.len(), "centroid over mismatched dimensions");
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
        count += 1;
    }
    let norm: f32 = sum.iter().map(|x| (x / count as f32).powi(2)).sum::<f32>().sqrt();
    if norm == 0.0 {
        return None;
    }
    Some(sum.into_iter().map(|x| x / count as f32 / norm).collect())
}
