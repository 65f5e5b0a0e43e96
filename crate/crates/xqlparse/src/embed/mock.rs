//! Deterministic offline embedder.
//!
//! Character trigrams hashed into a fixed number of buckets with a sign bit
//! (classic feature hashing), then L2-normalised. No model weights, no I/O,
//! bit-identical across runs and platforms — which is exactly what offline
//! tests and reproducible fixtures need. Texts sharing surface vocabulary
//! land near each other, which is enough structure for retrieval components
//! to be exercised meaningfully.

use super::{EmbedError, EmbeddingProvider};

const DIM: usize = 256;
const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

/// Character-trigram feature hashing into 256 dimensions.
#[derive(Debug, Clone, Default)]
pub struct MockEmbedder;

impl MockEmbedder {
    pub fn new() -> MockEmbedder {
        MockEmbedder
    }

    pub fn dim(&self) -> usize {
        DIM
    }
}

fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut hash = FNV_OFFSET;
    for b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

impl EmbeddingProvider for MockEmbedder {
    fn name(&self) -> &str {
        "mock-trigram-256"
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>, EmbedError> {
        // Boundary sentinels let one- and two-character texts still produce
        // trigrams, and make word-initial/final characters distinctive.
        let mut chars: Vec<char> = Vec::with_capacity(text.chars().count() + 2);
        chars.push('\u{2}');
        chars.extend(text.chars());
        chars.push('\u{3}');

        let mut acc = [0.0f32; DIM];
        let mut any = false;
        for window in chars.windows(3) {
            let mut buf = [0u8; 12];
            let mut len = 0;
            for c in window {
                len += c.encode_utf8(&mut buf[len..]).len();
            }
            let h = fnv1a(buf[..len].iter().copied());
            let bucket = (h % DIM as u64) as usize;
            let sign = if (h >> 32) & 1 == 0 { 1.0 } else { -1.0 };
            acc[bucket] += sign;
            any = true;
        }
        let norm: f32 = acc.iter().map(|x| x * x).sum::<f32>().sqrt();
        if !any || norm == 0.0 {
            // Empty text (or total cancellation): a fixed unit vector, so
            // downstream code never sees a zero-norm embedding.
            let mut unit = vec![0.0; DIM];
            unit[0] = 1.0;
            return Ok(unit);
        }
        Ok(acc.iter().map(|x| x / norm).collect())
    }
}
