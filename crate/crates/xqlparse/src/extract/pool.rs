//! Demonstration retrieval over a Compass training split.

use crate::embed::{top_k, EmbedStore};

use super::{CompassRecord, ExtractError};

/// A training split with its question embeddings precomputed, ready to
/// serve similarity-selected demonstrations.
pub struct ExtractPool<'a> {
    train: &'a [CompassRecord],
    vecs: Vec<Vec<f32>>,
    store: &'a EmbedStore<'a>,
}

impl<'a> ExtractPool<'a> {
    pub fn new(
        train: &'a [CompassRecord],
        store: &'a EmbedStore<'a>,
    ) -> Result<ExtractPool<'a>, ExtractError> {
        if train.is_empty() {
            return Err(ExtractError::EmptyPool);
        }
        let questions: Vec<&str> = train.iter().map(|r| r.user_question.as_str()).collect();
        let vecs = store.embed_all(&questions)?;
        Ok(ExtractPool { train, vecs, store })
    }

    pub fn train(&self) -> &[CompassRecord] {
        self.train
    }

    /// The `n` training records most similar to `question`, most similar
    /// first (deterministic tie-break toward lower index).
    pub fn demonstrations(
        &self,
        question: &str,
        n: usize,
    ) -> Result<Vec<&CompassRecord>, ExtractError> {
        let qvec = self.store.embed(question)?;
        let hits = top_k(&qvec, &self.vecs, n);
        Ok(hits.iter().map(|h| &self.train[h.index]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::MockEmbedder;
    use crate::lang::Language;

    fn record(question: &str, intent: &str, span: &str) -> CompassRecord {
        CompassRecord {
            user_question: question.to_string(),
            operation_name: intent.to_string(),
            custom_input: span.to_string(),
            language: Language::En,
        }
    }

    #[test]
    fn retrieval_prefers_lexically_close_questions() {
        let train = vec![
            record("rate this wonderful movie for me", "predict", "this wonderful movie"),
            record("könnten Sie das bitte erklären", "rationalize", "das"),
            record("give me something similar to the red car", "similar", "the red car"),
        ];
        let provider = MockEmbedder::new();
        let store = EmbedStore::new(&provider);
        let pool = ExtractPool::new(&train, &store).unwrap();
        let demos = pool.demonstrations("rate this wonderful show for me", 2).unwrap();
        assert_eq!(demos[0].operation_name, "predict");
        assert_eq!(demos.len(), 2);
    }

    #[test]
    fn empty_split_is_rejected() {
        let provider = MockEmbedder::new();
        let store = EmbedStore::new(&provider);
        assert!(matches!(ExtractPool::new(&[], &store), Err(ExtractError::EmptyPool)));
    }
}
