//! Shared, immutable resources the strategies draw on.
//!
//! A [`StrategyContext`] is built once per (registry, training split,
//! backend) combination and then used for any number of questions, possibly
//! concurrently: everything inside is read-only after construction, and the
//! embedding store memoises behind its own lock.

use std::collections::BTreeMap;

use crate::embed::{centroid, cosine, top_k, EmbedStore};
use crate::grammar::{full_grammar, Grammar};
use crate::llm::{Backend, GenerationLimits, Tokenizer};
use crate::query::{canonicalize, parse_label, serialize, Registry};

use serde::{Deserialize, Serialize};

use super::{DemonstrationSet, StrategyError};

/// One training example: a question and its gold label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainExample {
    pub question: String,
    pub label: String,
}

impl TrainExample {
    pub fn new(question: impl Into<String>, label: impl Into<String>) -> TrainExample {
        TrainExample { question: question.into(), label: label.into() }
    }
}

/// Shot counts and retrieval widths, one knob per documented default.
#[derive(Debug, Clone, Copy)]
pub struct StrategyConfig {
    /// Demonstrations in the guided-decoding prompt.
    pub gd_shots: usize,
    /// Demonstrations in each multi-prompt stage.
    pub mp_shots: usize,
    /// Candidate intents retrieved per question.
    pub k: usize,
    /// Demonstrations per candidate intent in the coarse stage.
    pub intent_demos: usize,
    /// Demonstrations in the attribute-filling stage.
    pub fill_shots: usize,
    /// Budgets for each constrained generation.
    pub limits: GenerationLimits,
}

impl Default for StrategyConfig {
    fn default() -> StrategyConfig {
        StrategyConfig {
            gd_shots: 20,
            mp_shots: 10,
            k: 3,
            intent_demos: 3,
            fill_shots: 10,
            limits: GenerationLimits::default(),
        }
    }
}

/// An intent's centroid: the normalized mean of the embeddings of its
/// training questions.
#[derive(Debug, Clone, PartialEq)]
pub struct IntentCentroid {
    pub intent: String,
    /// Training examples behind the centroid.
    pub count: usize,
    pub vector: Vec<f32>,
}

/// Everything a strategy needs, precomputed once: parsed training labels,
/// their embeddings, per-intent centroids, and the full grammar.
pub struct StrategyContext<'a> {
    pub registry: &'a Registry,
    pub backend: &'a dyn Backend,
    pub tokenizer: &'a Tokenizer,
    pub config: StrategyConfig,
    train: &'a [TrainExample],
    store: &'a EmbedStore<'a>,
    grammar: Grammar,
    train_vecs: Vec<Vec<f32>>,
    train_canonical: Vec<String>,
    train_intent: Vec<String>,
    centroids: Vec<IntentCentroid>,
}

impl<'a> StrategyContext<'a> {
    pub fn new(
        registry: &'a Registry,
        train: &'a [TrainExample],
        store: &'a EmbedStore<'a>,
        backend: &'a dyn Backend,
        tokenizer: &'a Tokenizer,
        config: StrategyConfig,
    ) -> Result<StrategyContext<'a>, StrategyError> {
        if train.is_empty() {
            return Err(StrategyError::EmptyPool);
        }
        let questions: Vec<&str> = train.iter().map(|e| e.question.as_str()).collect();
        let train_vecs = store.embed_all(&questions)?;

        let mut train_canonical = Vec::with_capacity(train.len());
        let mut train_intent = Vec::with_capacity(train.len());
        for (index, example) in train.iter().enumerate() {
            let tree = parse_label(&example.label, registry)
                .map_err(|source| StrategyError::BadTrainLabel { index, source })?;
            let filled = canonicalize(&tree, registry)?;
            train_canonical.push(serialize(&filled, registry)?);
            let main = tree.main_clause(registry).expect("parsed trees have a clause");
            train_intent.push(main.op.clone());
        }

        // Group by intent name (sorted for determinism) and average.
        let mut groups: BTreeMap<&str, Vec<&[f32]>> = BTreeMap::new();
        for (i, intent) in train_intent.iter().enumerate() {
            groups.entry(intent).or_default().push(train_vecs[i].as_slice());
        }
        let centroids = groups
            .into_iter()
            .map(|(intent, vecs)| IntentCentroid {
                intent: intent.to_string(),
                count: vecs.len(),
                vector: centroid(vecs.iter().copied()).expect("group is non-empty"),
            })
            .collect();

        Ok(StrategyContext {
            registry,
            backend,
            tokenizer,
            config,
            train,
            store,
            grammar: full_grammar(registry),
            train_vecs,
            train_canonical,
            train_intent,
            centroids,
        })
    }

    pub fn train(&self) -> &[TrainExample] {
        self.train
    }

    /// The grammar of all canonical labels.
    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    /// Per-intent centroids, sorted by intent name.
    pub fn centroids(&self) -> &[IntentCentroid] {
        &self.centroids
    }

    /// Canonical form of training example `i`'s gold label.
    pub fn canonical_label(&self, i: usize) -> &str {
        &self.train_canonical[i]
    }

    /// Main operation of training example `i`'s gold label.
    pub fn intent_of(&self, i: usize) -> &str {
        &self.train_intent[i]
    }

    pub fn embed_question(&self, question: &str) -> Result<Vec<f32>, StrategyError> {
        Ok(self.store.embed(question)?)
    }

    /// Index and similarity of the training question closest to `qvec`.
    pub fn nearest(&self, qvec: &[f32]) -> (usize, f32) {
        let hits = top_k(qvec, &self.train_vecs, 1);
        let hit = hits.first().expect("training split is non-empty");
        (hit.index, hit.score)
    }

    /// The `n` training examples most similar to `qvec`, across all intents.
    pub fn demonstrations(&self, qvec: &[f32], n: usize) -> DemonstrationSet {
        let hits = top_k(qvec, &self.train_vecs, n);
        self.collect_demos(hits.iter().map(|h| h.index))
    }

    /// The `n` most similar training examples whose gold intent is `intent`.
    pub fn demonstrations_for_intent(
        &self,
        qvec: &[f32],
        intent: &str,
        n: usize,
    ) -> DemonstrationSet {
        let mut scored: Vec<(usize, f32)> = self
            .train_intent
            .iter()
            .enumerate()
            .filter(|(_, name)| *name == intent)
            .map(|(i, _)| (i, cosine(qvec, &self.train_vecs[i])))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        self.collect_demos(scored.into_iter().take(n).map(|(i, _)| i))
    }

    /// The `k` intents whose centroids are most similar to `qvec`, most
    /// similar first (ties broken by intent name order).
    pub fn candidate_intents(&self, qvec: &[f32], k: usize) -> Vec<(&IntentCentroid, f32)> {
        let mut scored: Vec<(usize, f32)> = self
            .centroids
            .iter()
            .enumerate()
            .map(|(i, c)| (i, cosine(qvec, &c.vector)))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored.into_iter().take(k).map(|(i, s)| (&self.centroids[i], s)).collect()
    }

    fn collect_demos(&self, indices: impl Iterator<Item = usize>) -> DemonstrationSet {
        let mut entries = Vec::new();
        let mut source_indices = Vec::new();
        for i in indices {
            entries.push((self.train[i].question.clone(), self.train_canonical[i].clone()));
            source_indices.push(i);
        }
        DemonstrationSet { entries, source_indices }
    }
}
