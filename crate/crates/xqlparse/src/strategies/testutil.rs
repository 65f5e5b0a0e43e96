//! Shared scaffolding for strategy tests: a small registry-valid training
//! split plus the borrow choreography for building contexts twice (once with
//! a throwaway backend to compute fixture prompts, once with the scripted
//! backend under test).

use crate::embed::{EmbedStore, MockEmbedder};
use crate::llm::{Backend, ScriptedBackend, Tokenizer};
use crate::query::Registry;

use super::{StrategyConfig, StrategyContext, TrainExample};

pub(crate) struct Harness {
    pub registry: Registry,
    pub provider: MockEmbedder,
    pub tokenizer: Tokenizer,
    pub train: Vec<TrainExample>,
    pub config: StrategyConfig,
}

impl Harness {
    /// The default split: a few examples per intent, lexically distinct so
    /// the trigram embedder retrieves sensibly.
    pub fn coxql() -> Harness {
        Harness::with_train(vec![
            TrainExample::new("what does the model predict for this text", "predict"),
            TrainExample::new("predict the label for id 12", "filter id 12 and predict"),
            TrainExample::new("why did the model decide that", "rationalize"),
            TrainExample::new("explain the reasoning behind instance 4", "filter id 4 and rationalize"),
            TrainExample::new("show me the 5 most important words", "nlpattribute topk 5"),
            TrainExample::new("show me the most important words for id 3", "filter id 3 and nlpattribute"),
            TrainExample::new("show me the most important training samples", "influence topk 5"),
            TrainExample::new("which training samples were most important for id 9", "filter id 9 and influence"),
            TrainExample::new("find examples similar to this one", "similar topk 3"),
            TrainExample::new("how would you flip this prediction", "cfe"),
            TrainExample::new("could you correct the annotation please", "editlabel"),
        ])
    }

    pub fn with_train(train: Vec<TrainExample>) -> Harness {
        let registry = Registry::coxql();
        let tokenizer = Tokenizer::for_registry(&registry);
        Harness {
            registry,
            provider: MockEmbedder::new(),
            tokenizer,
            train,
            config: StrategyConfig::default(),
        }
    }

    pub fn context<'a>(
        &'a self,
        store: &'a EmbedStore<'a>,
        backend: &'a dyn Backend,
    ) -> StrategyContext<'a> {
        StrategyContext::new(
            &self.registry,
            &self.train,
            store,
            backend,
            &self.tokenizer,
            self.config,
        )
        .expect("harness train split is valid")
    }

    /// A backend that is never called; for stages computed locally.
    pub fn probe() -> ScriptedBackend {
        ScriptedBackend::new("probe")
    }
}
