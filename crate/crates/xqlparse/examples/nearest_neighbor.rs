//! The embedding-only baseline: copy the gold label of the most similar
//! training question. No language model involved.
//!
//! The embedding provider here is the deterministic mock (hashed character
//! trigrams), which keeps the example offline while exercising the real
//! retrieval path: embed, cosine-rank, copy the neighbor's canonical label.
//!
//! Run with `cargo run --example nearest_neighbor`.

use xqlparse::embed::{EmbedStore, MockEmbedder};
use xqlparse::llm::{ScriptedBackend, Tokenizer};
use xqlparse::query::Registry;
use xqlparse::strategies::{parse_nn, StrategyConfig, StrategyContext, TrainExample};

fn main() {
    let registry = Registry::coxql();
    let tokenizer = Tokenizer::for_registry(&registry);
    let provider = MockEmbedder::new();
    let train = vec![
        TrainExample::new("what does the model predict for this text", "predict"),
        TrainExample::new("why did the model decide that", "rationalize"),
        TrainExample::new("show me the 5 most important words", "nlpattribute topk 5"),
        TrainExample::new("show me the most important training samples", "influence topk 5"),
        TrainExample::new("find examples similar to this one", "similar topk 3"),
        TrainExample::new("how would you flip this prediction", "cfe"),
    ];

    // The baseline never calls the backend, so an empty scripted backend —
    // which fails loudly on any prompt — doubles as proof of that.
    let backend = ScriptedBackend::new("never-called");
    let store = EmbedStore::new(&provider);
    let ctx = StrategyContext::new(
        &registry,
        &train,
        &store,
        &backend,
        &tokenizer,
        StrategyConfig::default(),
    )
    .expect("train split is valid");

    for question in [
        "what would the model predict here",
        "explain why the model chose that",
        "what change would flip the outcome",
        "completely unrelated request about the weather",
    ] {
        let trace = parse_nn(&ctx, question).expect("embedding the question succeeds");
        let stage = &trace.stages[0];
        println!("question: {question}");
        println!("  {} -> {:?}", stage.derived, trace.final_parse);
    }
}
