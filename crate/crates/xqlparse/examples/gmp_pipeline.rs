//! The guided multi-prompt pipeline, stage by stage.
//!
//! Four stages: (1) average training embeddings into per-intent centroids,
//! (2) retrieve the k nearest candidate intents for the question, (3) ask the
//! model to pick the coarse intent from those candidates, (4) fill attributes
//! under a grammar restricted to the chosen operation — so the final parse is
//! well-formed by construction.
//!
//! The backend here is scripted: stage prompts are computed first against a
//! probe backend, then answered from a fixture table, which is exactly how
//! the test suite pins this pipeline down.
//!
//! Run with `cargo run --example gmp_pipeline`.

use xqlparse::embed::{EmbedStore, MockEmbedder};
use xqlparse::llm::{ScriptedBackend, Tokenizer};
use xqlparse::query::Registry;
use xqlparse::strategies::{
    gmp_coarse_stage, gmp_fill_prompt, parse_gmp, StrategyConfig, StrategyContext, TrainExample,
};

fn train_split() -> Vec<TrainExample> {
    vec![
        TrainExample::new("what does the model predict for this text", "predict"),
        TrainExample::new("predict the label for id 12", "filter id 12 and predict"),
        TrainExample::new("why did the model decide that", "rationalize"),
        TrainExample::new("show me the 5 most important words", "nlpattribute topk 5"),
        TrainExample::new("show me the most important training samples", "influence topk 5"),
        TrainExample::new("which training samples were most important for id 9", "filter id 9 and influence"),
        TrainExample::new("find examples similar to this one", "similar topk 3"),
        TrainExample::new("how would you flip this prediction", "cfe"),
    ]
}

fn main() {
    let registry = Registry::coxql();
    let tokenizer = Tokenizer::for_registry(&registry);
    let provider = MockEmbedder::new();
    let train = train_split();
    let config = StrategyConfig::default();
    let question = "Show me 10 most important samples for ID 68.";

    // Pass 1: compute the stage prompts with a backend that is never called.
    let probe = ScriptedBackend::new("probe");
    let store = EmbedStore::new(&provider);
    let ctx = StrategyContext::new(&registry, &train, &store, &probe, &tokenizer, config)
        .expect("train split is valid");
    let coarse = gmp_coarse_stage(&ctx, question).expect("centroids exist");
    println!("stage-2 candidates (cosine to intent centroids):");
    for (intent, score) in &coarse.candidates {
        println!("  {score:.4}  {intent}");
    }
    let fill = gmp_fill_prompt(&ctx, question, "influence").expect("influence is registered");

    // Pass 2: the same pipeline against a backend scripted for those prompts.
    let mut backend = ScriptedBackend::new("scripted");
    backend.insert(&coarse.prompt, "influence");
    backend.insert(&fill, "filter id 68 and influence topk 10");
    let store = EmbedStore::new(&provider);
    let ctx = StrategyContext::new(&registry, &train, &store, &backend, &tokenizer, config)
        .expect("train split is valid");
    let trace = parse_gmp(&ctx, question).expect("all stage prompts are scripted");

    println!("\nquestion: {question}");
    for stage in &trace.stages {
        println!("  stage {:20} -> {}", stage.name, stage.derived);
    }
    println!("final parse: {}", trace.final_parse.as_deref().unwrap_or("(none)"));
    assert_eq!(trace.final_parse.as_deref(), Some("filter id 68 and influence topk 10"));
}
