//! Template repair: what separates the plain multi-prompt strategy from its
//! repair-enabled variant.
//!
//! Both run the same two stages (pick the operation, then fill attributes)
//! and both reject answers that fail the template check. The repair-enabled
//! variant additionally salvages *near misses* — answers that become valid
//! after truncating trailing junk and filling defaulted slots. On a
//! truncation-repairable answer the plain strategy fails and the repair
//! variant succeeds; on garbage both fail.
//!
//! Run with `cargo run --example mp_template_repair`.

use xqlparse::embed::{EmbedStore, MockEmbedder};
use xqlparse::llm::{ScriptedBackend, Tokenizer};
use xqlparse::query::Registry;
use xqlparse::strategies::{
    mp_attribute_stage, mp_operation_stage, parse_mp, parse_mp_plus, StrategyConfig,
    StrategyContext, TrainExample,
};

fn train_split() -> Vec<TrainExample> {
    vec![
        TrainExample::new("what does the model predict for this text", "predict"),
        TrainExample::new("show me the 5 most important words", "nlpattribute topk 5"),
        TrainExample::new("show me the most important words for id 3", "filter id 3 and nlpattribute"),
        TrainExample::new("why did the model decide that", "rationalize"),
        TrainExample::new("find examples similar to this one", "similar topk 3"),
    ]
}

fn main() {
    let registry = Registry::coxql();
    let tokenizer = Tokenizer::for_registry(&registry);
    let provider = MockEmbedder::new();
    let train = train_split();
    let config = StrategyConfig::default();
    let question = "which words mattered most here";

    // Compute the two stage prompts, then script a stage-2 answer that is
    // valid only after repair: a real label followed by chatty trailing text.
    let probe = ScriptedBackend::new("probe");
    let store = EmbedStore::new(&provider);
    let ctx = StrategyContext::new(&registry, &train, &store, &probe, &tokenizer, config)
        .expect("train split is valid");
    let op_prompt = mp_operation_stage(&ctx, question).expect("embeds");
    let attr_prompt =
        mp_attribute_stage(&ctx, question, "nlpattribute").expect("operation is registered");

    let mut backend = ScriptedBackend::new("scripted");
    backend.insert(&op_prompt, "nlpattribute");
    backend.insert(&attr_prompt, "nlpattribute topk 5 because those matter most");

    let store = EmbedStore::new(&provider);
    let ctx = StrategyContext::new(&registry, &train, &store, &backend, &tokenizer, config)
        .expect("train split is valid");

    let plain = parse_mp(&ctx, question).expect("prompts are scripted");
    let repaired = parse_mp_plus(&ctx, question).expect("prompts are scripted");

    println!("stage-2 answer: \"nlpattribute topk 5 because those matter most\"\n");
    println!(
        "mp   -> final_parse={:?}\n        failure={:?}",
        plain.final_parse, plain.failure
    );
    println!(
        "mp+  -> final_parse={:?}\n        failure={:?}",
        repaired.final_parse, repaired.failure
    );

    assert!(plain.final_parse.is_none(), "plain variant must reject the near miss");
    assert!(repaired.final_parse.is_some(), "repair variant must salvage it");

    // The repair policy is truncation plus default filling — never invention.
    // An answer with a malformed slot stays rejected under both variants.
    let mut backend = ScriptedBackend::new("scripted-garbage");
    backend.insert(&op_prompt, "nlpattribute");
    backend.insert(&attr_prompt, "nlpattribute topk many");
    let store = EmbedStore::new(&provider);
    let ctx = StrategyContext::new(&registry, &train, &store, &backend, &tokenizer, config)
        .expect("train split is valid");
    let hopeless = parse_mp_plus(&ctx, question).expect("prompts are scripted");
    println!(
        "\nirreparable answer \"nlpattribute topk many\" under mp+: failure={:?}",
        hopeless.failure
    );
    assert!(hopeless.final_parse.is_none());
}
