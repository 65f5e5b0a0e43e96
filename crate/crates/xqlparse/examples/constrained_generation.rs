//! Grammar-constrained decoding against both backend capability levels.
//!
//! A backend that exposes per-step continuation preferences is decoded token
//! by token under the grammar mask, so its output is valid by construction.
//! A text-only backend is decoded through rejection-and-repair rounds: each
//! invalid completion is cut back to its longest grammar-viable prefix and
//! the backend is re-prompted from there.
//!
//! Run with `cargo run --example constrained_generation`.

use xqlparse::grammar::full_grammar;
use xqlparse::llm::{constrained_generate, GenerationLimits, ScriptedBackend, Tokenizer};
use xqlparse::query::{parse_label, Registry};

fn main() {
    let registry = Registry::coxql();
    let grammar = full_grammar(&registry);
    let tokenizer = Tokenizer::for_registry(&registry);
    let prompt = "Translate the question into a query: show me the top 10 keywords\nQuery:";

    // Token-level route: the backend would happily continue into prose, but
    // every step is intersected with the grammar mask; when the preferred
    // continuation (",") turns illegal the loop takes end-of-sequence, so
    // only the label survives.
    let mut scripted = ScriptedBackend::new("scripted");
    scripted.insert(prompt, "keywords topk 10, these are the main themes");
    let out = constrained_generate(
        &scripted,
        &tokenizer,
        &grammar,
        prompt,
        GenerationLimits::default(),
    )
    .expect("scripted backends do not fail");
    println!("token-level  text={:?}", out.text);
    println!(
        "             finish={:?} steps={} prompts_sent={}",
        out.finish_reason,
        out.steps,
        out.prompts.len()
    );
    assert!(parse_label(&out.text, &registry).is_ok());

    // Text-only route: same fixture backend, but stripped of token-level
    // preferences. The first completion derails after a valid prefix ("about"
    // cannot start the integer that `topk` requires); the loop re-prompts
    // with the viable prefix appended and splices the repair in.
    let mut text_only = ScriptedBackend::new("scripted-text").text_only();
    text_only.insert(prompt, "keywords topk about ten");
    text_only.insert(&format!("{prompt}keywords topk "), "10");
    let out = constrained_generate(
        &text_only,
        &tokenizer,
        &grammar,
        prompt,
        GenerationLimits::default(),
    )
    .expect("scripted backends do not fail");
    println!("\ntext-only    text={:?}", out.text);
    println!(
        "             finish={:?} repair_rounds={} prompts_sent={}",
        out.finish_reason,
        out.repair_rounds,
        out.prompts.len()
    );
    for (i, p) in out.prompts.iter().enumerate() {
        println!("             prompt[{i}] = {p:?}");
    }
    assert!(parse_label(&out.text, &registry).is_ok());
}
