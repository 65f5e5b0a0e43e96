//! Grammar-constrained recognition: EBNF view, token walks, vocab masks.
//!
//! Run with `cargo run --example grammar_masks`.

use xqlparse::grammar::{
    full_grammar, grammar_mask, language_size, PrefixRecognizer, TokenRecognizer,
};
use xqlparse::llm::Tokenizer;
use xqlparse::query::Registry;

fn main() {
    let registry = Registry::coxql();
    let grammar = full_grammar(&registry);

    // The grammar prints as plain EBNF; the first few rules show the shape.
    let ebnf = grammar.to_ebnf();
    println!("--- grammar (first 8 rules) ---");
    for line in ebnf.lines().take(8) {
        println!("{line}");
    }

    let size = language_size(&grammar, 10_000);
    println!("\nsentences up to the cap: {size:?}");

    // Token-level recognition: feed a label one token at a time and watch
    // the allowed set narrow.
    println!("\n--- token walk: \"filter id 68 and influence topk 10\" ---");
    let mut rec = TokenRecognizer::new(&grammar);
    for tok in "filter id 68 and influence topk 10".split_whitespace() {
        let allowed = rec.allowed_terminals();
        println!(
            "next {:10}  ({} terminal classes allowed, accepting={})",
            tok,
            allowed.len(),
            rec.is_accepting()
        );
        rec.advance(tok).expect("gold tokens are always allowed");
    }
    assert!(rec.is_accepting());
    println!("final state accepts: {}", rec.is_accepting());

    // Character-level recognition is what a decoding loop needs: model
    // vocabularies split words arbitrarily, so masks are computed against a
    // trie over the real vocabulary, not against whole words.
    let tokenizer = Tokenizer::for_registry(&registry);
    let mut prefix = PrefixRecognizer::new(&grammar);
    println!("\n--- vocabulary masks along \"mistake sa\" ---");
    for step in ["mistake", " sa"] {
        prefix.push_str(step).expect("valid prefix");
        let mask = grammar_mask(&prefix, tokenizer.trie());
        println!(
            "after {:10?} -> {} of {} vocab entries survive the mask",
            prefix.buffer(),
            mask.count(),
            mask.vocab_size()
        );
    }
}
