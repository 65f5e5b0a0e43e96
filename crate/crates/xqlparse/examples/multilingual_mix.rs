//! Code-switched training pools: all of English plus a seeded sample of a
//! target language.
//!
//! A mix at proportion p keeps every English record and adds ⌊p·|target|/100⌋
//! target-language records, sampled without replacement and shuffled — one
//! seeded generator drives both steps, so a (seed, proportion) pair names the
//! exact pool forever.
//!
//! Run with `cargo run --example multilingual_mix`.

use xqlparse::corpus::{build_multilingual_mix, CoxqlRecord, MixSpec, MIX_PROPORTIONS};
use xqlparse::lang::Language;

fn synthetic(language: Language, n: usize) -> Vec<CoxqlRecord> {
    (0..n)
        .map(|i| CoxqlRecord::new(format!("question {i} [{language}]"), "predict", language))
        .collect()
}

fn main() {
    let english = synthetic(Language::En, 200);
    let german = synthetic(Language::De, 1089);

    println!("|EN| = {}, |DE| = {}\n", english.len(), german.len());
    println!("| p   | sampled | mix size |");
    println!("|-----|---------|----------|");
    for &proportion in &MIX_PROPORTIONS {
        let spec = MixSpec { target_language: Language::De, proportion, seed: 7 };
        let mix = build_multilingual_mix(&english, &german, &spec).expect("proportion is valid");
        let sampled = mix.iter().filter(|r| r.language == Language::De).count();
        println!("| {proportion:3} | {sampled:7} | {:8} |", mix.len());
    }

    // Same seed, same pool — byte for byte.
    let spec = MixSpec { target_language: Language::De, proportion: 25, seed: 42 };
    let a = build_multilingual_mix(&english, &german, &spec).expect("valid");
    let b = build_multilingual_mix(&english, &german, &spec).expect("valid");
    assert_eq!(a, b);
    println!("\nseed 42, p=25: first three after shuffle:");
    for r in a.iter().take(3) {
        println!("  {}", r.question);
    }
}
