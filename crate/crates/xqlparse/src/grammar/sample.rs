//! Random sentences from a grammar.
//!
//! Uniform-ish random walks over recognizer states. Used to fuzz the parsing
//! stack: every sampled sentence must parse and template-check as valid, so
//! any disagreement between grammar and parser surfaces as a test failure.

use rand::seq::SliceRandom;
use rand::Rng;

use super::earley::TokenRecognizer;
use super::rules::{Grammar, Terminal};

/// Identifier pool used to instantiate the free identifier class.
const FREE_POOL: &[&str] = &[
    "positive", "negative", "neutral", "spam", "ham", "urgent", "sports",
    "politics", "joy", "anger", "offensive", "entailment", "contradiction",
];

/// Stop at an accepting state with this probability, keeping walks short.
const STOP_PROB: f64 = 0.35;

/// After this many tokens, stop at the first accepting state reached.
/// Mid-clause states always complete within a few forced tokens, so walks
/// terminate without a special finisher.
const SOFT_CAP: usize = 48;

/// Sample one sentence of `grammar`.
///
/// At every step the walk either stops (if the prefix is already a sentence)
/// or picks uniformly among the allowed terminals, instantiating the open
/// classes with random concrete tokens.
pub fn sample_sentence<R: Rng + ?Sized>(grammar: &Grammar, rng: &mut R) -> String {
    let mut rec = TokenRecognizer::new(grammar);
    let mut tokens: Vec<String> = Vec::new();
    loop {
        if rec.is_accepting() && (tokens.len() >= SOFT_CAP || rng.gen_bool(STOP_PROB)) {
            return tokens.join(" ");
        }
        let options = rec.allowed_terminals();
        assert!(
            !options.is_empty() || rec.is_accepting(),
            "grammar reached a dead non-accepting state"
        );
        if options.is_empty() {
            return tokens.join(" ");
        }
        let tok = instantiate(options.choose(rng).expect("non-empty"), rng);
        rec.advance(&tok).expect("allowed terminal advances");
        tokens.push(tok);
        assert!(tokens.len() < 512, "sampler failed to terminate");
    }
}

fn instantiate<R: Rng + ?Sized>(terminal: &Terminal, rng: &mut R) -> String {
    match terminal {
        Terminal::Fixed(s) => s.clone(),
        Terminal::Int => {
            let len = *[1usize, 1, 2, 2, 3, 9].choose(rng).expect("non-empty");
            if len == 1 {
                rng.gen_range(0..=9u32).to_string()
            } else {
                let mut s = rng.gen_range(1..=9u32).to_string();
                for _ in 1..len {
                    s.push(char::from(b'0' + rng.gen_range(0..=9u8)));
                }
                s
            }
        }
        Terminal::Free => FREE_POOL.choose(rng).expect("non-empty").to_string(),
    }
}
