//! Cross-cutting property tests.
//!
//! Each property states an invariant that holds for *all* inputs, checked
//! here over randomized cases: grammar/parser agreement, mask/oracle
//! agreement, encoder/decoder round-trips, containment versus a brute-force
//! scan, metric identities, and mix arithmetic. The acceptance suite re-runs
//! the headline properties at their stated scale; these stay small enough to
//! run on every `cargo test`.

use std::collections::HashMap;
use std::collections::HashSet;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use xqlparse::corpus::{build_multilingual_mix, CoxqlRecord, MixSpec, MIX_PROPORTIONS};
use xqlparse::embed::{cosine, top_k, EmbeddingProvider, MockEmbedder};
use xqlparse::extract::{
    decode, encoded_answer, nfc, validate_containment, Approach,
};
use xqlparse::eval::micro_f1;
use xqlparse::grammar::{
    brute_force_mask, full_grammar, grammar_mask, sample_sentence, PrefixRecognizer,
};
use xqlparse::lang::Language;
use xqlparse::llm::Tokenizer;
use xqlparse::query::{
    canonicalize, compare_parses, parse_label, serialize, template_check, CheckResult, Registry,
};

/// Mixed-script span material: Latin, German umlauts, Chinese, Cyrillic,
/// Telugu, digits and spaces — the scripts of the five corpus languages.
fn span_text() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[a-zA-Zäöüß一二三好模型预测привет модель телуగుతెలుగుపదం0-9 ]{1,40}")
        .expect("valid regex")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Every sentence the grammar samples parses, canonicalizes, and
    /// round-trips through serialization to an equivalent tree.
    #[test]
    fn sampled_sentences_parse_and_round_trip(seed: u64) {
        let registry = Registry::coxql();
        let grammar = full_grammar(&registry);
        let mut rng = StdRng::seed_from_u64(seed);
        let sentence = sample_sentence(&grammar, &mut rng);

        let tree = parse_label(&sentence, &registry)
            .unwrap_or_else(|e| panic!("sampled sentence {sentence:?} must parse: {e}"));
        let filled = canonicalize(&tree, &registry).expect("parsed trees canonicalize");
        let rendered = serialize(&filled, &registry).expect("canonical trees serialize");
        let reparsed = parse_label(&rendered, &registry).expect("canonical labels re-parse");
        prop_assert!(compare_parses(&tree, &reparsed, &registry),
            "{sentence:?} and its canonical form {rendered:?} disagree");
    }

    /// Feeding any sentence of the language char-by-char never rejects and
    /// ends with end-of-sequence allowed.
    #[test]
    fn sentences_feed_char_by_char(seed: u64) {
        let registry = Registry::coxql();
        let grammar = full_grammar(&registry);
        let mut rng = StdRng::seed_from_u64(seed);
        let sentence = sample_sentence(&grammar, &mut rng);

        let mut rec = PrefixRecognizer::new(&grammar);
        for c in sentence.chars() {
            prop_assert!(rec.push_char(c).is_ok(),
                "char {c:?} of sentence {sentence:?} rejected");
        }
        prop_assert!(rec.eos_allowed(), "complete sentence {sentence:?} must allow eos");
    }

    /// The trie-walking mask equals the brute-force per-piece oracle at any
    /// reachable recognizer state (any char prefix of any sentence).
    #[test]
    fn masks_match_brute_force(seed: u64, cut: prop::sample::Index) {
        let registry = Registry::coxql();
        let grammar = full_grammar(&registry);
        let tokenizer = Tokenizer::for_registry(&registry);
        let mut rng = StdRng::seed_from_u64(seed);
        let sentence = sample_sentence(&grammar, &mut rng);

        let chars: Vec<char> = sentence.chars().collect();
        let prefix: String = chars[..cut.index(chars.len() + 1)].iter().collect();
        let mut rec = PrefixRecognizer::new(&grammar);
        rec.push_str(&prefix).expect("sentence prefixes are viable");

        let fast = grammar_mask(&rec, tokenizer.trie());
        let pieces: HashMap<u32, String> =
            tokenizer.textual_pieces().map(|(id, text)| (id, text.to_string())).collect();
        let slow = brute_force_mask(&rec, &pieces, &[tokenizer.eos_id()], tokenizer.vocab_size());
        prop_assert_eq!(fast.allowed_ids(), slow.allowed_ids(),
            "masks diverge at prefix {:?}", prefix);
    }

    /// Appending junk to a valid label is always repairable back to that
    /// label's canonical form — and never mutates committed structure.
    #[test]
    fn trailing_junk_is_repaired_not_reinterpreted(seed: u64) {
        let registry = Registry::coxql();
        let grammar = full_grammar(&registry);
        let mut rng = StdRng::seed_from_u64(seed);
        let sentence = sample_sentence(&grammar, &mut rng);
        let canonical = {
            let tree = parse_label(&sentence, &registry).expect("samples parse");
            serialize(&canonicalize(&tree, &registry).expect("canonicalizes"), &registry)
                .expect("serializes")
        };

        match template_check(&format!("{sentence} zzz certainly"), &registry) {
            CheckResult::Repaired { canonical: got, .. } => prop_assert_eq!(got, canonical),
            CheckResult::Valid { .. } => prop_assert!(false, "junk cannot be valid"),
            CheckResult::Rejected { error } => {
                prop_assert!(false, "junk after {sentence:?} must truncate, got: {error}")
            }
        }
    }

    /// Greedy encoding concatenates back to the input for any ASCII text.
    #[test]
    fn tokenizer_round_trips_ascii(text in "[ -~]{0,60}") {
        let tokenizer = Tokenizer::for_registry(&Registry::coxql());
        let ids = tokenizer.encode(&text).expect("printable ASCII encodes");
        prop_assert_eq!(tokenizer.decode(&ids), text);
    }

    /// decode(encode(span)) recovers the span for all four approaches, with
    /// empty spans coming back as declared absence.
    #[test]
    fn extraction_encoders_round_trip(
        prefix in span_text(),
        span in span_text(),
        suffix in span_text(),
    ) {
        let question = format!("{prefix}{span}{suffix}");
        for approach in Approach::ALL {
            let answer = encoded_answer(approach, &question, span.trim());
            let decoded = decode(approach, &answer)
                .unwrap_or_else(|e| panic!("{approach}: own encoding must decode: {e}"));
            let expected = span.trim();
            if expected.is_empty() {
                prop_assert_eq!(decoded.extracted, None);
            } else {
                prop_assert_eq!(decoded.extracted.as_deref(), Some(expected));
            }
        }
    }

    /// validate_containment agrees with an all-offset brute-force scan over
    /// NFC-normalized char windows.
    #[test]
    fn containment_matches_brute_force(needle in span_text(), hay in span_text()) {
        let n: Vec<char> = nfc(&needle).chars().collect();
        let h: Vec<char> = nfc(&hay).chars().collect();
        let brute = n.is_empty()
            || (0..=h.len().saturating_sub(n.len()))
                .any(|at| h.len() >= n.len() && h[at..at + n.len()] == n[..]);
        prop_assert_eq!(validate_containment(&needle, &hay), brute);
    }

    /// micro-F1 over exact-match instances is the accuracy identity.
    #[test]
    fn micro_f1_is_accuracy(outcomes in prop::collection::vec(any::<bool>(), 1..200)) {
        let correct = outcomes.iter().filter(|&&b| b).count();
        let expected = 100.0 * correct as f64 / outcomes.len() as f64;
        prop_assert!((micro_f1(correct, outcomes.len()) - expected).abs() < 1e-9);
    }

    /// Mix arithmetic: all English kept, exactly ⌊p·|target|/100⌋ target
    /// records sampled without replacement, deterministic per seed.
    #[test]
    fn mix_invariants(
        en_n in 1usize..40,
        tgt_n in 1usize..200,
        p_idx in 0usize..MIX_PROPORTIONS.len(),
        seed: u64,
    ) {
        let proportion = MIX_PROPORTIONS[p_idx];
        let english: Vec<CoxqlRecord> = (0..en_n)
            .map(|i| CoxqlRecord::new(format!("en {i}"), "predict", Language::En))
            .collect();
        let target: Vec<CoxqlRecord> = (0..tgt_n)
            .map(|i| CoxqlRecord::new(format!("de {i}"), "predict", Language::De))
            .collect();
        let spec = MixSpec { target_language: Language::De, proportion, seed };

        let mix = build_multilingual_mix(&english, &target, &spec).expect("proportion valid");
        let want_target = (proportion as usize * tgt_n) / 100;
        prop_assert_eq!(mix.len(), en_n + want_target);
        let kept_en: HashSet<&str> = mix
            .iter()
            .filter(|r| r.language == Language::En)
            .map(|r| r.question.as_str())
            .collect();
        prop_assert_eq!(kept_en.len(), en_n, "every English record is kept");
        let sampled: Vec<&str> = mix
            .iter()
            .filter(|r| r.language == Language::De)
            .map(|r| r.question.as_str())
            .collect();
        let distinct: HashSet<&&str> = sampled.iter().collect();
        prop_assert_eq!(distinct.len(), sampled.len(), "sampling is without replacement");

        let again = build_multilingual_mix(&english, &target, &spec).expect("proportion valid");
        prop_assert_eq!(mix, again, "same seed, same pool");
    }

    /// Mock embeddings are unit vectors and retrieval returns descending
    /// scores with ascending-index tie-breaks.
    #[test]
    fn embeddings_are_unit_and_retrieval_sorted(
        texts in prop::collection::vec("[a-z ]{1,30}", 2..12),
        query in "[a-z ]{1,30}",
        k in 1usize..12,
    ) {
        let provider = MockEmbedder::new();
        let corpus: Vec<Vec<f32>> = texts
            .iter()
            .map(|t| provider.embed(t).expect("mock never fails"))
            .collect();
        for v in &corpus {
            let norm: f32 = v.iter().map(|x| x * x).sum::<f32>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-6, "non-unit norm {norm}");
        }
        let qvec = provider.embed(&query).expect("mock never fails");
        let hits = top_k(&qvec, &corpus, k);
        prop_assert_eq!(hits.len(), k.min(corpus.len()));
        for pair in hits.windows(2) {
            prop_assert!(pair[0].score > pair[1].score
                || (pair[0].score == pair[1].score && pair[0].index < pair[1].index));
        }
        for hit in &hits {
            prop_assert!((hit.score - cosine(&qvec, &corpus[hit.index])).abs() < 1e-6);
        }
    }
}
