//! Few-shot intent recognition over Compass questions.
//!
//! The model answers with an intent name; multilingual models sometimes
//! answer in the question's language instead of the English label space, so
//! a per-language alias table maps those answers back when possible. An
//! answer that is neither a registry name nor a known alias is a
//! classification failure and scores as wrong.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::lang::Language;
use crate::llm::Backend;
use crate::query::Registry;

use super::{nfc, ExtractError, ExtractPool};

const TEMPLATE: &str = include_str!("../../assets/prompts/intent/fewshot.txt");
const ALIASES: &str = include_str!("../../assets/aliases/intent_aliases.json");

/// Completion budget: the answer is one short name.
const INTENT_TOKENS: usize = 16;

/// Fingerprint of the intent prompt template, for run provenance.
pub fn intent_template_version() -> (&'static str, String) {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(TEMPLATE.as_bytes());
    let fp: String = digest.iter().take(4).map(|b| format!("{b:02x}")).collect();
    ("intent_fewshot", fp)
}

/// The bundled alias table: per language, lowercase alias → registry name.
pub fn intent_aliases() -> &'static HashMap<Language, HashMap<String, String>> {
    static TABLE: OnceLock<HashMap<Language, HashMap<String, String>>> = OnceLock::new();
    TABLE.get_or_init(|| serde_json::from_str(ALIASES).expect("bundled alias table is valid"))
}

/// One intent classification outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentPrediction {
    pub prompt: String,
    pub raw_output: String,
    /// The normalized registry name, absent when the answer matched neither
    /// a name nor an alias.
    pub intent: Option<String>,
    /// True when normalization went through the alias table.
    pub via_alias: bool,
}

/// The prompt [`classify_intent_fewshot`] sends: the registry's intents, the
/// most similar training questions as demonstrations, then the question.
pub fn intent_prompt(registry: &Registry, question: &str, demos: &[(&str, &str)]) -> String {
    let listing: Vec<String> = registry
        .clause_operations()
        .map(|op| format!("- {}", op.name))
        .collect();
    let mut blocks = String::new();
    for (q, intent) in demos {
        blocks.push_str(&format!("question: {q}\nintent: {intent}\n\n"));
    }
    let rendered = TEMPLATE
        .replace("{intents}", &listing.join("\n"))
        .replace("{demonstrations}", &blocks)
        .replace("{question}", question);
    format!("{rendered} ")
}

/// Classify `question` with `shots` similarity-selected demonstrations and
/// normalize the answer to the registry's English intent names.
pub fn classify_intent_fewshot(
    registry: &Registry,
    pool: &ExtractPool<'_>,
    backend: &dyn Backend,
    question: &str,
    language: Language,
    shots: usize,
) -> Result<IntentPrediction, ExtractError> {
    let demos = pool.demonstrations(question, shots)?;
    let pairs: Vec<(&str, &str)> = demos
        .iter()
        .map(|r| (r.user_question.as_str(), r.operation_name.as_str()))
        .collect();
    let prompt = intent_prompt(registry, question, &pairs);
    let completion = backend.complete(&prompt, INTENT_TOKENS)?;
    let (intent, via_alias) = normalize_intent(registry, language, &completion.text);
    Ok(IntentPrediction { prompt, raw_output: completion.text, intent, via_alias })
}

/// Map a raw answer to a registry name: exact match first, then the
/// question language's aliases, then any language's (models drift).
pub fn normalize_intent(
    registry: &Registry,
    language: Language,
    raw: &str,
) -> (Option<String>, bool) {
    let candidate = nfc(raw)
        .trim()
        .trim_matches(|c: char| matches!(c, '.' | ',' | '"' | '\'' | '`' | '!' | '?'))
        .to_lowercase();
    if registry.contains(&candidate) {
        return (Some(candidate), false);
    }
    let table = intent_aliases();
    if let Some(name) = table.get(&language).and_then(|m| m.get(&candidate)) {
        return (Some(name.clone()), true);
    }
    for lang in Language::ALL {
        if lang == language {
            continue;
        }
        if let Some(name) = table.get(&lang).and_then(|m| m.get(&candidate)) {
            return (Some(name.clone()), true);
        }
    }
    (None, false)
}
