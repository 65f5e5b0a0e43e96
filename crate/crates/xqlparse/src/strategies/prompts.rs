//! Prompt assembly for the generation-backed strategies.
//!
//! Templates live under `assets/prompts/parse/` and are compiled in, so a
//! build is self-contained. [`versions`] fingerprints each template so run
//! metadata can pin exactly which wording produced a result. Builders are
//! deterministic string functions: fixture suites call them to reconstruct
//! the byte-exact prompts a strategy will send.

use sha2::{Digest, Sha256};

use crate::query::{OperationSpec, Registry, SlotKind};

use super::DemonstrationSet;

const GD: &str = include_str!("../../assets/prompts/parse/gd.txt");
const MP_OPERATION: &str = include_str!("../../assets/prompts/parse/mp_operation.txt");
const MP_ATTRIBUTES: &str = include_str!("../../assets/prompts/parse/mp_attributes.txt");
const GMP_INTENT: &str = include_str!("../../assets/prompts/parse/gmp_intent.txt");
const GMP_ATTRIBUTES: &str = include_str!("../../assets/prompts/parse/gmp_attributes.txt");

/// `(template name, first 8 hex digits of its SHA-256)` for every template,
/// recorded in run metadata so reports are traceable to exact prompt text.
pub fn versions() -> Vec<(&'static str, String)> {
    [
        ("gd", GD),
        ("mp_operation", MP_OPERATION),
        ("mp_attributes", MP_ATTRIBUTES),
        ("gmp_intent", GMP_INTENT),
        ("gmp_attributes", GMP_ATTRIBUTES),
    ]
    .into_iter()
    .map(|(name, text)| (name, fingerprint8(text)))
    .collect()
}

fn fingerprint8(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(4).map(|b| format!("{b:02x}")).collect()
}

/// The shape a canonical clause takes, with slot payloads abstracted:
/// `nlpattribute topk <int> <lime|input_x_gradient|integrated_gradients|attention>`.
pub fn operation_signature(op: &OperationSpec) -> String {
    let mut parts = vec![op.name.clone()];
    for slot in op.rendered_slots() {
        match slot.kind {
            SlotKind::Integer => {
                parts.push(slot.name.clone());
                parts.push("<int>".to_string());
            }
            SlotKind::EnumToken => parts.push(format!("<{}>", slot.allowed_values.join("|"))),
            SlotKind::FreeToken => parts.push(format!("<{}>", slot.name)),
            SlotKind::None => {}
        }
    }
    parts.join(" ")
}

/// `question:`/answer blocks, one per demonstration, each followed by a
/// blank line so the block composes with the template's own `question:` line.
fn qa_block<'e>(entries: impl IntoIterator<Item = (&'e str, &'e str)>, key: &str) -> String {
    let mut out = String::new();
    for (question, answer) in entries {
        out.push_str(&format!("question: {question}\n{key}: {answer}\n\n"));
    }
    out
}

fn pairs(demos: &DemonstrationSet) -> impl Iterator<Item = (&str, &str)> {
    demos.entries.iter().map(|(q, a)| (q.as_str(), a.as_str()))
}

/// The guided-decoding prompt: demonstrations, then the question.
pub fn gd_prompt(question: &str, demos: &DemonstrationSet) -> String {
    let rendered = GD
        .replace("{demonstrations}", &qa_block(pairs(demos), "request"))
        .replace("{question}", question);
    format!("{rendered} ")
}

/// The multi-prompt coarse stage: every operation in a simplified listing,
/// demonstrations mapping questions to operation names.
pub fn mp_operation_prompt(
    registry: &Registry,
    question: &str,
    demos: &[(String, String)],
) -> String {
    let listing: Vec<String> = registry
        .clause_operations()
        .map(|op| format!("- {}: {}", op.name, op.description))
        .collect();
    let blocks = qa_block(demos.iter().map(|(q, a)| (q.as_str(), a.as_str())), "operation");
    let rendered = MP_OPERATION
        .replace("{operations}", &listing.join("\n"))
        .replace("{demonstrations}", &blocks)
        .replace("{question}", question);
    format!("{rendered} ")
}

/// The multi-prompt fine stage: one operation's template plus its own
/// demonstrations.
pub fn mp_attribute_prompt(
    op: &OperationSpec,
    question: &str,
    demos: &DemonstrationSet,
) -> String {
    let rendered = MP_ATTRIBUTES
        .replace("{operation}", &op.name)
        .replace("{template}", &operation_signature(op))
        .replace("{demonstrations}", &qa_block(pairs(demos), "request"))
        .replace("{question}", question);
    format!("{rendered} ")
}

/// The guided multi-prompt coarse stage: candidate intents only, with
/// per-candidate demonstrations mapping questions to intent names.
pub fn gmp_intent_prompt(
    question: &str,
    candidates: &[&str],
    demos: &[(String, String)],
) -> String {
    let listing: Vec<String> = candidates.iter().map(|name| format!("- {name}")).collect();
    let blocks = qa_block(demos.iter().map(|(q, a)| (q.as_str(), a.as_str())), "intent");
    let rendered = GMP_INTENT
        .replace("{candidates}", &listing.join("\n"))
        .replace("{demonstrations}", &blocks)
        .replace("{question}", question);
    format!("{rendered} ")
}

/// The guided multi-prompt fill stage: the chosen intent's template and
/// demonstrations.
pub fn gmp_attribute_prompt(
    op: &OperationSpec,
    question: &str,
    demos: &DemonstrationSet,
) -> String {
    let rendered = GMP_ATTRIBUTES
        .replace("{intent}", &op.name)
        .replace("{template}", &operation_signature(op))
        .replace("{demonstrations}", &qa_block(pairs(demos), "request"))
        .replace("{question}", question);
    format!("{rendered} ")
}
