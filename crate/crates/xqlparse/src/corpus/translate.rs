//! Machine translation of dataset records with containment checking.
//!
//! Parsing records translate the question only — the gold label is
//! language-independent and must come through byte-identical. Extraction
//! records translate question and custom input jointly, because the
//! translated span must remain a contiguous substring of the translated
//! question; when it does not, the translator retries with an explicit
//! reminder, up to a cap, and a record that still fails is returned as an
//! error carrying the last response so it can be flagged rather than
//! silently dropped.

use serde::{Deserialize, Serialize};

use crate::extract::{validate_containment, CompassRecord};
use crate::lang::Language;
use crate::llm::Backend;

use super::{CorpusError, CoxqlRecord};

const QUESTION_TEMPLATE: &str = include_str!("../../assets/prompts/translate/question.txt");
const COMPASS_TEMPLATE: &str = include_str!("../../assets/prompts/translate/compass.txt");

/// How many model calls a joint translation may take before the record is
/// flagged as untranslatable.
pub const TRANSLATION_RETRY_CAP: usize = 5;

/// Generous budget: translations are about as long as their inputs.
const TRANSLATE_TOKENS: usize = 512;

/// A successful translation plus how much work it took.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationOutcome<R> {
    pub record: R,
    /// Model calls made, counting the successful one.
    pub attempts: usize,
    /// Responses that were rejected before the accepted one, with reasons.
    pub rejected: Vec<RejectedAttempt>,
}

/// One model response that failed validation during translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedAttempt {
    pub response: String,
    pub reason: String,
}

/// Prompt for translating a bare question into `target`.
pub fn coxql_translation_prompt(question: &str, target: Language) -> String {
    QUESTION_TEMPLATE
        .replace("{language}", target.english_name())
        .replace("{original_input}", question)
}

/// Prompt for jointly translating a question and its custom input into
/// `target`. Retries (`attempt` ≥ 2) append a reminder of the containment
/// requirement so the prompt — and therefore the response — can change.
pub fn compass_translation_prompt(
    record: &CompassRecord,
    target: Language,
    attempt: usize,
) -> String {
    let wire = serde_json::json!({
        "user_question": record.user_question,
        "operation_name": record.operation_name,
        "custom_input": record.custom_input,
    });
    let mut prompt = COMPASS_TEMPLATE
        .replace("{language}", target.english_name())
        .replace("{operation_name}", &record.operation_name)
        .replace("{record}", &wire.to_string());
    if attempt > 1 {
        prompt.push_str(&format!(
            "\n\nThis is attempt {attempt}. The previous answer was rejected; answer with the \
             JSON object only, keep operation_name unchanged, and make sure the translated \
             custom_input appears verbatim inside the translated user_question."
        ));
    }
    prompt
}

/// Translates a parsing record's question; the gold label is copied through
/// untouched. One model call, no retry — there is no containment to violate.
pub fn translate_coxql(
    record: &CoxqlRecord,
    target: Language,
    backend: &dyn Backend,
) -> Result<TranslationOutcome<CoxqlRecord>, CorpusError> {
    let prompt = coxql_translation_prompt(&record.question, target);
    let completion = backend.complete(&prompt, TRANSLATE_TOKENS)?;
    let translated = CoxqlRecord {
        question: completion.text.trim().to_string(),
        parse: record.parse.clone(),
        language: target,
    };
    Ok(TranslationOutcome { record: translated, attempts: 1, rejected: Vec::new() })
}

/// Strips one layer of Markdown code fencing, which chat models like to wrap
/// around JSON answers.
fn strip_fences(raw: &str) -> &str {
    let trimmed = raw.trim();
    let Some(inner) = trimmed.strip_prefix("```") else { return trimmed };
    let inner = inner.strip_suffix("```").unwrap_or(inner);
    // Drop a language tag such as `json` on the opening fence line.
    match inner.split_once('\n') {
        Some((first, rest)) if !first.trim().is_empty() && !first.trim().starts_with('{') => {
            rest.trim()
        }
        _ => inner.trim(),
    }
}

#[derive(Deserialize)]
struct TranslatedWire {
    user_question: String,
    operation_name: String,
    #[serde(default)]
    custom_input: String,
}

/// Validates one joint-translation response. Returns the translated record,
/// or the reason it must be rejected.
pub fn decode_compass_translation(
    raw: &str,
    source: &CompassRecord,
    target: Language,
) -> Result<CompassRecord, String> {
    let wire: TranslatedWire = serde_json::from_str(strip_fences(raw))
        .map_err(|err| format!("response is not the expected JSON object: {err}"))?;
    if wire.operation_name != source.operation_name {
        return Err(format!(
            "operation_name changed from {:?} to {:?}",
            source.operation_name, wire.operation_name
        ));
    }
    if source.custom_input.is_empty() != wire.custom_input.is_empty() {
        return Err(if wire.custom_input.is_empty() {
            "custom_input was dropped by the translation".to_string()
        } else {
            "custom_input was invented where the source had none".to_string()
        });
    }
    if !wire.custom_input.is_empty()
        && !validate_containment(&wire.custom_input, &wire.user_question)
    {
        return Err(format!(
            "translated custom_input {:?} is not a contiguous substring of the translated \
             user_question",
            wire.custom_input
        ));
    }
    Ok(CompassRecord {
        user_question: wire.user_question,
        operation_name: wire.operation_name,
        custom_input: wire.custom_input,
        language: target,
    })
}

/// Jointly translates an extraction record, retrying on validation failures
/// up to `cap` attempts. Backend failures abort immediately — they are
/// infrastructure problems, not translation quality.
pub fn translate_compass(
    record: &CompassRecord,
    target: Language,
    backend: &dyn Backend,
    cap: usize,
) -> Result<TranslationOutcome<CompassRecord>, CorpusError> {
    let cap = cap.max(1);
    let mut rejected = Vec::new();
    let mut last_response = String::new();
    for attempt in 1..=cap {
        let prompt = compass_translation_prompt(record, target, attempt);
        let completion = backend.complete(&prompt, TRANSLATE_TOKENS)?;
        match decode_compass_translation(&completion.text, record, target) {
            Ok(translated) => {
                return Ok(TranslationOutcome { record: translated, attempts: attempt, rejected })
            }
            Err(reason) => {
                last_response = completion.text.clone();
                rejected.push(RejectedAttempt { response: completion.text, reason });
            }
        }
    }
    Err(CorpusError::TranslationFailed { attempts: cap, last_response })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::ScriptedBackend;

    fn span_record() -> CompassRecord {
        CompassRecord {
            user_question: "Can you alter the sentence he paid the bill to get another outcome?"
                .to_string(),
            operation_name: "cfe".to_string(),
            custom_input: "he paid the bill".to_string(),
            language: Language::En,
        }
    }

    #[test]
    fn question_translation_keeps_the_gold_parse_byte_identical() {
        let record =
            CoxqlRecord::new("show me the five most important words", "nlpattribute topk 5", Language::En);
        let prompt = coxql_translation_prompt(&record.question, Language::De);
        assert!(prompt.starts_with("You are an excellent translator."));
        assert!(prompt.ends_with(&record.question));
        let mut backend = ScriptedBackend::new("translate");
        backend.insert(&prompt, "zeig mir die fünf wichtigsten Wörter");
        let out = translate_coxql(&record, Language::De, &backend).unwrap();
        assert_eq!(out.record.parse, record.parse);
        assert_eq!(out.record.question, "zeig mir die fünf wichtigsten Wörter");
        assert_eq!(out.record.language, Language::De);
        assert_eq!(out.attempts, 1);
    }

    #[test]
    fn joint_translation_accepts_a_contained_response_first_try() {
        let record = span_record();
        let prompt = compass_translation_prompt(&record, Language::De, 1);
        assert!(prompt.contains("keeping operation_name as 'cfe'"));
        assert!(prompt.contains(&record.user_question));
        let mut backend = ScriptedBackend::new("translate");
        backend.insert(
            &prompt,
            r#"{"user_question": "Kannst du den Satz er bezahlte die Rechnung ändern?",
                "operation_name": "cfe", "custom_input": "er bezahlte die Rechnung"}"#,
        );
        let out = translate_compass(&record, Language::De, &backend, TRANSLATION_RETRY_CAP)
            .unwrap();
        assert_eq!(out.attempts, 1);
        assert!(out.rejected.is_empty());
        assert_eq!(out.record.custom_input, "er bezahlte die Rechnung");
        assert_eq!(out.record.language, Language::De);
    }

    #[test]
    fn containment_violation_retries_and_the_second_attempt_wins() {
        let record = span_record();
        let mut backend = ScriptedBackend::new("translate");
        // First response paraphrases the span out of the question.
        backend.insert(
            &compass_translation_prompt(&record, Language::Ru, 1),
            r#"{"user_question": "Можешь изменить предложение, чтобы получить другой результат?",
                "operation_name": "cfe", "custom_input": "он оплатил счёт"}"#,
        );
        backend.insert(
            &compass_translation_prompt(&record, Language::Ru, 2),
            r#"{"user_question": "Можешь изменить предложение он оплатил счёт?",
                "operation_name": "cfe", "custom_input": "он оплатил счёт"}"#,
        );
        let out =
            translate_compass(&record, Language::Ru, &backend, TRANSLATION_RETRY_CAP).unwrap();
        assert_eq!(out.attempts, 2);
        assert_eq!(out.rejected.len(), 1);
        assert!(out.rejected[0].reason.contains("contiguous substring"));
        assert!(validate_containment(&out.record.custom_input, &out.record.user_question));
    }

    #[test]
    fn exhausting_the_cap_returns_the_last_response_for_flagging() {
        let record = span_record();
        let mut backend = ScriptedBackend::new("translate");
        for attempt in 1..=3 {
            backend.insert(
                &compass_translation_prompt(&record, Language::Zh, attempt),
                format!(
                    r#"{{"user_question": "改一下这句话", "operation_name": "cfe",
                        "custom_input": "他付了账单 v{attempt}"}}"#,
                ),
            );
        }
        let err = translate_compass(&record, Language::Zh, &backend, 3).unwrap_err();
        let CorpusError::TranslationFailed { attempts, last_response } = err else {
            panic!("expected TranslationFailed");
        };
        assert_eq!(attempts, 3);
        assert!(last_response.contains("他付了账单 v3"));
    }

    #[test]
    fn operation_rename_and_fenced_json_are_handled() {
        let record = span_record();
        assert!(decode_compass_translation(
            r#"{"user_question": "q span", "operation_name": "adversarial", "custom_input": "span"}"#,
            &record,
            Language::De,
        )
        .unwrap_err()
        .contains("operation_name changed"));

        let fenced = "```json\n{\"user_question\": \"q span\", \"operation_name\": \"cfe\", \
                      \"custom_input\": \"span\"}\n```";
        let ok = decode_compass_translation(fenced, &record, Language::De).unwrap();
        assert_eq!(ok.custom_input, "span");
    }

    #[test]
    fn empty_source_span_must_stay_empty() {
        let record = CompassRecord {
            user_question: "What can you do?".to_string(),
            operation_name: "function".to_string(),
            custom_input: String::new(),
            language: Language::En,
        };
        let err = decode_compass_translation(
            r#"{"user_question": "Was kannst du tun?", "operation_name": "function",
                "custom_input": "Was"}"#,
            &record,
            Language::De,
        )
        .unwrap_err();
        assert!(err.contains("invented"));

        let ok = decode_compass_translation(
            r#"{"user_question": "Was kannst du tun?", "operation_name": "function",
                "custom_input": ""}"#,
            &record,
            Language::De,
        )
        .unwrap();
        assert_eq!(ok.custom_input, "");
    }
}
