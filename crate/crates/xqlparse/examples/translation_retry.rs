//! Joint translation with containment retries.
//!
//! Extraction records are translated jointly — question and custom input in
//! one JSON object — because translating them separately almost guarantees
//! the span no longer appears verbatim inside the question. Every response
//! is validated (JSON shape, operation name preserved, span containment,
//! no invented or dropped spans); failures are retried up to a cap with an
//! attempt-numbered reminder appended, and a record that exhausts the cap is
//! flagged with its rejection history, not dropped silently.
//!
//! Run with `cargo run --example translation_retry`.

use xqlparse::corpus::{compass_translation_prompt, translate_compass, CorpusError};
use xqlparse::extract::CompassRecord;
use xqlparse::lang::Language;
use xqlparse::llm::ScriptedBackend;

fn main() {
    let record = CompassRecord {
        user_question: "Flip the prediction of he paid the bill.".to_string(),
        operation_name: "cfe".to_string(),
        custom_input: "he paid the bill".to_string(),
        language: Language::En,
    };

    // Attempt 1 translates the two fields inconsistently — the span is not
    // a substring of the question — so validation rejects it. The retry
    // prompt differs (it carries the attempt number and the reminder), and
    // its scripted answer is consistent.
    let mut backend = ScriptedBackend::new("scripted");
    backend.insert(
        &compass_translation_prompt(&record, Language::De, 1),
        r#"{"user_question": "Kehre die Vorhersage von er zahlte um.", "operation_name": "cfe", "custom_input": "er hat die Rechnung bezahlt"}"#,
    );
    backend.insert(
        &compass_translation_prompt(&record, Language::De, 2),
        r#"{"user_question": "Kehre die Vorhersage von er hat die Rechnung bezahlt um.", "operation_name": "cfe", "custom_input": "er hat die Rechnung bezahlt"}"#,
    );

    let outcome =
        translate_compass(&record, Language::De, &backend, 5).expect("second attempt is valid");
    println!("accepted after {} attempts", outcome.attempts);
    for (i, rej) in outcome.rejected.iter().enumerate() {
        println!("  rejected[{i}]: {}", rej.reason);
    }
    println!("  question:     {}", outcome.record.user_question);
    println!("  custom_input: {}", outcome.record.custom_input);
    assert_eq!(outcome.attempts, 2);

    // Cap exhaustion: a backend that keeps breaking containment. The record
    // is not silently lost — the error carries the final response so the
    // caller can flag it for human review.
    let mut stubborn = ScriptedBackend::new("stubborn");
    for attempt in 1..=3 {
        stubborn.insert(
            &compass_translation_prompt(&record, Language::Zh, attempt),
            r#"{"user_question": "把这个预测反过来。", "operation_name": "cfe", "custom_input": "他付了账单"}"#,
        );
    }
    let err = translate_compass(&record, Language::Zh, &stubborn, 3)
        .expect_err("containment never holds");
    match err {
        CorpusError::TranslationFailed { attempts, last_response } => {
            println!("\nflagged after {attempts} attempts; last response kept for review:");
            println!("  {last_response}");
        }
        other => panic!("unexpected error: {other}"),
    }
}
