//! Strict decoders for the four extraction output formats, plus the
//! matching encoders used to write demonstration answers.
//!
//! Decoders never guess: malformed markup comes back as a typed
//! [`DecodeError`], and an output that *declares* absence (empty string,
//! empty list) comes back as `extracted: None` — the two are different
//! outcomes and are scored differently downstream.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Approach;

/// The TANL closing tag; the span sits between `[ ` and this.
const TANL_CLOSE: &str = " | custom_input ]";
const TANL_OPEN: &str = "[ ";

/// A successfully decoded output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    /// The span, or `None` when the output declared no custom input.
    pub extracted: Option<String>,
    /// Non-fatal notes, e.g. annotations beyond the first.
    pub diagnostic: Option<String>,
}

impl Decoded {
    fn none() -> Decoded {
        Decoded { extracted: None, diagnostic: None }
    }

    fn span(text: impl Into<String>) -> Decoded {
        let text = text.into();
        Decoded {
            extracted: if text.is_empty() { None } else { Some(text) },
            diagnostic: None,
        }
    }

    fn noted(mut self, diagnostic: impl Into<String>) -> Decoded {
        self.diagnostic = Some(diagnostic.into());
        self
    }
}

/// Why an output could not be decoded under its approach's format.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecodeError {
    #[error("no `[ span | custom_input ]` annotation in a non-empty output")]
    MissingAnnotation,
    #[error("`@@` marker without a closing `##`")]
    UnbalancedMarkers,
    #[error("output is not a list of strings: {raw:?}")]
    NotAList { raw: String },
}

/// Decode `raw` under the given approach's format.
pub fn decode(approach: Approach, raw: &str) -> Result<Decoded, DecodeError> {
    match approach {
        Approach::Naive => Ok(decode_naive(raw)),
        Approach::Tanl => decode_tanl(raw),
        Approach::GptNer => decode_gptner(raw),
        Approach::Gollie => decode_gollie(raw),
    }
}

/// Trim whitespace and one layer of matching surrounding quotes; an empty
/// remainder means the model declared no custom input.
pub fn decode_naive(raw: &str) -> Decoded {
    let trimmed = raw.trim();
    let unquoted = strip_quotes(trimmed).trim();
    Decoded::span(unquoted)
}

fn strip_quotes(text: &str) -> &str {
    for (open, close) in [('"', '"'), ('\'', '\''), ('“', '”'), ('‘', '’'), ('「', '」'), ('«', '»')] {
        if text.len() >= open.len_utf8() + close.len_utf8()
            && text.starts_with(open)
            && text.ends_with(close)
        {
            return &text[open.len_utf8()..text.len() - close.len_utf8()];
        }
    }
    text
}

/// The span between the first `[ ` and the following ` | custom_input ]`.
pub fn decode_tanl(raw: &str) -> Result<Decoded, DecodeError> {
    if raw.trim().is_empty() {
        return Ok(Decoded::none());
    }
    let Some(open) = raw.find(TANL_OPEN) else {
        return Err(DecodeError::MissingAnnotation);
    };
    let after_open = &raw[open + TANL_OPEN.len()..];
    let Some(close) = after_open.find(TANL_CLOSE) else {
        return Err(DecodeError::MissingAnnotation);
    };
    let span = &after_open[..close];
    let rest = &after_open[close + TANL_CLOSE.len()..];
    let decoded = Decoded::span(span);
    if rest.contains(TANL_OPEN) && rest.contains(TANL_CLOSE) {
        Ok(decoded.noted("multiple annotations; using the first"))
    } else {
        Ok(decoded)
    }
}

/// The span between the first `@@` and the following `##`.
pub fn decode_gptner(raw: &str) -> Result<Decoded, DecodeError> {
    if raw.trim().is_empty() {
        return Ok(Decoded::none());
    }
    let Some(open) = raw.find("@@") else {
        return Err(DecodeError::MissingAnnotation);
    };
    let after_open = &raw[open + 2..];
    let Some(close) = after_open.find("##") else {
        return Err(DecodeError::UnbalancedMarkers);
    };
    let span = &after_open[..close];
    let rest = &after_open[close + 2..];
    let decoded = Decoded::span(span);
    if rest.contains("@@") {
        Ok(decoded.noted("multiple annotations; using the first"))
    } else {
        Ok(decoded)
    }
}

/// A JSON list of strings: empty list means none, first element is the
/// span, extras are noted.
pub fn decode_gollie(raw: &str) -> Result<Decoded, DecodeError> {
    let trimmed = raw.trim();
    let spans: Vec<String> = serde_json::from_str(trimmed)
        .map_err(|_| DecodeError::NotAList { raw: trimmed.to_string() })?;
    match spans.split_first() {
        None => Ok(Decoded::none()),
        Some((first, [])) => Ok(Decoded::span(first.clone())),
        Some((first, extras)) => Ok(Decoded::span(first.clone())
            .noted(format!("{} extra list elements ignored", extras.len()))),
    }
}

/// The demonstration answer for a `(question, span)` pair under `approach` —
/// exactly what a perfect model would output.
pub fn encoded_answer(approach: Approach, question: &str, span: &str) -> String {
    match approach {
        Approach::Naive => span.to_string(),
        Approach::Tanl => encode_inline(question, span, &format!("{TANL_OPEN}{span}{TANL_CLOSE}")),
        Approach::GptNer => encode_inline(question, span, &format!("@@{span}##")),
        Approach::Gollie => {
            if span.is_empty() {
                "[]".to_string()
            } else {
                serde_json::to_string(&[span]).expect("strings serialize")
            }
        }
    }
}

/// Mark the first occurrence of `span` inside `question`. An empty span
/// encodes as an empty answer — the declared-absent convention the decoders
/// accept — never as an unannotated echo, which they reject as
/// [`DecodeError::MissingAnnotation`].
fn encode_inline(question: &str, span: &str, marked: &str) -> String {
    if span.is_empty() {
        return String::new();
    }
    question.replacen(span, marked, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_trims_whitespace_and_quotes() {
        assert_eq!(decode_naive("the movie was great").extracted.as_deref(), Some("the movie was great"));
        assert_eq!(decode_naive("  \"good film\" ").extracted.as_deref(), Some("good film"));
        assert_eq!(decode_naive("").extracted, None);
        assert_eq!(decode_naive("  ").extracted, None);
        // One layer only: inner quotes survive.
        assert_eq!(decode_naive("\"\"x\"\"").extracted.as_deref(), Some("\"x\""));
    }

    #[test]
    fn tanl_extracts_the_annotated_span() {
        let decoded = decode_tanl("Explain [ great movie | custom_input ] please").unwrap();
        assert_eq!(decoded.extracted.as_deref(), Some("great movie"));
        assert!(decoded.diagnostic.is_none());
    }

    #[test]
    fn tanl_rejects_missing_annotations() {
        assert_eq!(decode_tanl("no annotation here").unwrap_err(), DecodeError::MissingAnnotation);
        assert_eq!(decode_tanl("[ half open").unwrap_err(), DecodeError::MissingAnnotation);
        assert_eq!(decode_tanl("").unwrap().extracted, None); // declared absent
    }

    #[test]
    fn tanl_takes_the_first_of_multiple_annotations() {
        let raw = "[ a | custom_input ] then [ b | custom_input ]";
        let decoded = decode_tanl(raw).unwrap();
        assert_eq!(decoded.extracted.as_deref(), Some("a"));
        assert!(decoded.diagnostic.is_some());
    }

    #[test]
    fn gptner_extracts_between_markers() {
        let decoded = decode_gptner("I watched @@great movie## yesterday").unwrap();
        assert_eq!(decoded.extracted.as_deref(), Some("great movie"));
    }

    #[test]
    fn gptner_rejects_unbalanced_markers() {
        assert_eq!(decode_gptner("@@unclosed").unwrap_err(), DecodeError::UnbalancedMarkers);
        assert_eq!(decode_gptner("plain text").unwrap_err(), DecodeError::MissingAnnotation);
    }

    #[test]
    fn gptner_takes_the_first_of_multiple_annotations() {
        let decoded = decode_gptner("@@a## and @@b##").unwrap();
        assert_eq!(decoded.extracted.as_deref(), Some("a"));
        assert!(decoded.diagnostic.is_some());
    }

    #[test]
    fn gollie_parses_string_lists() {
        assert_eq!(decode_gollie("[\"great movie\"]").unwrap().extracted.as_deref(), Some("great movie"));
        assert_eq!(decode_gollie("[]").unwrap().extracted, None);
        assert!(matches!(decode_gollie("not a list").unwrap_err(), DecodeError::NotAList { .. }));
        assert!(matches!(decode_gollie("[1, 2]").unwrap_err(), DecodeError::NotAList { .. }));
        let two = decode_gollie("[\"a\", \"b\"]").unwrap();
        assert_eq!(two.extracted.as_deref(), Some("a"));
        assert!(two.diagnostic.is_some());
    }

    #[test]
    fn encoders_round_trip_through_their_decoders() {
        let question = "Почему модель считает, что этот фильм хороший?";
        let span = "этот фильм хороший";
        for approach in Approach::ALL {
            let answer = encoded_answer(approach, question, span);
            let decoded = decode(approach, &answer).unwrap();
            assert_eq!(decoded.extracted.as_deref(), Some(span), "{approach}");
        }
    }

    #[test]
    fn empty_spans_encode_as_declared_absence() {
        let question = "no custom input here";
        for approach in Approach::ALL {
            let answer = encoded_answer(approach, question, "");
            let decoded = decode(approach, &answer).unwrap();
            assert_eq!(decoded.extracted, None, "{approach}: {answer:?}");
            // An unannotated echo, by contrast, is malformed for the inline
            // formats — absence must be declared, not implied.
            if matches!(approach, Approach::Tanl | Approach::GptNer) {
                assert!(decode(approach, question).is_err());
            }
        }
    }
}
