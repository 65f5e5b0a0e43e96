//! Custom-input extraction over Compass-style questions.
//!
//! A Compass record pairs a user question with the *custom input* — the text
//! span the user supplied for the system to act on — and a coarse intent.
//! This module provides the full span side of that task:
//!
//! * [`decode`]/[`encoded_answer`] — strict decoders and matching encoders
//!   for the four output formats (naive echo, TANL inline tags, GPT-NER
//!   `@@`/`##` markers, GOLLIE string lists);
//! * [`build_extraction_prompt`] — few-shot prompt assembly per approach;
//! * [`validate_containment`] — the rule that a span must be a contiguous
//!   substring of its question, checked after NFC normalization;
//! * [`classify_intent_fewshot`] — intent recognition with normalization of
//!   wrong-language answers via a bundled alias table;
//! * [`score_extraction`] — instance-level exact-match micro-F1 plus a
//!   character-overlap diagnostic.

mod decode;
mod intent;
mod pool;
mod prompts;
mod score;

pub use decode::{decode, encoded_answer, Decoded, DecodeError};
pub use intent::{
    classify_intent_fewshot, intent_aliases, intent_prompt, intent_template_version,
    IntentPrediction,
};
pub use pool::ExtractPool;
pub use prompts::{build_extraction_prompt, extraction_versions};
pub use score::{matches_gold, score_extraction, ExtractionScore};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::lang::Language;

/// One Compass data point. The span is always a contiguous substring of the
/// question — loaders and translators enforce it, [`validate_containment`]
/// checks it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompassRecord {
    pub user_question: String,
    pub operation_name: String,
    pub custom_input: String,
    pub language: Language,
}

/// The four extraction output formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    Naive,
    Tanl,
    GptNer,
    Gollie,
}

impl Approach {
    pub const ALL: [Approach; 4] =
        [Approach::Naive, Approach::Tanl, Approach::GptNer, Approach::Gollie];

    pub fn as_str(self) -> &'static str {
        match self {
            Approach::Naive => "naive",
            Approach::Tanl => "tanl",
            Approach::GptNer => "gptner",
            Approach::Gollie => "gollie",
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raised by [`Approach::from_str`] for names outside the four.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown extraction approach {0:?} (expected naive, tanl, gptner or gollie)")]
pub struct UnknownApproach(pub String);

impl FromStr for Approach {
    type Err = UnknownApproach;

    fn from_str(s: &str) -> Result<Approach, UnknownApproach> {
        match s.to_ascii_lowercase().as_str() {
            "naive" => Ok(Approach::Naive),
            "tanl" => Ok(Approach::Tanl),
            "gptner" | "gpt-ner" | "gpt_ner" => Ok(Approach::GptNer),
            "gollie" => Ok(Approach::Gollie),
            other => Err(UnknownApproach(other.to_string())),
        }
    }
}

/// What one raw model output became.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub approach: Approach,
    pub raw_output: String,
    /// The decoded span; absent when the model declared no custom input or
    /// the output failed to decode.
    pub extracted: Option<String>,
    /// Whether the span is a contiguous substring of the question.
    pub contained: bool,
    /// Set iff the output was malformed for the approach's format.
    pub decode_error: Option<DecodeError>,
    /// Non-fatal notes, e.g. extra annotations beyond the first.
    pub diagnostic: Option<String>,
}

/// Infrastructure failures in extraction or intent classification.
#[derive(Debug, Error)]
pub enum ExtractError {
    #[error(transparent)]
    Embed(#[from] crate::embed::EmbedError),
    #[error(transparent)]
    Backend(#[from] crate::llm::BackendError),
    #[error("training split is empty")]
    EmptyPool,
}

/// NFC-normalize, so composed and decomposed spellings compare equal.
pub fn nfc(text: &str) -> String {
    text.nfc().collect()
}

/// True iff `extracted` appears contiguously inside `question`, comparing
/// exact characters after NFC normalization.
pub fn validate_containment(extracted: &str, question: &str) -> bool {
    nfc(question).contains(&nfc(extracted))
}

/// Decode a raw model output and check containment against the question.
pub fn extract_one(approach: Approach, question: &str, raw: &str) -> ExtractionResult {
    match decode(approach, raw) {
        Ok(Decoded { extracted, diagnostic }) => {
            let contained = extracted
                .as_deref()
                .map(|span| validate_containment(span, question))
                .unwrap_or(false);
            ExtractionResult {
                approach,
                raw_output: raw.to_string(),
                extracted,
                contained,
                decode_error: None,
                diagnostic,
            }
        }
        Err(err) => ExtractionResult {
            approach,
            raw_output: raw.to_string(),
            extracted: None,
            contained: false,
            decode_error: Some(err),
            diagnostic: None,
        },
    }
}
