//! Languages covered by the multilingual corpora.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The five languages the bundled datasets and prompt templates cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    De,
    Zh,
    Ru,
    Te,
}

impl Language {
    pub const ALL: [Language; 5] = [
        Language::En,
        Language::De,
        Language::Zh,
        Language::Ru,
        Language::Te,
    ];

    /// ISO 639-1 code, used in dataset file names.
    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::De => "de",
            Language::Zh => "zh",
            Language::Ru => "ru",
            Language::Te => "te",
        }
    }

    /// English name, used when instructing a model to translate.
    pub fn english_name(self) -> &'static str {
        match self {
            Language::En => "English",
            Language::De => "German",
            Language::Zh => "Chinese",
            Language::Ru => "Russian",
            Language::Te => "Telugu",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown language code `{0}` (expected one of en, de, zh, ru, te)")]
pub struct UnknownLanguage(pub String);

impl FromStr for Language {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Language, UnknownLanguage> {
        match s.to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "de" => Ok(Language::De),
            "zh" => Ok(Language::Zh),
            "ru" => Ok(Language::Ru),
            "te" => Ok(Language::Te),
            _ => Err(UnknownLanguage(s.to_string())),
        }
    }
}
