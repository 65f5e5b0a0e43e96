//! Dataset tooling: typed records, file loaders with validation, multilingual
//! mixing, machine-translation helpers, and per-split statistics.
//!
//! Two record shapes are supported. Parsing datasets pair a user question with
//! a gold label string ([`CoxqlRecord`]); extraction datasets pair a question
//! with an operation name and an optional custom input
//! ([`CompassRecord`](crate::extract::CompassRecord)). Files follow the naming
//! scheme `{dataset}.{split}.{lang}.json` and hold a flat JSON array of
//! records.

mod load;
mod mix;
mod stats;
mod translate;

use serde::{Deserialize, Serialize};

use crate::lang::Language;
use crate::llm::BackendError;

pub use load::{
    load_compass_split, load_coxql_split, load_dataset, save_records, split_file_name, FieldRemap,
    Split, ValidationReport, Violation,
};
pub use mix::{build_multilingual_mix, MixSpec, MIX_ALGORITHM, MIX_PROPORTIONS};
pub use stats::{dataset_stats, DatasetStats, SplitStats};
pub use translate::{
    compass_translation_prompt, coxql_translation_prompt, decode_compass_translation,
    translate_compass, translate_coxql, TranslationOutcome, TRANSLATION_RETRY_CAP,
};

/// One row of a parsing dataset: a natural-language question and the label it
/// should parse into. The JSON wire keys are `question`, `parse`, `language`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoxqlRecord {
    /// The user question, verbatim.
    pub question: String,
    /// Gold label in the query language.
    pub parse: String,
    /// Language the question is written in.
    pub language: Language,
}

impl CoxqlRecord {
    pub fn new(
        question: impl Into<String>,
        parse: impl Into<String>,
        language: Language,
    ) -> Self {
        Self { question: question.into(), parse: parse.into(), language }
    }
}

/// Which record shape a dataset uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    /// Parsing records: question plus gold label.
    Coxql,
    /// Extraction records: question, operation name, custom input.
    Compass,
}

impl DatasetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetKind::Coxql => "coxql",
            DatasetKind::Compass => "compass",
        }
    }
}

impl std::fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A named dataset split into train and test portions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetBundle<R> {
    /// Dataset name; doubles as the file-name prefix.
    pub name: String,
    pub train: Vec<R>,
    pub test: Vec<R>,
}

impl<R> DatasetBundle<R> {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), train: Vec::new(), test: Vec::new() }
    }

    /// Records of one split.
    pub fn split(&self, split: Split) -> &[R] {
        match split {
            Split::Train => &self.train,
            Split::Test => &self.test,
        }
    }

    pub fn split_mut(&mut self, split: Split) -> &mut Vec<R> {
        match split {
            Split::Train => &mut self.train,
            Split::Test => &mut self.test,
        }
    }
}

/// A loaded dataset of either record shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Dataset {
    Coxql(DatasetBundle<CoxqlRecord>),
    Compass(DatasetBundle<crate::extract::CompassRecord>),
}

impl Dataset {
    pub fn kind(&self) -> DatasetKind {
        match self {
            Dataset::Coxql(_) => DatasetKind::Coxql,
            Dataset::Compass(_) => DatasetKind::Compass,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Dataset::Coxql(b) => &b.name,
            Dataset::Compass(b) => &b.name,
        }
    }

    /// Number of records in one split.
    pub fn split_len(&self, split: Split) -> usize {
        match self {
            Dataset::Coxql(b) => b.split(split).len(),
            Dataset::Compass(b) => b.split(split).len(),
        }
    }
}

/// Errors from loading, mixing, or translating datasets.
#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not a JSON array of records: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    /// One or more records failed validation; the report lists every
    /// violation with its file and record index.
    #[error("{0}")]
    Validation(ValidationReport),
    #[error("no files named {dataset}.{{train|test}}.{{lang}}.json under {dir}")]
    NoFiles { dir: String, dataset: String },
    #[error("mix proportion must be one of {MIX_PROPORTIONS:?}, got {0}")]
    BadProportion(u8),
    #[error(transparent)]
    Backend(#[from] BackendError),
    /// Translation kept violating the containment requirement after the retry
    /// cap; `last_response` is the final model output so the record can be
    /// flagged for manual repair instead of silently dropped.
    #[error("translation failed after {attempts} attempts; last response: {last_response:?}")]
    TranslationFailed { attempts: usize, last_response: String },
}
