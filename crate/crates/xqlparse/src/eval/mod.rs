//! Evaluation harness: run configuration, grid reports, and the three
//! evaluators (parsing, intent classification, span extraction).
//!
//! A run is described by a [`RunConfig`] — task, dataset, languages, methods,
//! backend/provider endpoints, seeds — and produces an [`EvalReport`]: a grid
//! of (language, method, model) cells, each carrying its micro-F1 together
//! with full provenance (instance counts, failure counts), plus metadata
//! recording the config snapshot, backend identifiers, and prompt template
//! fingerprints. Reports render as JSON (source of truth), CSV (flat cell
//! dump), or Markdown (languages as columns, methods as rows).

mod report;
mod run;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusError, FieldRemap};
use crate::embed::{EmbedError, EmbeddingProvider, HttpEmbedder, MockEmbedder};
use crate::extract::{Approach, ExtractError};
use crate::lang::Language;
use crate::llm::{Backend, BackendError, HttpBackend, ScriptedBackend};
use crate::strategies::{StrategyError, StrategyKind};

pub use report::{
    emit_report, micro_f1, micro_f1_labels, CellResult, EvalReport, GridCell, ReportFormat,
    RunMetadata, TemplateVersion,
};
pub use run::{
    persist_run, run_extraction_eval, run_intent_eval, run_parse_eval, CellTraces, EvalRun,
};

/// What a run evaluates or produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    ParseEval,
    IntentEval,
    ExtractionEval,
    SimilarityReport,
    Translate,
    Stats,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::ParseEval => "parse_eval",
            Task::IntentEval => "intent_eval",
            Task::ExtractionEval => "extraction_eval",
            Task::SimilarityReport => "similarity_report",
            Task::Translate => "translate",
            Task::Stats => "stats",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    /// Accepts both the full task names and the CLI short forms
    /// (`parse`, `intent`, `extraction`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "parse" | "parse_eval" => Ok(Task::ParseEval),
            "intent" | "intent_eval" => Ok(Task::IntentEval),
            "extraction" | "extraction_eval" => Ok(Task::ExtractionEval),
            "similarity" | "similarity_report" => Ok(Task::SimilarityReport),
            "translate" => Ok(Task::Translate),
            "stats" => Ok(Task::Stats),
            other => Err(format!("unknown task {other:?}")),
        }
    }
}

/// Which completion backend a run talks to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BackendSpec {
    /// Offline fixture map loaded from a JSON file (`--backend scripted:<path>`).
    Scripted { fixtures: PathBuf },
    /// OpenAI-compatible HTTP endpoint (`--backend-url <url>`).
    Http { url: String, model: String },
}

impl BackendSpec {
    /// Parses the CLI form: `scripted:<fixtures.json>` or a bare URL.
    pub fn parse_cli(value: &str, model: &str) -> BackendSpec {
        match value.strip_prefix("scripted:") {
            Some(path) => BackendSpec::Scripted { fixtures: PathBuf::from(path) },
            None => BackendSpec::Http { url: value.to_string(), model: model.to_string() },
        }
    }
}

/// Which embedding provider a run uses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum EmbedSpec {
    /// Deterministic hashing embedder (`--embed mock`).
    Mock,
    /// OpenAI-compatible embeddings endpoint (`--embed-url <url>`).
    Http { url: String, model: String },
}

/// Loads a scripted backend from a JSON object mapping prompts to responses.
pub fn load_scripted_backend(path: &Path) -> Result<ScriptedBackend, EvalError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| EvalError::Io { path: path.display().to_string(), source })?;
    let fixtures: BTreeMap<String, String> = serde_json::from_str(&text)?;
    let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scripted");
    let mut backend = ScriptedBackend::new(format!("scripted:{id}"));
    for (prompt, response) in fixtures {
        backend.insert(&prompt, response);
    }
    Ok(backend)
}

/// Instantiates the backend a spec describes.
pub fn build_backend(spec: &BackendSpec) -> Result<Box<dyn Backend>, EvalError> {
    Ok(match spec {
        BackendSpec::Scripted { fixtures } => Box::new(load_scripted_backend(fixtures)?),
        BackendSpec::Http { url, model } => Box::new(HttpBackend::new(url.clone(), model.clone())),
    })
}

/// Instantiates the embedding provider a spec describes.
pub fn build_provider(spec: &EmbedSpec) -> Box<dyn EmbeddingProvider> {
    match spec {
        EmbedSpec::Mock => Box::new(MockEmbedder::new()),
        EmbedSpec::Http { url, model } => {
            Box::new(HttpEmbedder::new(url.clone(), model.clone()))
        }
    }
}

fn default_model() -> String {
    "default".to_string()
}

fn default_parallelism() -> usize {
    4
}

fn default_shots() -> usize {
    20
}

fn default_k() -> usize {
    3
}

/// Everything one evaluation run needs, serializable so the exact
/// configuration can be snapshotted into the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub task: Task,
    /// Directory holding `{dataset}.{split}.{lang}.json` files.
    pub dataset_dir: PathBuf,
    /// Dataset name — the file-name prefix.
    pub dataset: String,
    pub languages: Vec<Language>,
    /// Parsing strategies to evaluate (parse task only).
    #[serde(default)]
    pub strategies: Vec<StrategyKind>,
    /// Extraction approaches to evaluate (extraction task only).
    #[serde(default)]
    pub approaches: Vec<Approach>,
    pub backend: BackendSpec,
    pub embed: EmbedSpec,
    /// Model label used in grid keys and report columns.
    #[serde(default = "default_model")]
    pub model: String,
    /// Demonstrations per prompt.
    #[serde(default = "default_shots")]
    pub shots: usize,
    /// Candidate-retrieval width for the guided multi-prompt strategy.
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    /// Concurrent per-question requests within one grid cell.
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Root directory for run artifacts; `None` skips persistence.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Optional source-key → canonical-key renames for foreign dataset files.
    #[serde(default)]
    pub remap: Option<FieldRemap>,
}

impl RunConfig {
    /// Checks the requested methods make sense for the task.
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.languages.is_empty() {
            return Err(EvalError::Config("at least one language is required".into()));
        }
        match self.task {
            Task::ParseEval if self.strategies.is_empty() => {
                Err(EvalError::Config("parse evaluation needs --strategies".into()))
            }
            Task::ExtractionEval if self.approaches.is_empty() => {
                Err(EvalError::Config("extraction evaluation needs --approaches".into()))
            }
            _ => Ok(()),
        }
    }

    /// Loads a config file, interpolating `${VAR}` references from the
    /// environment first so secrets stay out of version control.
    pub fn from_json_file(path: &Path) -> Result<RunConfig, EvalError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| EvalError::Io { path: path.display().to_string(), source })?;
        let interpolated = interpolate_env(&text)?;
        let config: RunConfig = serde_json::from_str(&interpolated)?;
        config.validate()?;
        Ok(config)
    }
}

/// Replaces every `${NAME}` with the value of the environment variable
/// `NAME`; an unset variable is an error rather than an empty string.
pub fn interpolate_env(text: &str) -> Result<String, EvalError> {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("${") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let Some(end) = after.find('}') else {
            return Err(EvalError::Config(format!(
                "unterminated ${{...}} reference near {:?}",
                &rest[start..rest.len().min(start + 24)]
            )));
        };
        let name = &after[..end];
        let value =
            std::env::var(name).map_err(|_| EvalError::MissingEnv(name.to_string()))?;
        out.push_str(&value);
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Errors from configuring or executing an evaluation run.
#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("environment variable {0} referenced by the config is not set")]
    MissingEnv(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}
