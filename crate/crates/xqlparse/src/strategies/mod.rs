//! The five explanation-request parsing strategies.
//!
//! Each strategy maps a natural-language question to a canonical label plus a
//! [`ParsingTrace`] recording every stage: the prompt sent, the raw text that
//! came back, and the value derived from it.
//!
//! * [`parse_nn`] — nearest neighbour: copy the gold parse of the most
//!   similar training question. No generation at all.
//! * [`parse_gd`] — guided decoding: one generation under the full grammar,
//!   prompted with similarity-selected demonstrations.
//! * [`parse_mp`] — multi-prompt: pick a main operation from a simplified
//!   listing, then fill its attributes; both generations unconstrained, so
//!   the output can and does drift off-template.
//! * [`parse_mp_plus`] — multi-prompt plus template checking, which repairs
//!   recoverable drift instead of failing on it.
//! * [`parse_gmp`] — guided multi-prompt: centroid retrieval narrows the
//!   intent set, a generation constrained to exactly those candidates picks
//!   the intent, and a second generation under that intent's own grammar
//!   fills the attributes.
//!
//! Wrong parses are results, not errors: they come back as traces with
//! `failure` set, so evaluation counts them as wrong answers. `Err` is
//! reserved for broken plumbing — unreachable backends, missing fixtures,
//! corrupt training labels.

mod context;
mod gd;
mod gmp;
mod mp;
mod nn;
pub mod prompts;
#[cfg(test)]
pub(crate) mod testutil;

pub use context::{IntentCentroid, StrategyConfig, StrategyContext, TrainExample};
pub use gd::{gd_stage, parse_gd};
pub use gmp::{gmp_coarse_stage, gmp_fill_prompt, parse_gmp, CoarseStage, GMP_STAGES};
pub use mp::{mp_attribute_stage, mp_operation_stage, parse_mp, parse_mp_plus};
pub use nn::parse_nn;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::EmbedError;
use crate::llm::BackendError;
use crate::query::{ParseError, SerializeError};

/// Which of the five strategies produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Nn,
    Gd,
    Mp,
    MpPlus,
    Gmp,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Nn,
        StrategyKind::Gd,
        StrategyKind::Mp,
        StrategyKind::MpPlus,
        StrategyKind::Gmp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Nn => "nn",
            StrategyKind::Gd => "gd",
            StrategyKind::Mp => "mp",
            StrategyKind::MpPlus => "mp_plus",
            StrategyKind::Gmp => "gmp",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raised by [`StrategyKind::from_str`] for names outside the five.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown strategy {0:?} (expected nn, gd, mp, mp_plus or gmp)")]
pub struct UnknownStrategy(pub String);

impl FromStr for StrategyKind {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<StrategyKind, UnknownStrategy> {
        match s.to_ascii_lowercase().as_str() {
            "nn" => Ok(StrategyKind::Nn),
            "gd" => Ok(StrategyKind::Gd),
            "mp" => Ok(StrategyKind::Mp),
            "mp_plus" | "mp+" => Ok(StrategyKind::MpPlus),
            "gmp" => Ok(StrategyKind::Gmp),
            other => Err(UnknownStrategy(other.to_string())),
        }
    }
}

/// One step of a strategy run: what was asked, what came back, and what the
/// strategy made of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    /// Prompt sent to the backend; `None` for stages that never call it.
    pub prompt: Option<String>,
    /// Re-prompts sent by text-only repair rounds after the first, verbatim.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_prompts: Vec<String>,
    /// Raw backend output; `None` for stages that never call it.
    pub raw_output: Option<String>,
    /// What the stage concluded, human-readable.
    pub derived: String,
}

/// Full record of one strategy run on one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsingTrace {
    pub strategy: StrategyKind,
    pub stages: Vec<StageRecord>,
    /// Canonical label; present iff the run produced a registry-valid parse.
    pub final_parse: Option<String>,
    /// Diagnostic for failed runs; mutually exclusive with `final_parse`.
    pub failure: Option<String>,
}

impl ParsingTrace {
    fn new(strategy: StrategyKind) -> ParsingTrace {
        ParsingTrace { strategy, stages: Vec::new(), final_parse: None, failure: None }
    }

    fn stage(
        &mut self,
        name: &str,
        prompt: Option<String>,
        raw_output: Option<String>,
        derived: impl Into<String>,
    ) {
        self.stages.push(StageRecord {
            name: name.to_string(),
            prompt,
            extra_prompts: Vec::new(),
            raw_output,
            derived: derived.into(),
        });
    }

    fn succeed(mut self, canonical: String) -> ParsingTrace {
        self.final_parse = Some(canonical);
        self
    }

    fn fail(mut self, diagnostic: impl Into<String>) -> ParsingTrace {
        self.failure = Some(diagnostic.into());
        self
    }

    pub fn succeeded(&self) -> bool {
        self.final_parse.is_some()
    }
}

/// Demonstrations drawn from the training split for one prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemonstrationSet {
    /// `(question, canonical gold label)`, most similar first.
    pub entries: Vec<(String, String)>,
    /// Training-split index of each entry.
    pub source_indices: Vec<usize>,
}

/// Infrastructure failures. Wrong parses are not errors — see
/// [`ParsingTrace::failure`].
#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("training split is empty")]
    EmptyPool,
    #[error("training example {index} has a bad gold label: {source}")]
    BadTrainLabel { index: usize, source: ParseError },
    #[error("operation {0:?} is not in the registry")]
    UnknownOperation(String),
    #[error("candidate retrieval returned no intents (k must be at least 1)")]
    NoCandidates,
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("gold label failed to canonicalize: {0}")]
    Canonical(#[from] SerializeError),
}

/// Runs one strategy by kind — the dynamic entry point the evaluation
/// harness dispatches through.
pub fn run_strategy(
    kind: StrategyKind,
    ctx: &StrategyContext<'_>,
    question: &str,
) -> Result<ParsingTrace, StrategyError> {
    match kind {
        StrategyKind::Nn => parse_nn(ctx, question),
        StrategyKind::Gd => parse_gd(ctx, question),
        StrategyKind::Mp => parse_mp(ctx, question),
        StrategyKind::MpPlus => parse_mp_plus(ctx, question),
        StrategyKind::Gmp => parse_gmp(ctx, question),
    }
}
