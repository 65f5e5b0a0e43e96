//! Model backends.
//!
//! A [`Backend`] is anything that completes prompts. Two capability levels
//! exist: every backend completes text, and some additionally expose a
//! per-step *preferred continuation* that a constrained decoding loop can
//! intersect with a grammar mask. Offline work uses [`ScriptedBackend`],
//! which replays recorded responses keyed by a prompt fingerprint and fails
//! loudly on any prompt it has never seen — silent divergence between test
//! fixtures and prompt builders is a bug, not something to paper over.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Why a generation finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinishReason {
    /// The backend stopped on its own.
    Stop,
    /// The step budget ran out.
    Length,
    /// The constrained loop chose end-of-sequence.
    Eos,
    /// Rejection-and-repair rounds were exhausted without a full sentence.
    ConstraintExhausted,
}

/// A text completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    pub finish_reason: FinishReason,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("no fixture for fingerprint {fingerprint} (prompt starts {prompt_head:?})")]
    MissingFixture { fingerprint: String, prompt_head: String },
    #[error("transport failure after retries: {0}")]
    Transport(String),
    #[error("API error {status}: {body}")]
    Api { status: u16, body: String },
    #[error("malformed API response: {0}")]
    BadResponse(String),
    #[error("backend `{0}` does not expose token-level preferences")]
    TokenLevelUnsupported(String),
    #[error("failed to read fixture file: {0}")]
    FixtureIo(#[from] std::io::Error),
    #[error("fixture file is not valid JSON: {0}")]
    FixtureJson(#[from] serde_json::Error),
}

/// Anything that completes prompts. `Sync` so evaluation cells can fan
/// per-question requests out across threads against one backend.
pub trait Backend: Sync {
    /// Stable identifier, recorded in run provenance.
    fn name(&self) -> &str;

    /// Complete a prompt as free text.
    fn complete(&self, prompt: &str, max_tokens: usize) -> Result<Completion, BackendError>;

    /// Whether [`preferred_continuation`](Self::preferred_continuation) works.
    fn supports_token_preferences(&self) -> bool {
        false
    }

    /// The text this backend would most like to append after `committed`
    /// (the response emitted so far). `Some("")` means it prefers to stop;
    /// `None` means it has no usable preference (the constrained loop then
    /// falls back to its own policy).
    fn preferred_continuation(
        &self,
        _prompt: &str,
        _committed: &str,
    ) -> Result<Option<String>, BackendError> {
        Err(BackendError::TokenLevelUnsupported(self.name().to_string()))
    }
}

/// 128-bit prompt fingerprint: SHA-256 truncated to 16 bytes, lowercase hex.
pub fn fingerprint(prompt: &str) -> String {
    let digest = Sha256::digest(prompt.as_bytes());
    digest[..16].iter().map(|b| format!("{b:02x}")).collect()
}

/// One recorded exchange in a fixture file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fixture {
    pub prompt: String,
    pub response: String,
}

/// Replays recorded responses. Misses are hard errors.
pub struct ScriptedBackend {
    name: String,
    by_fingerprint: HashMap<String, String>,
    token_level: bool,
}

impl ScriptedBackend {
    pub fn new(name: impl Into<String>) -> ScriptedBackend {
        ScriptedBackend { name: name.into(), by_fingerprint: HashMap::new(), token_level: true }
    }

    /// Same responses, but pretending token-level access is unavailable —
    /// for exercising the text-only repair path.
    pub fn text_only(mut self) -> ScriptedBackend {
        self.token_level = false;
        self
    }

    /// Record a response for a prompt. Later insertions overwrite earlier
    /// ones, which lets tests patch a single exchange.
    pub fn insert(&mut self, prompt: &str, response: impl Into<String>) {
        self.by_fingerprint.insert(fingerprint(prompt), response.into());
    }

    /// Load fixtures from a JSON array of `{ "prompt": …, "response": … }`.
    pub fn from_path(name: impl Into<String>, path: impl AsRef<Path>) -> Result<ScriptedBackend, BackendError> {
        let fixtures: Vec<Fixture> = serde_json::from_str(&fs::read_to_string(path)?)?;
        Ok(ScriptedBackend::from_fixtures(name, fixtures))
    }

    pub fn from_fixtures(
        name: impl Into<String>,
        fixtures: impl IntoIterator<Item = Fixture>,
    ) -> ScriptedBackend {
        let mut backend = ScriptedBackend::new(name);
        for fixture in fixtures {
            backend.insert(&fixture.prompt, fixture.response);
        }
        backend
    }

    pub fn len(&self) -> usize {
        self.by_fingerprint.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_fingerprint.is_empty()
    }

    fn lookup(&self, prompt: &str) -> Result<&str, BackendError> {
        let fp = fingerprint(prompt);
        self.by_fingerprint.get(&fp).map(String::as_str).ok_or_else(|| {
            BackendError::MissingFixture {
                fingerprint: fp,
                prompt_head: prompt.chars().take(80).collect(),
            }
        })
    }
}

impl Backend for ScriptedBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, prompt: &str, max_tokens: usize) -> Result<Completion, BackendError> {
        let text = self.lookup(prompt)?;
        // The recorded response is replayed whole; the budget only decides
        // how the finish is reported, mirroring a real API.
        let finish_reason =
            if text.len() > max_tokens * 8 { FinishReason::Length } else { FinishReason::Stop };
        Ok(Completion { text: text.to_string(), finish_reason })
    }

    fn supports_token_preferences(&self) -> bool {
        self.token_level
    }

    /// The scripted response plays the role of the model's greedy
    /// continuation: while `committed` follows the script, the preference is
    /// the rest of the script; once a mask has forced a detour, there is no
    /// preference left.
    fn preferred_continuation(
        &self,
        prompt: &str,
        committed: &str,
    ) -> Result<Option<String>, BackendError> {
        if !self.token_level {
            return Err(BackendError::TokenLevelUnsupported(self.name.clone()));
        }
        let script = self.lookup(prompt)?;
        Ok(script.strip_prefix(committed).map(str::to_string))
    }
}
