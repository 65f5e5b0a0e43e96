//! HTTP backend for completion-style APIs.
//!
//! Speaks the ubiquitous `POST {base}/v1/completions` shape with greedy
//! sampling. Transport failures and server errors are retried a fixed number
//! of times with exponential backoff; client errors are not, since resending
//! the same bad request cannot help. Token-level preferences are not
//! available over this interface, so constrained decoding against an HTTP
//! backend goes through the text-only repair path.

use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::backend::{Backend, BackendError, Completion, FinishReason};

/// Environment variable consulted for the bearer token.
pub const API_KEY_ENV: &str = "XQL_API_KEY";

const ATTEMPTS: u32 = 3;
const BACKOFF_BASE: Duration = Duration::from_millis(200);

pub struct HttpBackend {
    client: reqwest::blocking::Client,
    base_url: String,
    model: String,
    api_key: Option<String>,
}

impl HttpBackend {
    /// `base_url` without a trailing slash, e.g. `http://localhost:8000`.
    /// The bearer token, if any, comes from [`API_KEY_ENV`].
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> HttpBackend {
        HttpBackend {
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(120))
                .build()
                .expect("default TLS stack is available"),
            base_url: base_url.into().trim_end_matches('/').to_string(),
            model: model.into(),
            api_key: std::env::var(API_KEY_ENV).ok(),
        }
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    fn post_once(&self, prompt: &str, max_tokens: usize) -> Result<Completion, BackendError> {
        #[derive(Deserialize)]
        struct Choice {
            text: String,
            finish_reason: Option<String>,
        }
        #[derive(Deserialize)]
        struct Body {
            choices: Vec<Choice>,
        }

        let mut request = self
            .client
            .post(format!("{}/v1/completions", self.base_url))
            .json(&json!({
                "model": self.model,
                "prompt": prompt,
                "max_tokens": max_tokens,
                "temperature": 0,
            }));
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            let body = response.text().unwrap_or_default();
            return Err(BackendError::Api { status: status.as_u16(), body });
        }
        let body: Body = response
            .json()
            .map_err(|e| BackendError::BadResponse(e.to_string()))?;
        let choice = body
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| BackendError::BadResponse("empty choices".to_string()))?;
        let finish_reason = match choice.finish_reason.as_deref() {
            Some("length") => FinishReason::Length,
            _ => FinishReason::Stop,
        };
        Ok(Completion { text: choice.text, finish_reason })
    }

    fn retriable(err: &BackendError) -> bool {
        match err {
            BackendError::Transport(_) => true,
            BackendError::Api { status, .. } => *status >= 500,
            _ => false,
        }
    }
}

impl Backend for HttpBackend {
    fn name(&self) -> &str {
        &self.model
    }

    fn complete(&self, prompt: &str, max_tokens: usize) -> Result<Completion, BackendError> {
        let mut last_err = None;
        for attempt in 0..ATTEMPTS {
            if attempt > 0 {
                std::thread::sleep(BACKOFF_BASE * 2u32.pow(attempt - 1));
            }
            match self.post_once(prompt, max_tokens) {
                Ok(done) => return Ok(done),
                Err(err) if Self::retriable(&err) => last_err = Some(err),
                Err(err) => return Err(err),
            }
        }
        Err(last_err.expect("loop ran at least once"))
    }
}
