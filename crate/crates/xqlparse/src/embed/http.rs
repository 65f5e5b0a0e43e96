//! HTTP embedder for embeddings APIs.
//!
//! Speaks `POST {base}/v1/embeddings` and L2-normalises whatever comes back,
//! since the provider contract is unit vectors. Same retry policy as the
//! completion backend: transport and server errors back off and retry,
//! client errors fail fast.

use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{EmbedError, EmbeddingProvider};

/// Environment variable consulted for the bearer token.
pub const EMBED_KEY_ENV: &str = "XQL_EMBED_KEY";

const ATTEMPTS: u32 = 3;
const BACKOFF_BASE: Duration = Duration::from_millis(200);

pub struct HttpEmbedder {
    client: reqwest::blocking::Client,
    base_url: String,
    model: String,
    name: String,
    api_key: Option<String>,
}

impl HttpEmbedder {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> HttpEmbedder {
        let model = model.into();
        HttpEmbedder {
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(60))
                .build()
                .expect("default TLS stack is available"),
            base_url: base_url.into().trim_end_matches('/').to_string(),
            name: format!("http:{model}"),
            model,
            api_key: std::env::var(EMBED_KEY_ENV).ok(),
        }
    }

    fn post_once(&self, text: &str) -> Result<Vec<f32>, EmbedError> {
        #[derive(Deserialize)]
        struct Datum {
            embedding: Vec<f32>,
        }
        #[derive(Deserialize)]
        struct Body {
            data: Vec<Datum>,
        }

        let mut request = self
            .client
            .post(format!("{}/v1/embeddings", self.base_url))
            .json(&json!({ "model": self.model, "input": [text] }));
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| EmbedError::Transport(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            let body = response.text().unwrap_or_default();
            return Err(EmbedError::Api { status: status.as_u16(), body });
        }
        let body: Body = response.json().map_err(|e| EmbedError::BadResponse(e.to_string()))?;
        let mut vector = body
            .data
            .into_iter()
            .next()
            .ok_or_else(|| EmbedError::BadResponse("empty data".to_string()))?
            .embedding;
        let norm: f32 = vector.iter().map(|x| x * x).sum::<f32>().sqrt();
        if norm > 0.0 {
            for x in &mut vector {
                *x /= norm;
            }
        }
        Ok(vector)
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn name(&self) -> &str {
        &self.name
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>, EmbedError> {
        let mut last_err = None;
        for attempt in 0..ATTEMPTS {
            if attempt > 0 {
                std::thread::sleep(BACKOFF_BASE * 2u32.pow(attempt - 1));
            }
            match self.post_once(text) {
                Ok(v) => return Ok(v),
                Err(err @ (EmbedError::Transport(_) | EmbedError::Api { status: 500.., .. })) => {
                    last_err = Some(err);
                }
                Err(err) => return Err(err),
            }
        }
        Err(last_err.expect("loop ran at least once"))
    }
}
