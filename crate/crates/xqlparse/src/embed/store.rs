//! Embedding memoisation.
//!
//! Embedding the same text twice is pure waste (and against a paid API,
//! pure cost). [`EmbedStore`] memoises per provider in memory and can
//! persist to a JSON-lines cache file that survives runs: one line per
//! vector, keyed by provider name and text fingerprint, appended as misses
//! are filled. Corrupt cache lines fail loudly rather than silently serving
//! wrong vectors.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::llm::fingerprint;

use super::{EmbedError, EmbeddingProvider};

#[derive(Debug, Serialize, Deserialize)]
struct CacheLine {
    provider: String,
    text_hash: String,
    vector: Vec<f32>,
}

/// A provider plus memoisation. Thread-safe: retrieval code fans embedding
/// work across worker threads.
pub struct EmbedStore<'p> {
    provider: &'p dyn EmbeddingProvider,
    memory: Mutex<HashMap<String, Vec<f32>>>,
    disk: Option<Mutex<File>>,
}

impl<'p> EmbedStore<'p> {
    /// Memory-only memoisation.
    pub fn new(provider: &'p dyn EmbeddingProvider) -> EmbedStore<'p> {
        EmbedStore { provider, memory: Mutex::new(HashMap::new()), disk: None }
    }

    /// Memoisation backed by a JSON-lines file. Existing lines for this
    /// provider are loaded eagerly; misses are appended as they are filled.
    pub fn with_disk_cache(
        provider: &'p dyn EmbeddingProvider,
        path: impl AsRef<Path>,
    ) -> Result<EmbedStore<'p>, EmbedError> {
        let path = path.as_ref();
        let mut memory = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for (idx, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let parsed: CacheLine =
                    serde_json::from_str(&line).map_err(|e| EmbedError::CacheFormat {
                        line: idx + 1,
                        reason: e.to_string(),
                    })?;
                if parsed.provider == provider.name() {
                    memory.insert(parsed.text_hash, parsed.vector);
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(EmbedStore {
            provider,
            memory: Mutex::new(memory),
            disk: Some(Mutex::new(file)),
        })
    }

    pub fn provider_name(&self) -> &str {
        self.provider.name()
    }

    /// Embed one text, consulting the caches first.
    pub fn embed(&self, text: &str) -> Result<Vec<f32>, EmbedError> {
        let key = fingerprint(text);
        if let Some(hit) = self.memory.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let vector = self.provider.embed(text)?;
        if let Some(disk) = &self.disk {
            let line = CacheLine {
                provider: self.provider.name().to_string(),
                text_hash: key.clone(),
                vector: vector.clone(),
            };
            let mut file = disk.lock().expect("cache file lock");
            serde_json::to_writer(&mut *file, &line)
                .map_err(|e| EmbedError::BadResponse(e.to_string()))?;
            file.write_all(b"\n")?;
        }
        self.memory.lock().expect("cache lock").insert(key, vector.clone());
        Ok(vector)
    }

    /// Embed many texts, preserving order.
    pub fn embed_all<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<Vec<f32>>, EmbedError> {
        texts.iter().map(|t| self.embed(t.as_ref())).collect()
    }
}
