//! Explanation-request parsing and custom-input extraction for conversational
//! XAI assistants.
//!
//! Users talk to explanation systems in natural language; the system acts on
//! a small typed query language. This crate covers the full distance between
//! the two:
//!
//! * [`query`] — the query language itself: operation registries, label
//!   parsing, canonical serialization, and template repair.
//! * [`grammar`] — grammar-constrained recognition: Earley recognition at
//!   token and character granularity, vocabulary masks, sentence sampling.
//! * [`llm`] — model access: mock tokenizer, scripted and HTTP backends, and
//!   the constrained generation loop.
//! * [`embed`] — embeddings: deterministic mock provider, HTTP provider,
//!   caching, cosine retrieval, centroids.
//! * [`lang`] — the languages the multilingual corpora cover.
//!
//! Higher layers (parsing strategies, span extraction, dataset tooling, and
//! the evaluation harness) build on these.

pub mod corpus;
pub mod embed;
pub mod eval;
pub mod extract;
pub mod grammar;
pub mod lang;
pub mod llm;
pub mod query;
pub mod strategies;
