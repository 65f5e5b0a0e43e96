//! Model access: tokenizer, backends, and constrained generation.
//!
//! * [`Tokenizer`] — deterministic registry-derived vocabulary with greedy
//!   encoding; realistic enough (multi-char pieces, leading-space variants,
//!   end-of-sequence) to exercise mask-based decoding honestly.
//! * [`Backend`] — the completion interface; [`ScriptedBackend`] replays
//!   recorded fixtures keyed by prompt fingerprint, [`HttpBackend`] speaks a
//!   completions API with retry/backoff.
//! * [`constrained_generate`] — grammar-constrained decoding over either a
//!   token-level backend (exact masks) or a text-only backend (rejection and
//!   bounded repair).

mod backend;
mod constrained;
mod http;
mod tokenizer;

pub use backend::{fingerprint, Backend, BackendError, Completion, FinishReason, Fixture, ScriptedBackend};
pub use constrained::{constrained_generate, ConstrainedOutput, GenerationLimits};
pub use http::{HttpBackend, API_KEY_ENV};
pub use tokenizer::{EncodeError, Tokenizer, EOS_TEXT};
