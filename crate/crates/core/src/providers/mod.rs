//! Generative-model and embedding providers.
//!
//! - `http` - remote chat-completion provider with retry and an in-flight cap
//! - `scripted` - canned responses keyed on prompt substrings
//! - `rule_fusion` - a rule-based analytics-question editor that acts as a
//!   deterministic stand-in for a fusing LLM
//! - `hash_embed` - bag-of-tokens feature hashing embedder
//!
//! Every provider is `Send + Sync` and may be called from many threads.

pub mod hash_embed;
pub mod http;
pub mod rule_fusion;
pub mod scripted;

pub use hash_embed::HashEmbedder;
pub use http::{HttpProvider, HttpProviderConfig};
pub use rule_fusion::{rule_fuse, Lexicon, RuleFusionMock};
pub use scripted::{PromptMatcher, ScriptEntry, ScriptedMock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::prompt::parse_transcript;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited after {attempts} attempt(s)")]
    RateLimited { attempts: u32 },
    #[error("malformed response: {detail}")]
    Malformed { detail: String, raw_body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("http status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("no script entry matched the prompt")]
    NoScriptMatch,
    #[error("provider configuration error: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderDescriptor {
    pub provider_id: String,
    pub model_name: String,
    pub deterministic: bool,
}

/// A text-in, text-out model.
pub trait GenerativeModelProvider: Send + Sync {
    fn generate(&self, prompt: &str) -> Result<String, ProviderError>;

    fn descriptor(&self) -> ProviderDescriptor;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingDescriptor {
    pub provider_id: String,
    pub dimension: usize,
}

/// A sentence embedding. `degenerate` marks the zero vector produced for
/// text without any tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub vector: Vec<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenEmbeddings {
    pub tokens: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
}

pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, text: &str) -> Result<Embedding, ProviderError>;

    fn embed_tokens(&self, text: &str) -> Result<TokenEmbeddings, ProviderError>;

    fn descriptor(&self) -> EmbeddingDescriptor;
}

/// Returns the current query of a rendered prompt unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityMock;

impl GenerativeModelProvider for IdentityMock {
    fn generate(&self, prompt: &str) -> Result<String, ProviderError> {
        parse_transcript(prompt)
            .query
            .ok_or_else(|| ProviderError::Malformed {
                detail: "prompt has no current-query line".into(),
                raw_body: prompt.to_string(),
            })
    }

    fn descriptor(&self) -> ProviderDescriptor {
        ProviderDescriptor {
            provider_id: "identity-mock".into(),
            model_name: "identity".into(),
            deterministic: true,
        }
    }
}

impl<T: GenerativeModelProvider + ?Sized> GenerativeModelProvider for std::sync::Arc<T> {
    fn generate(&self, prompt: &str) -> Result<String, ProviderError> {
        (**self).generate(prompt)
    }

    fn descriptor(&self) -> ProviderDescriptor {
        (**self).descriptor()
    }
}

impl<T: EmbeddingProvider + ?Sized> EmbeddingProvider for std::sync::Arc<T> {
    fn embed(&self, text: &str) -> Result<Embedding, ProviderError> {
        (**self).embed(text)
    }

    fn embed_tokens(&self, text: &str) -> Result<TokenEmbeddings, ProviderError> {
        (**self).embed_tokens(text)
    }

    fn descriptor(&self) -> EmbeddingDescriptor {
        (**self).descriptor()
    }
}
