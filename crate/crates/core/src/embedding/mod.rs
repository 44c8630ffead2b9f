//! Text embeddings behind a uniform provider interface.
//!
//! Two providers ship: a deterministic offline provider for tests and
//! desk-scale runs, and a remote HTTP provider. Both can persist vectors in
//! an append-only on-disk cache keyed by (model id, content digest).

mod cache;
mod deterministic;
mod remote;
mod vector;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use cache::{content_digest, EmbeddingCache};
pub use deterministic::DeterministicEmbedder;
pub(crate) use deterministic::hash64;
pub use remote::{RemoteEmbedder, API_KEY_ENV};
pub use vector::{cosine_similarity, EmbeddingVector};

use crate::error::{Error, Result};
use crate::Vector;

/// Which backend produces vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    DeterministicTest,
    Remote,
}

/// Provider configuration shared by all backends.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedderConfig {
    pub provider_kind: ProviderKind,
    pub model_id: String,
    /// Dimension the provider must return; a mismatch is an error, never a
    /// silent truncation.
    pub dim: usize,
    /// Remote provider only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_url: Option<String>,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_path: Option<PathBuf>,
    /// Deterministic provider only.
    #[serde(default)]
    pub seed: u64,
    /// Whether the deterministic provider folds synonym-group members onto
    /// one canonical vector.
    #[serde(default = "default_true")]
    pub use_synonyms: bool,
}

fn default_batch_size() -> usize {
    32
}

fn default_true() -> bool {
    true
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        EmbedderConfig {
            provider_kind: ProviderKind::DeterministicTest,
            model_id: "deterministic-test".to_string(),
            dim: 512,
            endpoint_url: None,
            batch_size: default_batch_size(),
            cache_path: None,
            seed: 0,
            use_synonyms: true,
        }
    }
}

impl EmbedderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid("embedder dim must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("embedder batch_size must be >= 1"));
        }
        if self.provider_kind == ProviderKind::Remote && self.endpoint_url.is_none() {
            return Err(Error::invalid(
                "missing config key for remote provider: endpoint_url",
            ));
        }
        Ok(())
    }
}

/// An embedding backend. Implementations are safe for concurrent use and
/// preserve input order in batch output.
pub trait Embedder: Send + Sync {
    fn model_id(&self) -> &str;
    fn dim(&self) -> usize;

    /// One vector per input text, order-preserving. Repeated calls with the
    /// same inputs return bit-identical vectors.
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vector>>;

    fn embed(&self, text: &str) -> Result<Vector> {
        Ok(self.embed_batch(&[text])?.remove(0))
    }
}

/// Builds the provider described by `config`.
pub fn build_embedder(config: &EmbedderConfig) -> Result<Box<dyn Embedder>> {
    config.validate()?;
    match config.provider_kind {
        ProviderKind::DeterministicTest => {
            Ok(Box::new(DeterministicEmbedder::new(config.clone())?))
        }
        ProviderKind::Remote => Ok(Box::new(RemoteEmbedder::new(config.clone())?)),
    }
}

/// One-shot convenience: build the provider and embed a batch.
pub fn embed_batch(texts: &[&str], config: &EmbedderConfig) -> Result<Vec<Vector>> {
    build_embedder(config)?.embed_batch(texts)
}
