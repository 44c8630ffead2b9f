//! Remote HTTP embedding provider speaking the de-facto embeddings-API
//! shape: `POST endpoint {"model", "input": [..]}` answered by
//! `{"data": [{"index", "embedding"}, ..]}` re-ordered by index.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::embedding::cache::{content_digest, EmbeddingCache};
use crate::embedding::{Embedder, EmbedderConfig};
use crate::error::{Error, Result};
use crate::Vector;

/// Environment variable holding the bearer token for the remote provider.
pub const API_KEY_ENV: &str = "EDITLENS_EMBED_API_KEY";

const MAX_RETRIES: usize = 3;
const INITIAL_BACKOFF: Duration = Duration::from_millis(250);

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    input: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    data: Vec<EmbedDatum>,
}

#[derive(Deserialize)]
struct EmbedDatum {
    index: usize,
    embedding: Vec<f64>,
}

pub struct RemoteEmbedder {
    config: EmbedderConfig,
    endpoint: String,
    client: reqwest::blocking::Client,
    api_key: Option<String>,
    cache: Option<EmbeddingCache>,
}

impl RemoteEmbedder {
    pub fn new(config: EmbedderConfig) -> Result<Self> {
        config.validate()?;
        let endpoint = config
            .endpoint_url
            .clone()
            .ok_or_else(|| Error::invalid("remote provider requires endpoint_url"))?;
        let cache = match &config.cache_path {
            Some(path) => Some(EmbeddingCache::open(path)?),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| Error::ProviderUnavailable(format!("http client: {e}")))?;
        Ok(RemoteEmbedder {
            config,
            endpoint,
            client,
            api_key: std::env::var(API_KEY_ENV).ok(),
            cache,
        })
    }

    /// Sends one chunk, retrying transport failures and 5xx responses with
    /// exponential backoff (250 ms, 500 ms, 1 s). Client errors (4xx) fail
    /// immediately: retrying a rejected request will not help.
    fn post_chunk(&self, texts: &[&str]) -> Result<Vec<Vector>> {
        let mut backoff = INITIAL_BACKOFF;
        let mut last_err = String::new();
        for attempt in 0..=MAX_RETRIES {
            if attempt > 0 {
                std::thread::sleep(backoff);
                backoff *= 2;
            }
            let mut request = self.client.post(&self.endpoint).json(&EmbedRequest {
                model: &self.config.model_id,
                input: texts,
            });
            if let Some(key) = &self.api_key {
                request = request.bearer_auth(key);
            }
            match request.send() {
                Ok(response) => {
                    let status = response.status();
                    if status.is_success() {
                        let body: EmbedResponse = response.json().map_err(|e| {
                            Error::ProviderContractViolation(format!("unparseable response: {e}"))
                        })?;
                        return self.reorder(body, texts.len());
                    }
                    if status.is_client_error() {
                        return Err(Error::ProviderUnavailable(format!(
                            "server rejected request: HTTP {status}"
                        )));
                    }
                    last_err = format!("HTTP {status}");
                }
                Err(e) => last_err = e.to_string(),
            }
        }
        Err(Error::ProviderUnavailable(format!(
            "{} after {} retries: {last_err}",
            self.endpoint, MAX_RETRIES
        )))
    }

    fn reorder(&self, body: EmbedResponse, expected: usize) -> Result<Vec<Vector>> {
        if body.data.len() != expected {
            return Err(Error::ProviderContractViolation(format!(
                "expected {expected} embeddings, got {}",
                body.data.len()
            )));
        }
        let mut slots: Vec<Option<Vector>> = (0..expected).map(|_| None).collect();
        for datum in body.data {
            if datum.index >= expected {
                return Err(Error::ProviderContractViolation(format!(
                    "embedding index {} out of range", datum.index
                )));
            }
            if datum.embedding.len() != self.config.dim {
                return Err(Error::ProviderContractViolation(format!(
                    "expected dim {}, got {}",
                    self.config.dim,
                    datum.embedding.len()
                )));
            }
            if slots[datum.index].is_some() {
                return Err(Error::ProviderContractViolation(format!(
                    "duplicate embedding index {}", datum.index
                )));
            }
            let vector = Vector::new(datum.embedding)
                .map_err(|e| Error::ProviderContractViolation(e.to_string()))?;
            slots[datum.index] = Some(vector.quantized_f32());
        }
        Ok(slots.into_iter().map(|s| s.expect("all slots filled")).collect())
    }
}

impl Embedder for RemoteEmbedder {
    fn model_id(&self) -> &str {
        &self.config.model_id
    }

    fn dim(&self) -> usize {
        self.config.dim
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vector>> {
        for text in texts {
            if text.trim().is_empty() {
                return Err(Error::invalid("cannot embed empty text"));
            }
        }
        let mut out: Vec<Option<Vector>> = (0..texts.len()).map(|_| None).collect();
        let mut misses: Vec<usize> = Vec::new();
        if let Some(cache) = &self.cache {
            for (i, text) in texts.iter().enumerate() {
                let digest = content_digest(text);
                match cache.get(&self.config.model_id, &digest) {
                    Ok(Some(v)) if v.dim() == self.config.dim => out[i] = Some(v),
                    Ok(Some(_)) | Ok(None) | Err(Error::CacheCorrupt(_)) => misses.push(i),
                    Err(other) => return Err(other),
                }
            }
        } else {
            misses = (0..texts.len()).collect();
        }

        for chunk in misses.chunks(self.config.batch_size.max(1)) {
            let chunk_texts: Vec<&str> = chunk.iter().map(|&i| texts[i]).collect();
            let vectors = self.post_chunk(&chunk_texts)?;
            for (&i, vector) in chunk.iter().zip(vectors) {
                if let Some(cache) = &self.cache {
                    cache.put(&self.config.model_id, &content_digest(texts[i]), &vector)?;
                }
                out[i] = Some(vector);
            }
        }
        Ok(out.into_iter().map(|v| v.expect("all slots filled")).collect())
    }
}
