//! Offline deterministic embedding provider for tests and desk-scale runs.
//!
//! Every lowercase word maps to a pseudo-random unit vector seeded by
//! `hash64(seed, model_id, word)`; a text embeds as the L2-normalized mean
//! of its word vectors. Lexical overlap between two texts then monotonically
//! drives their cosine similarity. Words sharing a synonym group share one
//! canonical vector, so synonym swaps read as "no semantic change".

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::embedding::cache::{content_digest, EmbeddingCache};
use crate::embedding::{Embedder, EmbedderConfig};
use crate::error::{Error, Result};
use crate::lexicon::SynonymTable;
use crate::segmentation::tokenize_words;
use crate::Vector;

/// FNV-1a over length-delimited parts with a splitmix64 finalizer; stable
/// across platforms and runs.
pub(crate) fn hash64(parts: &[&[u8]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for &b in part.iter() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(h)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub struct DeterministicEmbedder {
    config: EmbedderConfig,
    synonyms: Option<Arc<SynonymTable>>,
    word_vectors: RwLock<HashMap<String, Arc<Vec<f64>>>>,
    cache: Option<EmbeddingCache>,
}

impl DeterministicEmbedder {
    pub fn new(config: EmbedderConfig) -> Result<Self> {
        config.validate()?;
        let cache = match &config.cache_path {
            Some(path) => Some(EmbeddingCache::open(path)?),
            None => None,
        };
        let synonyms = if config.use_synonyms {
            Some(Arc::new(SynonymTable::builtin().clone()))
        } else {
            None
        };
        Ok(DeterministicEmbedder {
            config,
            synonyms,
            word_vectors: RwLock::new(HashMap::new()),
            cache,
        })
    }

    /// Replaces the synonym table (pass `None` to disable soft matching).
    pub fn with_synonyms(mut self, synonyms: Option<SynonymTable>) -> Self {
        self.synonyms = synonyms.map(Arc::new);
        self
    }

    fn word_vector(&self, word: &str) -> Arc<Vec<f64>> {
        let canonical = match &self.synonyms {
            Some(table) => table.canonical(word).to_string(),
            None => word.to_string(),
        };
        if let Some(v) = self.word_vectors.read().expect("lock poisoned").get(&canonical) {
            return Arc::clone(v);
        }
        let seed = hash64(&[
            &self.config.seed.to_le_bytes(),
            self.config.model_id.as_bytes(),
            canonical.as_bytes(),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut components: Vec<f64> = (0..self.config.dim)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        for c in &mut components {
            *c /= norm;
        }
        let arc = Arc::new(components);
        self.word_vectors
            .write()
            .expect("lock poisoned")
            .entry(canonical)
            .or_insert_with(|| Arc::clone(&arc));
        arc
    }

    fn compute(&self, text: &str) -> Result<Vector> {
        let mut words = tokenize_words(text);
        if words.is_empty() {
            // Punctuation-only input still deserves a stable vector: treat
            // the whole trimmed text as one pseudo-word.
            words.push(text.trim().to_lowercase());
        }
        let mut mean = vec![0.0f64; self.config.dim];
        for word in &words {
            let wv = self.word_vector(word);
            for (m, &c) in mean.iter_mut().zip(wv.iter()) {
                *m += c;
            }
        }
        let inv = 1.0 / words.len() as f64;
        for m in &mut mean {
            *m *= inv;
        }
        let vector = Vector::new(mean)?.normalized()?;
        // Quantize through f32 so the value returned now is bit-identical to
        // what any future cache hit will return.
        Ok(vector.quantized_f32())
    }

    fn embed_one(&self, text: &str) -> Result<Vector> {
        if text.trim().is_empty() {
            return Err(Error::invalid("cannot embed empty text"));
        }
        if let Some(cache) = &self.cache {
            let digest = content_digest(text);
            match cache.get(&self.config.model_id, &digest) {
                Ok(Some(v)) if v.dim() == self.config.dim => return Ok(v),
                // Wrong-dimension or corrupt records are recomputed below.
                Ok(Some(_)) | Ok(None) | Err(Error::CacheCorrupt(_)) => {}
                Err(other) => return Err(other),
            }
            let vector = self.compute(text)?;
            cache.put(&self.config.model_id, &digest, &vector)?;
            Ok(vector)
        } else {
            self.compute(text)
        }
    }
}

impl Embedder for DeterministicEmbedder {
    fn model_id(&self) -> &str {
        &self.config.model_id
    }

    fn dim(&self) -> usize {
        self.config.dim
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vector>> {
        texts.iter().map(|t| self.embed_one(t)).collect()
    }
}
