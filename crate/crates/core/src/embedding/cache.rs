//! Persistent append-only embedding cache.
//!
//! One record per line: `content_digest,model_id,dim,base64` where the
//! payload is the little-endian bytes of the vector's 32-bit float
//! components. Records are immutable: putting a different vector under an
//! existing key is a conflict, never an overwrite.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use sha2::{Digest, Sha256};

use crate::embedding::vector::EmbeddingVector;
use crate::error::{Error, Result};

/// Hex SHA-256 digest of the exact text bytes; the cache key half that
/// identifies content.
pub fn content_digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

type Key = (String, String); // (content_digest, model_id)

enum Entry {
    Valid(Vec<f32>),
    /// Record present but unreadable; `get` surfaces this as `CacheCorrupt`
    /// and a subsequent `put` may replace it.
    Corrupt,
}

/// On-disk embedding cache with concurrent readers and serialized writers.
pub struct EmbeddingCache {
    path: PathBuf,
    entries: RwLock<HashMap<Key, Entry>>,
    writer: Mutex<File>,
}

impl EmbeddingCache {
    /// Opens (or creates) the cache file and loads all records.
    ///
    /// Lines whose key fields parse but whose payload does not are kept as
    /// corrupt entries so `get` can report them. A line whose key fields are
    /// themselves unreadable makes the whole file untrustworthy and fails
    /// the open.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .read(true)
            .open(&path)?;
        let mut entries: HashMap<Key, Entry> = HashMap::new();
        let reader = BufReader::new(File::open(&path)?);
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (key, entry) = parse_record(&line).ok_or_else(|| {
                Error::CacheCorrupt(format!(
                    "{}: unreadable record on line {}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            match entries.get(&key) {
                // Duplicate keys with different payloads cannot both be
                // right; poison the key so callers recompute.
                Some(Entry::Valid(existing)) => {
                    let conflicting = !matches!(&entry, Entry::Valid(v) if bits(v) == bits(existing));
                    if conflicting {
                        entries.insert(key, Entry::Corrupt);
                    }
                }
                // A valid record written after a corrupt one is the
                // recomputation; let it win.
                Some(Entry::Corrupt) | None => {
                    entries.insert(key, entry);
                }
            }
        }
        Ok(EmbeddingCache {
            path,
            entries: RwLock::new(entries),
            writer: Mutex::new(file),
        })
    }

    /// Looks up a vector. Absent keys are `Ok(None)`; a corrupt record is an
    /// error so the caller knows to recompute rather than trust the file.
    pub fn get(&self, model_id: &str, content_digest: &str) -> Result<Option<EmbeddingVector<f64>>> {
        let entries = self.entries.read().expect("cache lock poisoned");
        match entries.get(&(content_digest.to_string(), model_id.to_string())) {
            None => Ok(None),
            Some(Entry::Corrupt) => Err(Error::CacheCorrupt(format!(
                "record for model={model_id} digest={content_digest}"
            ))),
            Some(Entry::Valid(data)) => Ok(Some(EmbeddingVector::from_f32_components(data)?)),
        }
    }

    /// Stores a vector. Idempotent for identical data; a different vector
    /// under the same key is a `CacheConflict`. Replacing a corrupt record
    /// is allowed.
    pub fn put(&self, model_id: &str, content_digest: &str, vector: &EmbeddingVector<f64>) -> Result<()> {
        let data = vector.to_f32_components();
        let key = (content_digest.to_string(), model_id.to_string());
        let mut entries = self.entries.write().expect("cache lock poisoned");
        match entries.get(&key) {
            Some(Entry::Valid(existing)) => {
                if bits(existing) == bits(&data) {
                    return Ok(());
                }
                return Err(Error::CacheConflict(format!(
                    "model={model_id} digest={content_digest} already cached with different data"
                )));
            }
            Some(Entry::Corrupt) | None => {}
        }
        let record = format_record(content_digest, model_id, &data);
        {
            let mut writer = self.writer.lock().expect("cache writer poisoned");
            writer.write_all(record.as_bytes())?;
            writer.flush()?;
        }
        entries.insert(key, Entry::Valid(data));
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn bits(data: &[f32]) -> Vec<u32> {
    data.iter().map(|f| f.to_bits()).collect()
}

fn format_record(digest: &str, model_id: &str, data: &[f32]) -> String {
    let mut bytes = Vec::with_capacity(data.len() * 4);
    for f in data {
        bytes.extend_from_slice(&f.to_le_bytes());
    }
    format!("{digest},{model_id},{},{}\n", data.len(), BASE64.encode(&bytes))
}

/// Splits `digest,model_id,dim,base64`. The digest is everything before the
/// first comma; dim and payload are the last two fields, so a model id may
/// itself contain commas.
fn parse_record(line: &str) -> Option<(Key, Entry)> {
    let (digest, rest) = line.split_once(',')?;
    let (rest, payload) = rest.rsplit_once(',')?;
    let (model_id, dim_str) = rest.rsplit_once(',')?;
    if digest.is_empty() || model_id.is_empty() {
        return None;
    }
    let dim: usize = dim_str.parse().ok()?;
    let key = (digest.to_string(), model_id.to_string());
    let data = match decode_payload(payload, dim) {
        Some(data) => data,
        None => return Some((key, Entry::Corrupt)),
    };
    Some((key, Entry::Valid(data)))
}

fn decode_payload(payload: &str, dim: usize) -> Option<Vec<f32>> {
    let bytes = BASE64.decode(payload).ok()?;
    if bytes.len() != dim * 4 || dim == 0 {
        return None;
    }
    let mut data = Vec::with_capacity(dim);
    for chunk in bytes.chunks_exact(4) {
        data.push(f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]));
    }
    Some(data)
}
