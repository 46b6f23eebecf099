//! Content-addressed on-disk cache for model completions and embeddings.
//!
//! One JSON file per key. Writes go to a temporary file in the cache directory
//! and are renamed into place, so readers never observe a partial entry.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExtractionRequest;
use crate::error::{Error, Result};

const COMPLETION_DOMAIN: &[u8] = b"factsim/completion/v1";
const EMBEDDING_DOMAIN: &[u8] = b"factsim/embedding/v1";

fn put_field(hasher: &mut Sha256, bytes: &[u8]) {
    hasher.update((bytes.len() as u64).to_le_bytes());
    hasher.update(bytes);
}

/// SHA-256 over the length-prefixed request fields, hex encoded.
pub fn cache_key(request: &ExtractionRequest) -> String {
    let mut hasher = Sha256::new();
    put_field(&mut hasher, COMPLETION_DOMAIN);
    put_field(&mut hasher, request.model_id.as_bytes());
    put_field(&mut hasher, &request.temperature.to_bits().to_le_bytes());
    put_field(&mut hasher, request.prompt_template.as_bytes());
    put_field(&mut hasher, request.input_text.as_bytes());
    hex::encode(hasher.finalize())
}

pub fn embedding_key(encoder_id: &str, text: &str) -> String {
    let mut hasher = Sha256::new();
    put_field(&mut hasher, EMBEDDING_DOMAIN);
    put_field(&mut hasher, encoder_id.as_bytes());
    put_field(&mut hasher, text.as_bytes());
    hex::encode(hasher.finalize())
}

#[derive(Debug, Serialize, Deserialize)]
struct CompletionEntry {
    key: String,
    #[serde(flatten)]
    request: ExtractionRequest,
    completion: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct EmbeddingEntry {
    key: String,
    encoder_id: String,
    text: String,
    vector: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(DiskCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn load<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        let bytes = fs::read(self.path_for(key)).ok()?;
        match serde_json::from_slice(&bytes) {
            Ok(v) => Some(v),
            Err(e) => {
                log::warn!("ignoring unreadable cache entry {key}: {e}");
                None
            }
        }
    }

    fn store<T: Serialize>(&self, key: &str, value: &T) -> Result<()> {
        let mut tmp =
            tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        serde_json::to_writer_pretty(&mut tmp, value)?;
        tmp.write_all(b"\n").map_err(|e| Error::io(tmp.path(), e))?;
        let target = self.path_for(key);
        tmp.persist(&target)
            .map_err(|e| Error::io(&target, e.error))?;
        Ok(())
    }

    pub fn get_completion(&self, request: &ExtractionRequest) -> Option<String> {
        let key = cache_key(request);
        let entry: CompletionEntry = self.load(&key)?;
        // A stored request that differs from ours means a corrupt or foreign file.
        (entry.key == key && entry.request == *request).then_some(entry.completion)
    }

    pub fn put_completion(&self, request: &ExtractionRequest, completion: &str) -> Result<()> {
        let key = cache_key(request);
        self.store(
            &key,
            &CompletionEntry {
                key: key.clone(),
                request: request.clone(),
                completion: completion.to_string(),
            },
        )
    }

    pub fn get_embedding(&self, encoder_id: &str, text: &str) -> Option<Vec<f64>> {
        let key = embedding_key(encoder_id, text);
        let entry: EmbeddingEntry = self.load(&key)?;
        (entry.encoder_id == encoder_id && entry.text == text).then_some(entry.vector)
    }

    pub fn put_embedding(&self, encoder_id: &str, text: &str, vector: &[f64]) -> Result<()> {
        let key = embedding_key(encoder_id, text);
        self.store(
            &key,
            &EmbeddingEntry {
                key: key.clone(),
                encoder_id: encoder_id.to_string(),
                text: text.to_string(),
                vector: vector.to_vec(),
            },
        )
    }
}
