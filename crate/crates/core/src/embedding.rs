//! Tuple embeddings and the clamped cosine similarity used by the metric.

use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::extraction::{DiskCache, FactSet, FactTuple};
use crate::http::JsonClient;
use crate::pool::map_bounded;

/// Maps a batch of strings to equal-length real vectors.
///
/// Implementations must be deterministic and must never return an all-zero
/// vector.
pub trait Encoder: Send + Sync {
    fn id(&self) -> &str;
    fn encode(&self, texts: &[String]) -> Result<Vec<Vec<f64>>>;
}

impl<T: Encoder + ?Sized> Encoder for &T {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn encode(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        (**self).encode(texts)
    }
}

impl<T: Encoder + ?Sized> Encoder for Box<T> {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn encode(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        (**self).encode(texts)
    }
}

impl<T: Encoder + ?Sized> Encoder for std::sync::Arc<T> {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn encode(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        (**self).encode(texts)
    }
}

/// How a tuple becomes encoder input.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TupleRendering {
    /// `subject description`
    #[default]
    Joined,
    /// Free-form template with `{subject}` and `{description}` placeholders.
    Template(String),
}

impl TupleRendering {
    pub fn render(&self, t: &FactTuple) -> String {
        match self {
            TupleRendering::Joined => render_tuple_text(t),
            TupleRendering::Template(tpl) => tpl
                .replace("{subject}", t.subject())
                .replace("{description}", t.description()),
        }
    }
}

impl std::str::FromStr for TupleRendering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "joined" {
            Ok(TupleRendering::Joined)
        } else if s.contains("{subject}") && s.contains("{description}") {
            Ok(TupleRendering::Template(s.to_string()))
        } else {
            Err(Error::invalid(format!(
                "tuple rendering must be 'joined' or a template with {{subject}} and {{description}} (got {s:?})"
            )))
        }
    }
}

pub fn render_tuple_text(t: &FactTuple) -> String {
    format!("{} {}", t.subject(), t.description())
}

pub const TEST_ENCODER_DIM: usize = 512;
pub const TEST_ENCODER_ID: &str = "test-trigram-512";

// Sentinels pad the text so even an empty string yields trigrams.
const PAD_START: char = '\u{2}';
const PAD_END: char = '\u{3}';

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Character trigrams of `text` after padding, in order, with repeats.
pub fn padded_trigrams(text: &str) -> Vec<String> {
    let chars: Vec<char> = [PAD_START, PAD_START]
        .into_iter()
        .chain(text.chars())
        .chain([PAD_END, PAD_END])
        .collect();
    chars.windows(3).map(|w| w.iter().collect()).collect()
}

/// Hashed character-trigram counts, L2-normalized to unit length.
///
/// Deterministic on every platform. It has no notion of meaning: only
/// strings sharing character trigrams are similar.
pub fn test_encoder(text: &str) -> Vec<f64> {
    let mut v = vec![0.0; TEST_ENCODER_DIM];
    for gram in padded_trigrams(text) {
        let bucket = (fnv1a(gram.as_bytes()) % TEST_ENCODER_DIM as u64) as usize;
        v[bucket] += 1.0;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Offline encoder backed by [`test_encoder`].
#[derive(Debug, Clone, Copy, Default)]
pub struct TestEncoder;

impl Encoder for TestEncoder {
    fn id(&self) -> &str {
        TEST_ENCODER_ID
    }

    fn encode(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        Ok(texts.iter().map(|t| test_encoder(t)).collect())
    }
}

/// Client for OpenAI-compatible `POST {base}/embeddings` endpoints.
#[derive(Debug, Clone)]
pub struct RemoteEncoder {
    http: JsonClient,
    model: String,
    id: String,
}

impl RemoteEncoder {
    pub fn new(base_url: &str, api_key: Option<String>, model: &str) -> Self {
        RemoteEncoder {
            http: JsonClient::new(base_url, api_key, Duration::from_secs(60)),
            model: model.to_string(),
            id: model.to_string(),
        }
    }

    pub fn with_retry(mut self, retry: crate::http::RetryPolicy) -> Self {
        self.http = self.http.with_retry(retry);
        self
    }
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    #[serde(default)]
    index: Option<usize>,
    embedding: Vec<f64>,
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

impl Encoder for RemoteEncoder {
    fn id(&self) -> &str {
        &self.id
    }

    fn encode(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let body = json!({ "model": self.model, "input": texts });
        let resp = self.http.post("embeddings", &body)?;
        let mut parsed: EmbeddingResponse =
            serde_json::from_value(resp).map_err(|e| Error::Provider {
                message: format!("malformed embedding response: {e}"),
                retryable: false,
            })?;
        if parsed.data.len() != texts.len() {
            return Err(Error::Provider {
                message: format!(
                    "embedding endpoint returned {} vectors for {} inputs",
                    parsed.data.len(),
                    texts.len()
                ),
                retryable: false,
            });
        }
        if parsed.data.iter().all(|d| d.index.is_some()) {
            parsed.data.sort_by_key(|d| d.index);
        }
        Ok(parsed.data.into_iter().map(|d| d.embedding).collect())
    }
}

/// Serves vectors from a [`DiskCache`] and only asks the inner encoder for
/// misses. In offline mode a miss is an error.
pub struct CachedEncoder<E> {
    inner: E,
    cache: DiskCache,
    offline: bool,
}

impl<E: Encoder> CachedEncoder<E> {
    pub fn new(inner: E, cache: DiskCache, offline: bool) -> Self {
        CachedEncoder {
            inner,
            cache,
            offline,
        }
    }
}

impl<E: Encoder> Encoder for CachedEncoder<E> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn encode(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        let id = self.inner.id();
        let mut out: Vec<Option<Vec<f64>>> = texts
            .iter()
            .map(|t| self.cache.get_embedding(id, t))
            .collect();
        let missing: Vec<usize> = (0..texts.len()).filter(|&i| out[i].is_none()).collect();
        if missing.is_empty() {
            return Ok(out.into_iter().flatten().collect());
        }
        if self.offline {
            return Err(Error::CacheMiss {
                key: crate::extraction::embedding_key(id, &texts[missing[0]]),
            });
        }
        let batch: Vec<String> = missing.iter().map(|&i| texts[i].clone()).collect();
        let fresh = self.inner.encode(&batch)?;
        if fresh.len() != batch.len() {
            return Err(Error::InvalidVector(format!(
                "encoder returned {} vectors for {} inputs",
                fresh.len(),
                batch.len()
            )));
        }
        for (&i, v) in missing.iter().zip(fresh) {
            if let Err(e) = self.cache.put_embedding(id, &texts[i], &v) {
                log::warn!("could not write embedding cache entry: {e}");
            }
            out[i] = Some(v);
        }
        Ok(out.into_iter().flatten().collect())
    }
}

/// A fact set with one vector per tuple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddedFactSet {
    encoder_id: String,
    facts: FactSet,
    labels: Vec<String>,
    vectors: Vec<Vec<f64>>,
}

impl EmbeddedFactSet {
    /// Assembles and validates an embedded set from parts.
    pub fn new(
        encoder_id: impl Into<String>,
        facts: FactSet,
        labels: Vec<String>,
        vectors: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if vectors.len() != facts.len() || labels.len() != facts.len() {
            return Err(Error::invalid(format!(
                "{} tuples but {} vectors and {} labels",
                facts.len(),
                vectors.len(),
                labels.len()
            )));
        }
        let dim = vectors.first().map(Vec::len).unwrap_or(0);
        for (index, v) in vectors.iter().enumerate() {
            validate_vector(v, dim).map_err(|e| Error::Embedding {
                index,
                source: Box::new(e),
            })?;
        }
        Ok(EmbeddedFactSet {
            encoder_id: encoder_id.into(),
            facts,
            labels,
            vectors,
        })
    }

    pub fn encoder_id(&self) -> &str {
        &self.encoder_id
    }

    pub fn facts(&self) -> &FactSet {
        &self.facts
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Vector dimension, or 0 for an empty set.
    pub fn dim(&self) -> usize {
        self.vectors.first().map(Vec::len).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

fn validate_vector(v: &[f64], dim: usize) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidVector("zero-dimensional vector".into()));
    }
    if v.len() != dim {
        return Err(Error::InvalidVector(format!(
            "dimension {} differs from {dim}",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidVector("non-finite component".into()));
    }
    if v.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidVector("all-zero vector".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedOptions {
    pub rendering: TupleRendering,
    pub batch_size: usize,
    pub max_inflight: usize,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        EmbedOptions {
            rendering: TupleRendering::Joined,
            batch_size: 64,
            max_inflight: 4,
        }
    }
}

pub fn embed<E: Encoder + ?Sized>(facts: &FactSet, encoder: &E) -> Result<EmbeddedFactSet> {
    embed_with(facts, encoder, &EmbedOptions::default())
}

/// Renders every tuple, encodes each distinct text once, and pairs the
/// vectors back with the tuples in order.
pub fn embed_with<E: Encoder + ?Sized>(
    facts: &FactSet,
    encoder: &E,
    options: &EmbedOptions,
) -> Result<EmbeddedFactSet> {
    let labels: Vec<String> = facts
        .tuples()
        .iter()
        .map(|t| options.rendering.render(t))
        .collect();

    // distinct texts, remembering the first tuple index of each
    let mut slot_of: HashMap<&str, usize> = HashMap::new();
    let mut unique: Vec<(usize, String)> = Vec::new();
    for (i, label) in labels.iter().enumerate() {
        slot_of.entry(label.as_str()).or_insert_with(|| {
            unique.push((i, label.clone()));
            unique.len() - 1
        });
    }

    let batches: Vec<&[(usize, String)]> = unique.chunks(options.batch_size.max(1)).collect();
    let encoded = map_bounded(&batches, options.max_inflight, |_, batch| {
        let texts: Vec<String> = batch.iter().map(|(_, t)| t.clone()).collect();
        let first = batch[0].0;
        let vectors = encoder.encode(&texts).map_err(|e| Error::Embedding {
            index: first,
            source: Box::new(e),
        })?;
        if vectors.len() != texts.len() {
            return Err(Error::Embedding {
                index: first,
                source: Box::new(Error::InvalidVector(format!(
                    "encoder returned {} vectors for {} inputs",
                    vectors.len(),
                    texts.len()
                ))),
            });
        }
        Ok(vectors)
    });
    let mut unique_vectors = Vec::with_capacity(unique.len());
    for batch in encoded {
        unique_vectors.extend(batch?);
    }

    let vectors = labels
        .iter()
        .map(|l| unique_vectors[slot_of[l.as_str()]].clone())
        .collect();
    EmbeddedFactSet::new(encoder.id(), facts.clone(), labels, vectors)
}

/// Cosine similarity with negative values mapped to zero.
///
/// Bit-identical inputs score exactly 1.
pub fn clamped_cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidVector(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 || !na.is_finite() || !nb.is_finite() {
        return Err(Error::InvalidVector(
            "cosine similarity is undefined for zero or non-finite vectors".into(),
        ));
    }
    if a == b {
        return Ok(1.0);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(0.0, 1.0))
}
