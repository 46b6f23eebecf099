//! Fact-tuple extraction: prompt a chat model once per text, parse its
//! answer into tuples, and cache completions on disk.

mod cache;
mod parse;
mod prompt;
mod provider;
mod tuple;

use serde::{Deserialize, Serialize};

pub use cache::{cache_key, embedding_key, DiskCache};
pub use parse::{parse_tuple_list, ParseWarning, ParsedTuples};
pub use prompt::{
    build_extraction_prompt, build_summarization_prompt, format_review_list, render_prompt,
    EXTRACTION_TEMPLATE, SUMMARIZATION_TEMPLATE,
};
pub use provider::{ChatMessage, ChatProvider, NoProvider, OpenAiChatClient, ReplayProvider};
pub use tuple::{FactSet, FactTuple};

use crate::error::{Error, Result};
use crate::pool::map_bounded;

pub const DEFAULT_MODEL: &str = "gpt-4";

/// Everything that determines a completion; also the cache identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionRequest {
    pub model_id: String,
    pub temperature: f64,
    pub prompt_template: String,
    pub input_text: String,
}

impl ExtractionRequest {
    pub fn new(model_id: &str, input_text: &str) -> Result<Self> {
        let r = ExtractionRequest {
            model_id: model_id.to_string(),
            temperature: 0.0,
            prompt_template: EXTRACTION_TEMPLATE.to_string(),
            input_text: input_text.to_string(),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid(format!(
                "temperature must be a finite value >= 0 (got {})",
                self.temperature
            )));
        }
        if self.prompt_template.trim().is_empty() {
            return Err(Error::invalid("prompt template is empty"));
        }
        Ok(())
    }

    pub fn prompt(&self) -> Result<String> {
        render_prompt(&self.prompt_template, &self.input_text)
    }
}

/// Settings shared by every request an [`Extractor`] issues.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionConfig {
    pub model_id: String,
    pub temperature: f64,
    pub prompt_template: String,
    pub max_inflight: usize,
    /// Serve only from cache; a miss is an error.
    pub offline: bool,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            model_id: DEFAULT_MODEL.to_string(),
            temperature: 0.0,
            prompt_template: EXTRACTION_TEMPLATE.to_string(),
            max_inflight: 4,
            offline: false,
        }
    }
}

impl ExtractionConfig {
    pub fn request(&self, input_text: &str) -> ExtractionRequest {
        ExtractionRequest {
            model_id: self.model_id.clone(),
            temperature: self.temperature,
            prompt_template: self.prompt_template.clone(),
            input_text: input_text.to_string(),
        }
    }
}

/// Result of extracting from several texts: the facts and every parser
/// warning tagged with the index of the text it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub facts: FactSet,
    pub warnings: Vec<(usize, ParseWarning)>,
}

pub struct Extractor<P> {
    provider: P,
    cache: Option<DiskCache>,
    config: ExtractionConfig,
}

impl<P: ChatProvider> Extractor<P> {
    pub fn new(provider: P, config: ExtractionConfig) -> Self {
        Extractor {
            provider,
            cache: None,
            config,
        }
    }

    pub fn with_cache(mut self, cache: DiskCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn config(&self) -> &ExtractionConfig {
        &self.config
    }

    pub fn provider(&self) -> &P {
        &self.provider
    }

    /// Returns the completion for `request`, consulting the cache first.
    pub fn complete(&self, request: &ExtractionRequest) -> Result<String> {
        request.validate()?;
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get_completion(request)) {
            return Ok(hit);
        }
        if self.config.offline {
            return Err(Error::CacheMiss {
                key: cache_key(request),
            });
        }
        let prompt = request.prompt()?;
        let completion = self.provider.complete(
            &request.model_id,
            &[ChatMessage::user(prompt)],
            request.temperature,
        )?;
        if let Some(cache) = &self.cache {
            if let Err(e) = cache.put_completion(request, &completion) {
                log::warn!("could not write cache entry: {e}");
            }
        }
        Ok(completion)
    }

    pub fn extract_text(&self, text: &str) -> Result<ParsedTuples> {
        if text.trim().is_empty() {
            return Err(Error::invalid("input text is empty"));
        }
        let completion = self.complete(&self.config.request(text))?;
        parse_tuple_list(&completion)
    }

    /// Extracts from each text independently; one result per text, in order.
    pub fn extract_each<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Vec<Result<ParsedTuples>> {
        map_bounded(texts, self.config.max_inflight, |_, t| {
            self.extract_text(t.as_ref())
        })
    }

    /// Extracts from every text and concatenates the tuples, tagging each
    /// with the index of its text. Fails on the first text that fails.
    pub fn extract_facts<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Result<Extraction> {
        if texts.is_empty() {
            return Err(Error::invalid("no texts to extract from"));
        }
        let mut facts = FactSet::new(texts.len());
        let mut warnings = Vec::new();
        for (index, result) in self.extract_each(texts).into_iter().enumerate() {
            let parsed = result.map_err(|e| Error::Extraction {
                index,
                source: Box::new(e),
            })?;
            facts.extend_from_document(index, parsed.tuples)?;
            warnings.extend(parsed.warnings.into_iter().map(|w| (index, w)));
        }
        Ok(Extraction { facts, warnings })
    }
}

/// Convenience wrapper over [`Extractor::extract_facts`].
pub fn extract_facts<S: AsRef<str> + Sync, P: ChatProvider>(
    texts: &[S],
    provider: P,
    config: ExtractionConfig,
) -> Result<FactSet> {
    Extractor::new(provider, config)
        .extract_facts(texts)
        .map(|e| e.facts)
}
