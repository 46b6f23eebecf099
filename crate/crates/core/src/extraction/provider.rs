use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::http::{JsonClient, RetryPolicy};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "user".into(),
            content: content.into(),
        }
    }
}

/// A chat-completion backend: takes a model, messages and a temperature and
/// returns the completion text.
pub trait ChatProvider: Send + Sync {
    fn complete(
        &self,
        model_id: &str,
        messages: &[ChatMessage],
        temperature: f64,
    ) -> Result<String>;
}

impl<T: ChatProvider + ?Sized> ChatProvider for std::sync::Arc<T> {
    fn complete(
        &self,
        model_id: &str,
        messages: &[ChatMessage],
        temperature: f64,
    ) -> Result<String> {
        (**self).complete(model_id, messages, temperature)
    }
}

impl<T: ChatProvider + ?Sized> ChatProvider for &T {
    fn complete(
        &self,
        model_id: &str,
        messages: &[ChatMessage],
        temperature: f64,
    ) -> Result<String> {
        (**self).complete(model_id, messages, temperature)
    }
}

impl<T: ChatProvider + ?Sized> ChatProvider for Box<T> {
    fn complete(
        &self,
        model_id: &str,
        messages: &[ChatMessage],
        temperature: f64,
    ) -> Result<String> {
        (**self).complete(model_id, messages, temperature)
    }
}

/// Client for OpenAI-compatible `POST {base}/chat/completions` endpoints.
#[derive(Debug, Clone)]
pub struct OpenAiChatClient {
    http: JsonClient,
}

impl OpenAiChatClient {
    pub fn new(base_url: &str, api_key: Option<String>) -> Self {
        OpenAiChatClient {
            http: JsonClient::new(base_url, api_key, Duration::from_secs(120)),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.http = self.http.with_retry(retry);
        self
    }
}

impl ChatProvider for OpenAiChatClient {
    fn complete(
        &self,
        model_id: &str,
        messages: &[ChatMessage],
        temperature: f64,
    ) -> Result<String> {
        let body = json!({
            "model": model_id,
            "messages": messages,
            "temperature": temperature,
        });
        let resp = self.http.post("chat/completions", &body)?;
        resp.pointer("/choices/0/message/content")
            .and_then(|c| c.as_str())
            .map(str::to_string)
            .ok_or_else(|| Error::Provider {
                message: format!("completion response has no choices[0].message.content: {resp}"),
                retryable: false,
            })
    }
}

/// Stands in for a provider when network use is forbidden.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoProvider;

impl ChatProvider for NoProvider {
    fn complete(&self, _: &str, _: &[ChatMessage], _: f64) -> Result<String> {
        Err(Error::Provider {
            message: "no chat provider configured".into(),
            retryable: false,
        })
    }
}

/// Replays canned completions keyed by the text appended to the prompt.
/// Counts calls so tests can observe cache behaviour.
#[derive(Debug, Default)]
pub struct ReplayProvider {
    responses: Vec<(String, String)>,
    calls: std::sync::atomic::AtomicUsize,
}

impl ReplayProvider {
    pub fn new<I, K, V>(responses: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        ReplayProvider {
            responses: responses
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
            calls: Default::default(),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(std::sync::atomic::Ordering::SeqCst)
    }
}

impl ChatProvider for ReplayProvider {
    fn complete(&self, _: &str, messages: &[ChatMessage], _: f64) -> Result<String> {
        self.calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        let prompt = messages.last().map(|m| m.content.as_str()).unwrap_or("");
        self.responses
            .iter()
            .filter(|(input, _)| prompt.ends_with(&format!("\n{input}")))
            .max_by_key(|(input, _)| input.len())
            .map(|(_, completion)| completion.clone())
            .ok_or_else(|| Error::Provider {
                message: "no canned completion for prompt".into(),
                retryable: false,
            })
    }
}
