//! Blocking JSON-over-HTTP transport shared by the chat and embedding clients.

use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// Exponential backoff for transport failures and 5xx responses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub multiplier: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            initial_backoff: Duration::from_millis(500),
            multiplier: 2.0,
        }
    }
}

impl RetryPolicy {
    pub fn backoff(&self, attempt: u32) -> Duration {
        self.initial_backoff
            .mul_f64(self.multiplier.powi(attempt.saturating_sub(1) as i32))
    }

    /// Runs `op` until it succeeds, fails with a non-retryable error, or the
    /// attempt budget is spent.
    pub fn run<T>(&self, mut op: impl FnMut() -> Result<T>) -> Result<T> {
        let attempts = self.max_attempts.max(1);
        let mut attempt = 1;
        loop {
            match op() {
                Err(e) if e.is_retryable() && attempt < attempts => {
                    let wait = self.backoff(attempt);
                    log::warn!("attempt {attempt}/{attempts} failed ({e}); retrying in {wait:?}");
                    std::thread::sleep(wait);
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct JsonClient {
    agent: ureq::Agent,
    base_url: String,
    api_key: Option<String>,
    retry: RetryPolicy,
}

impl JsonClient {
    pub fn new(base_url: &str, api_key: Option<String>, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build()
            .into();
        JsonClient {
            agent,
            base_url: base_url.trim_end_matches('/').to_string(),
            api_key: api_key.filter(|k| !k.is_empty()),
            retry: RetryPolicy::default(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    fn post_once(&self, url: &str, body: &impl Serialize) -> Result<Value> {
        let mut req = self
            .agent
            .post(url)
            .header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let payload = serde_json::to_vec(body)?;
        let mut resp = req.send(&payload[..]).map_err(|e| Error::Provider {
            message: format!("POST {url}: {e}"),
            retryable: true,
        })?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::Provider {
                message: format!("POST {url}: reading body: {e}"),
                retryable: true,
            })?;
        if !(200..300).contains(&status) {
            return Err(Error::Provider {
                message: format!("POST {url}: HTTP {status}: {}", truncate(&text, 300)),
                retryable: status >= 500,
            });
        }
        serde_json::from_str(&text).map_err(|e| Error::Provider {
            message: format!(
                "POST {url}: malformed JSON response ({e}): {}",
                truncate(&text, 300)
            ),
            retryable: false,
        })
    }

    /// POSTs `body` to `base_url/path` and returns the decoded JSON response.
    pub fn post(&self, path: &str, body: &impl Serialize) -> Result<Value> {
        let url = format!("{}/{}", self.base_url, path.trim_start_matches('/'));
        self.retry.run(|| self.post_once(&url, body))
    }
}

fn truncate(s: &str, max: usize) -> &str {
    match s.char_indices().nth(max) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn fast() -> RetryPolicy {
        RetryPolicy {
            initial_backoff: Duration::from_millis(1),
            ..RetryPolicy::default()
        }
    }

    #[test]
    fn backoff_doubles() {
        let p = RetryPolicy::default();
        assert_eq!(p.backoff(1), Duration::from_millis(500));
        assert_eq!(p.backoff(2), Duration::from_millis(1000));
        assert_eq!(p.backoff(3), Duration::from_millis(2000));
    }

    #[test]
    fn retries_retryable_errors_up_to_budget() {
        let calls = Cell::new(0);
        let r: Result<()> = fast().run(|| {
            calls.set(calls.get() + 1);
            Err(Error::Provider {
                message: "503".into(),
                retryable: true,
            })
        });
        assert!(r.is_err());
        assert_eq!(calls.get(), 3);
    }

    #[test]
    fn does_not_retry_client_errors() {
        let calls = Cell::new(0);
        let r: Result<()> = fast().run(|| {
            calls.set(calls.get() + 1);
            Err(Error::Provider {
                message: "401".into(),
                retryable: false,
            })
        });
        assert!(r.is_err());
        assert_eq!(calls.get(), 1);
    }

    #[test]
    fn succeeds_after_transient_failure() {
        let calls = Cell::new(0);
        let r = fast().run(|| {
            calls.set(calls.get() + 1);
            if calls.get() < 2 {
                Err(Error::Provider {
                    message: "reset".into(),
                    retryable: true,
                })
            } else {
                Ok(7)
            }
        });
        assert_eq!(r.unwrap(), 7);
    }

    #[test]
    fn truncate_respects_char_boundaries() {
        assert_eq!(truncate("héllo", 2), "hé");
        assert_eq!(truncate("ab", 5), "ab");
    }
}
