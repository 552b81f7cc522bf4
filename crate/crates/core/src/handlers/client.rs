//! Text-completion transport.
//!
//! Wire contract (provider-agnostic): `POST {base_url}/completions` with
//! `{model, prompt, temperature, max_tokens, n, stop}`, answered by
//! `{choices: [{text, index?}]}`. Rate limits (429) and server errors (5xx)
//! and transport failures are retried on the configured backoff schedule.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::HandlerError;

pub const DEFAULT_API_KEY_ENV: &str = "PROGFC_API_KEY";

/// Endpoint settings; mirrored by the `[endpoint]` config section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmEndpointConfig {
    pub base_url: String,
    pub model_name: String,
    pub max_new_tokens: u32,
    pub temperature: f64,
    pub stop_sequences: Vec<String>,
    pub timeout_secs: f64,
    pub max_retries: u32,
    /// Wait before retry `i` is `retry_backoff_ms[min(i, len - 1)]`.
    pub retry_backoff_ms: Vec<u64>,
    pub max_in_flight: usize,
    /// Environment variable holding a bearer token, if any.
    pub api_key_env: String,
}

impl Default for LmEndpointConfig {
    fn default() -> Self {
        Self {
            base_url: "http://127.0.0.1:8000/v1".to_string(),
            model_name: "flan-t5-xl".to_string(),
            max_new_tokens: 64,
            temperature: 0.0,
            stop_sequences: Vec::new(),
            timeout_secs: 60.0,
            max_retries: 3,
            retry_backoff_ms: vec![1_000, 2_000, 4_000],
            max_in_flight: 8,
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
        }
    }
}

impl LmEndpointConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 {
            return Err("endpoint timeout must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.temperature) {
            return Err("endpoint temperature must be within [0, 1]".into());
        }
        if self.max_in_flight == 0 {
            return Err("max_in_flight must be at least 1".into());
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }

    pub fn backoff(&self, retry: usize) -> Duration {
        match self.retry_backoff_ms.len() {
            0 => Duration::ZERO,
            n => Duration::from_millis(self.retry_backoff_ms[retry.min(n - 1)]),
        }
    }

    /// Sampling parameters taken from this config.
    pub fn sampling(&self, n: u32) -> SamplingParams {
        SamplingParams {
            temperature: self.temperature,
            max_tokens: self.max_new_tokens,
            stop: self.stop_sequences.clone(),
            n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingParams {
    pub temperature: f64,
    pub max_tokens: u32,
    pub stop: Vec<String>,
    pub n: u32,
}

/// Anything that turns a prompt into `n` completion strings.
pub trait CompletionClient: Send + Sync {
    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Vec<String>, HandlerError>;

    /// Whether concurrent `complete` calls are allowed.
    fn concurrent_safe(&self) -> bool {
        true
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    temperature: f64,
    max_tokens: u32,
    n: u32,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    stop: &'a [String],
}

#[derive(Deserialize)]
struct WireChoice {
    text: String,
    #[serde(default)]
    index: Option<usize>,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

/// Counting semaphore bounding concurrent requests.
struct InFlight {
    used: Mutex<usize>,
    freed: Condvar,
    limit: usize,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn new(limit: usize) -> Self {
        Self {
            used: Mutex::new(0),
            freed: Condvar::new(),
            limit: limit.max(1),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut used = self.used.lock().unwrap_or_else(|e| e.into_inner());
        while *used >= self.limit {
            used = self.freed.wait(used).unwrap_or_else(|e| e.into_inner());
        }
        *used += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut used = self.0.used.lock().unwrap_or_else(|e| e.into_inner());
        *used -= 1;
        self.0.freed.notify_one();
    }
}

enum Attempt {
    Done(Vec<String>),
    Retryable { status: Option<u16>, detail: String },
    Fatal { status: Option<u16>, detail: String },
}

/// Blocking HTTP client for the completion endpoint.
pub struct HttpCompletionClient {
    config: LmEndpointConfig,
    http: reqwest::blocking::Client,
    api_key: Option<String>,
    in_flight: InFlight,
}

impl HttpCompletionClient {
    pub fn new(config: LmEndpointConfig) -> Result<Self, HandlerError> {
        config.validate().map_err(HandlerError::Config)?;
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout())
            .build()
            .map_err(|e| HandlerError::Config(e.to_string()))?;
        let api_key = std::env::var(&config.api_key_env)
            .ok()
            .filter(|k| !k.is_empty());
        Ok(Self {
            in_flight: InFlight::new(config.max_in_flight),
            config,
            http,
            api_key,
        })
    }

    pub fn config(&self) -> &LmEndpointConfig {
        &self.config
    }

    fn url(&self) -> String {
        format!("{}/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn attempt(&self, body: &WireRequest<'_>) -> Attempt {
        let _permit = self.in_flight.acquire();
        let mut req = self.http.post(self.url()).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) => {
                return Attempt::Retryable {
                    status: None,
                    detail: e.to_string(),
                }
            }
        };
        let status = resp.status();
        let code = Some(status.as_u16());
        if status.as_u16() == 429 || status.is_server_error() {
            return Attempt::Retryable {
                status: code,
                detail: format!("HTTP {status}"),
            };
        }
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Attempt::Fatal {
                status: code,
                detail: format!(
                    "HTTP {status}: {}",
                    text.chars().take(200).collect::<String>()
                ),
            };
        }
        match resp.json::<WireResponse>() {
            Ok(mut parsed) => {
                parsed
                    .choices
                    .sort_by_key(|c| c.index.unwrap_or(usize::MAX));
                Attempt::Done(parsed.choices.into_iter().map(|c| c.text).collect())
            }
            Err(e) => Attempt::Fatal {
                status: code,
                detail: format!("malformed response body: {e}"),
            },
        }
    }
}

impl CompletionClient for HttpCompletionClient {
    /// At most `max_retries + 1` attempts.
    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Vec<String>, HandlerError> {
        let body = WireRequest {
            model: &self.config.model_name,
            prompt,
            temperature: params.temperature,
            max_tokens: params.max_tokens,
            n: params.n.max(1),
            stop: &params.stop,
        };
        let mut attempts = 0u32;
        loop {
            attempts += 1;
            match self.attempt(&body) {
                Attempt::Done(texts) => return Ok(texts),
                Attempt::Fatal { status, detail } => {
                    return Err(HandlerError::Transport {
                        status,
                        attempts,
                        detail,
                    })
                }
                Attempt::Retryable { status, detail } => {
                    if attempts > self.config.max_retries {
                        return Err(HandlerError::Transport {
                            status,
                            attempts,
                            detail,
                        });
                    }
                    log::warn!("completion attempt {attempts} failed ({detail}); retrying");
                    std::thread::sleep(self.config.backoff(attempts as usize - 1));
                }
            }
        }
    }
}
