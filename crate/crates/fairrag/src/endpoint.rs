//! Chat-completion endpoint adapter.
//!
//! Sends `{model, temperature, messages: [{role, content}]}` and reads
//! `choices[0].message.content` from the response. The API key comes from an
//! environment variable, never from a flag. Requests share a token bucket;
//! HTTP 429 responses are retried with exponential backoff.

use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use fairrag_core::experiment::{Generator, GeneratorFailure};
use fairrag_core::ranking::RankedList;
use fairrag_core::TrialRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sampling temperature used unless configured otherwise.
pub const DEFAULT_TEMPERATURE: f64 = 0.1;
/// Default model name.
pub const DEFAULT_MODEL: &str = "gpt-4o-mini";
/// Default environment variable holding the API key.
pub const DEFAULT_API_KEY_ENV: &str = "FAIRRAG_API_KEY";
/// Attempts per request, the first one included.
pub const MAX_ATTEMPTS: u32 = 5;

/// Endpoint settings.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointConfig {
    /// Full URL of the chat-completions route.
    pub url: String,
    /// Model name.
    pub model: String,
    /// Sampling temperature.
    pub temperature: f64,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    /// Token-bucket rate shared by all requests.
    pub requests_per_minute: u32,
    /// Attempts per request (429 retries).
    pub max_attempts: u32,
    /// Delay before the first retry; doubles per retry.
    pub initial_backoff: Duration,
    /// Whole-request timeout.
    pub timeout: Duration,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        Self {
            url: String::new(),
            model: DEFAULT_MODEL.into(),
            temperature: DEFAULT_TEMPERATURE,
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            requests_per_minute: 60,
            max_attempts: MAX_ATTEMPTS,
            initial_backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(60),
        }
    }
}

/// Endpoint failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EndpointError {
    /// No URL configured.
    #[error("endpoint URL is not configured")]
    NotConfigured,
    /// The key variable is unset or empty.
    #[error("environment variable `{0}` is not set")]
    MissingApiKey(String),
    /// Transport failure.
    #[error("network error: {0}")]
    Network(String),
    /// 401 or 403.
    #[error("authentication rejected (HTTP {0})")]
    Auth(u16),
    /// Still rate limited after every attempt.
    #[error("rate limited after {0} attempts")]
    RateLimited(u32),
    /// Any other non-success status.
    #[error("HTTP {status}: {body}")]
    Http {
        /// Status code.
        status: u16,
        /// Response body (truncated).
        body: String,
    },
    /// Response body lacked a completion.
    #[error("malformed response: {0}")]
    MalformedResponse(String),
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    temperature: f64,
    messages: [ChatMessage<'a>; 1],
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

/// Shared request budget refilled continuously at a fixed rate.
#[derive(Debug)]
pub struct TokenBucket {
    state: Mutex<BucketState>,
    capacity: f64,
    per_second: f64,
}

#[derive(Debug)]
struct BucketState {
    tokens: f64,
    last: Instant,
}

impl TokenBucket {
    /// A full bucket allowing `per_minute` requests per minute.
    pub fn per_minute(per_minute: u32) -> Self {
        let capacity = f64::from(per_minute.max(1));
        Self {
            state: Mutex::new(BucketState {
                tokens: capacity,
                last: Instant::now(),
            }),
            capacity,
            per_second: capacity / 60.0,
        }
    }

    /// Blocks until a token is available and takes it.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut s = self.state.lock().unwrap_or_else(|e| e.into_inner());
                let now = Instant::now();
                let refill = now.duration_since(s.last).as_secs_f64() * self.per_second;
                s.tokens = (s.tokens + refill).min(self.capacity);
                s.last = now;
                if s.tokens >= 1.0 {
                    s.tokens -= 1.0;
                    return;
                }
                Duration::from_secs_f64((1.0 - s.tokens) / self.per_second)
            };
            thread::sleep(wait);
        }
    }
}

/// A configured chat-completion client.
#[derive(Debug)]
pub struct ChatClient {
    agent: ureq::Agent,
    config: EndpointConfig,
    api_key: String,
    bucket: TokenBucket,
}

impl ChatClient {
    /// Client with an explicit key.
    pub fn new(config: EndpointConfig, api_key: String) -> Result<Self, EndpointError> {
        if config.url.trim().is_empty() {
            return Err(EndpointError::NotConfigured);
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        let bucket = TokenBucket::per_minute(config.requests_per_minute);
        Ok(Self {
            agent,
            config,
            api_key,
            bucket,
        })
    }

    /// Client reading the key from `config.api_key_env`.
    pub fn from_env(config: EndpointConfig) -> Result<Self, EndpointError> {
        let key = std::env::var(&config.api_key_env)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| EndpointError::MissingApiKey(config.api_key_env.clone()))?;
        Self::new(config, key)
    }

    /// Sends `prompt` as a single user message and returns the completion text.
    pub fn complete(&self, prompt: &str) -> Result<String, EndpointError> {
        let body = ChatRequest {
            model: &self.config.model,
            temperature: self.config.temperature,
            messages: [ChatMessage {
                role: "user",
                content: prompt,
            }],
        };
        let attempts = self.config.max_attempts.max(1);
        let mut backoff = self.config.initial_backoff;
        for attempt in 1..=attempts {
            self.bucket.acquire();
            let mut response = self
                .agent
                .post(&self.config.url)
                .header("Authorization", &format!("Bearer {}", self.api_key))
                .send_json(&body)
                .map_err(|e| EndpointError::Network(e.to_string()))?;
            let status = response.status().as_u16();
            match status {
                200..=299 => {
                    let text = response
                        .body_mut()
                        .read_to_string()
                        .map_err(|e| EndpointError::Network(e.to_string()))?;
                    return parse_completion(&text);
                }
                401 | 403 => return Err(EndpointError::Auth(status)),
                429 if attempt < attempts => {
                    thread::sleep(backoff);
                    backoff = backoff.saturating_mul(2);
                }
                429 => return Err(EndpointError::RateLimited(attempts)),
                _ => {
                    let mut body = response.body_mut().read_to_string().unwrap_or_default();
                    body.truncate(200);
                    return Err(EndpointError::Http { status, body });
                }
            }
        }
        Err(EndpointError::RateLimited(attempts))
    }
}

/// Extracts `choices[0].message.content` from a response body.
pub fn parse_completion(body: &str) -> Result<String, EndpointError> {
    let parsed: ChatResponse =
        serde_json::from_str(body).map_err(|e| EndpointError::MalformedResponse(e.to_string()))?;
    parsed
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| EndpointError::MalformedResponse("no choices[0].message.content".into()))
}

/// One-shot call: builds a client from the environment and sends `prompt`.
pub fn call_chat_endpoint(prompt: &str, config: &EndpointConfig) -> Result<String, EndpointError> {
    ChatClient::from_env(config.clone())?.complete(prompt)
}

/// [`Generator`] backed by a live endpoint.
#[derive(Debug)]
pub struct EndpointGenerator(pub ChatClient);

impl Generator for EndpointGenerator {
    fn generate(
        &self,
        prompt: &str,
        _context: &RankedList<'_>,
        _rng: &mut TrialRng,
    ) -> Result<String, GeneratorFailure> {
        self.0.complete(prompt).map_err(|e| GeneratorFailure(e.to_string()))
    }
}
