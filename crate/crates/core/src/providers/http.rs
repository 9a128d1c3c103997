//! Remote generative model over a chat-completion style HTTP API.
//!
//! The request and response shapes are configurable so the provider is not
//! tied to one vendor: the prompt is sent either as a chat `messages` array
//! or as a raw string field, and the completion is extracted with a JSON
//! pointer. The bearer token is read from an environment variable named in
//! the config, never from the config file itself.

use std::fs;
use std::path::Path;
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{GenerativeModelProvider, ProviderDescriptor, ProviderError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptStyle {
    /// `[{"role": "user", "content": prompt}]`
    #[default]
    Chat,
    /// The prompt string as-is.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldMap {
    pub model_field: String,
    pub prompt_field: String,
    pub prompt_style: PromptStyle,
    pub response_pointer: String,
}

impl Default for FieldMap {
    fn default() -> Self {
        Self {
            model_field: "model".into(),
            prompt_field: "messages".into(),
            prompt_style: PromptStyle::Chat,
            response_pointer: "/choices/0/message/content".into(),
        }
    }
}

fn default_path() -> String {
    "/v1/chat/completions".into()
}
fn default_timeout_ms() -> u64 {
    30_000
}
fn default_max_retries() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    500
}
fn default_max_in_flight() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpProviderConfig {
    pub base_url: String,
    #[serde(default = "default_path")]
    pub path: String,
    pub model_name: String,
    #[serde(default)]
    pub auth_env_var: Option<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    /// Retries after the first attempt, on transport errors, 429 and 5xx.
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    /// First backoff; doubles on every retry.
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    #[serde(default)]
    pub field_map: FieldMap,
    /// Extra request fields (temperature, max_tokens, ...) passed through
    /// verbatim.
    #[serde(default)]
    pub params: Map<String, Value>,
}

impl HttpProviderConfig {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            path: default_path(),
            model_name: model_name.into(),
            auth_env_var: None,
            timeout_ms: default_timeout_ms(),
            max_retries: default_max_retries(),
            backoff_ms: default_backoff_ms(),
            max_in_flight: default_max_in_flight(),
            field_map: FieldMap::default(),
            params: Map::new(),
        }
    }

    /// Reads a `.toml` or `.json` config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProviderError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| ProviderError::Config(format!("{}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e == "json");
        if is_json {
            serde_json::from_str(&text)
                .map_err(|e| ProviderError::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| ProviderError::Config(format!("{}: {e}", path.display())))
        }
    }

    pub fn url(&self) -> String {
        format!(
            "{}/{}",
            self.base_url.trim_end_matches('/'),
            self.path.trim_start_matches('/')
        )
    }

    /// Backoff before retry number `retry` (1-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        Duration::from_millis(self.backoff_ms.saturating_mul(1u64 << (retry - 1).min(16)))
    }
}

/// Counting semaphore bounding concurrent requests.
struct InFlight {
    available: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn new(n: usize) -> Self {
        Self {
            available: Mutex::new(n.max(1)),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut n = self.available.lock().unwrap_or_else(|e| e.into_inner());
        while *n == 0 {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut n = self.0.available.lock().unwrap_or_else(|e| e.into_inner());
        *n += 1;
        self.0.freed.notify_one();
    }
}

pub struct HttpProvider {
    config: HttpProviderConfig,
    token: Option<String>,
    agent: ureq::Agent,
    in_flight: InFlight,
}

enum Attempt {
    Done(String),
    Retryable(ProviderError),
    Fatal(ProviderError),
}

impl HttpProvider {
    /// Builds the provider, reading the bearer token from
    /// `config.auth_env_var` when set. A named but unset variable is an
    /// `Auth` error.
    pub fn new(config: HttpProviderConfig) -> Result<Self, ProviderError> {
        let token = match &config.auth_env_var {
            Some(var) => match std::env::var(var) {
                Ok(t) if !t.trim().is_empty() => Some(t),
                _ => return Err(ProviderError::Auth(format!("environment variable {var} is not set"))),
            },
            None => None,
        };
        Ok(Self::with_token(config, token))
    }

    pub fn with_token(config: HttpProviderConfig, token: Option<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(config.timeout_ms)))
            .http_status_as_error(false)
            .build()
            .into();
        let in_flight = InFlight::new(config.max_in_flight);
        Self {
            config,
            token,
            agent,
            in_flight,
        }
    }

    pub fn config(&self) -> &HttpProviderConfig {
        &self.config
    }

    pub fn request_body(&self, prompt: &str) -> Value {
        let fm = &self.config.field_map;
        let mut body = self.config.params.clone();
        body.insert(fm.model_field.clone(), json!(self.config.model_name));
        let prompt_value = match fm.prompt_style {
            PromptStyle::Chat => json!([{ "role": "user", "content": prompt }]),
            PromptStyle::Raw => json!(prompt),
        };
        body.insert(fm.prompt_field.clone(), prompt_value);
        Value::Object(body)
    }

    fn extract(&self, raw: String) -> Result<String, ProviderError> {
        let parsed: Value = match serde_json::from_str(&raw) {
            Ok(v) => v,
            Err(e) => {
                return Err(ProviderError::Malformed {
                    detail: format!("response is not JSON: {e}"),
                    raw_body: raw,
                })
            }
        };
        match parsed.pointer(&self.config.field_map.response_pointer) {
            Some(Value::String(s)) => Ok(s.clone()),
            _ => Err(ProviderError::Malformed {
                detail: format!(
                    "no string at {}",
                    self.config.field_map.response_pointer
                ),
                raw_body: raw,
            }),
        }
    }

    fn attempt(&self, body: &Value, attempts: u32) -> Attempt {
        let mut req = self.agent.post(self.config.url()).header("Content-Type", "application/json");
        if let Some(t) = &self.token {
            req = req.header("Authorization", format!("Bearer {t}"));
        }
        let mut resp = match req.send_json(body) {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => {
                return Attempt::Retryable(ProviderError::Timeout { attempts })
            }
            Err(e) => return Attempt::Retryable(ProviderError::Transport(e.to_string())),
        };
        let status = resp.status().as_u16();
        let text = match resp.body_mut().read_to_string() {
            Ok(t) => t,
            Err(ureq::Error::Timeout(_)) => {
                return Attempt::Retryable(ProviderError::Timeout { attempts })
            }
            Err(e) => return Attempt::Retryable(ProviderError::Transport(e.to_string())),
        };
        match status {
            200..=299 => match self.extract(text) {
                Ok(s) => Attempt::Done(s),
                Err(e) => Attempt::Fatal(e),
            },
            401 | 403 => Attempt::Fatal(ProviderError::Auth(format!("http {status}: {text}"))),
            429 => Attempt::Retryable(ProviderError::RateLimited { attempts }),
            500..=599 => Attempt::Retryable(ProviderError::Status { status, body: text }),
            _ => Attempt::Fatal(ProviderError::Status { status, body: text }),
        }
    }
}

impl GenerativeModelProvider for HttpProvider {
    fn generate(&self, prompt: &str) -> Result<String, ProviderError> {
        let _permit = self.in_flight.acquire();
        let body = self.request_body(prompt);
        let total = self.config.max_retries + 1;
        let mut attempt = 1;
        loop {
            match self.attempt(&body, attempt) {
                Attempt::Done(s) => return Ok(s),
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retryable(e) if attempt >= total => return Err(e),
                Attempt::Retryable(_) => {
                    thread::sleep(self.config.backoff(attempt));
                    attempt += 1;
                }
            }
        }
    }

    fn descriptor(&self) -> ProviderDescriptor {
        ProviderDescriptor {
            provider_id: format!("http:{}", self.config.base_url),
            model_name: self.config.model_name.clone(),
            deterministic: false,
        }
    }
}
