use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::provider::{build_request, excerpt, parse_response, ProviderFamily, DEFAULT_MAX_TOKENS};
use super::{AdapterError, CallContext, Conversation, ModelAdapter};

const REDACTED: &str = "[REDACTED]";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HttpProviderConfig {
    /// Chat endpoint; `{model}` is replaced by the model name.
    pub endpoint_url: String,
    pub model_name: String,
    /// Environment variable holding the API key. Read on every call.
    pub api_key_env_var: String,
    /// Zero disables client-side throttling.
    pub requests_per_minute: u32,
    pub max_retries: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider: Option<ProviderFamily>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_prompt_chars: Option<usize>,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
    /// Optional JSONL log of request and response bodies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_log: Option<PathBuf>,
}

fn default_timeout_secs() -> u64 {
    120
}

fn default_max_tokens() -> u32 {
    DEFAULT_MAX_TOKENS
}

fn default_backoff_ms() -> u64 {
    1000
}

impl HttpProviderConfig {
    pub fn family(&self) -> ProviderFamily {
        self.provider
            .unwrap_or_else(|| ProviderFamily::infer(&self.endpoint_url))
    }

    fn min_interval(&self) -> Duration {
        if self.requests_per_minute == 0 {
            Duration::ZERO
        } else {
            Duration::from_secs_f64(60.0 / f64::from(self.requests_per_minute))
        }
    }
}

pub struct HttpAdapter {
    name: String,
    config: HttpProviderConfig,
    client: reqwest::blocking::Client,
    next_slot: Mutex<Option<Instant>>,
    audit: Option<Mutex<File>>,
}

enum Attempt {
    Done(Result<String, AdapterError>),
    Retry {
        error: AdapterError,
        wait: Option<Duration>,
    },
}

impl HttpAdapter {
    pub fn new(name: impl Into<String>, config: HttpProviderConfig) -> Result<Self, AdapterError> {
        if !(config.endpoint_url.starts_with("http://") || config.endpoint_url.starts_with("https://")) {
            return Err(AdapterError::Config(format!(
                "endpoint {} is not an http(s) URL",
                config.endpoint_url
            )));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| AdapterError::Config(e.to_string()))?;
        let audit = config
            .audit_log
            .as_ref()
            .map(|p| {
                OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(p)
                    .map(Mutex::new)
                    .map_err(|e| AdapterError::Config(format!("{}: {e}", p.display())))
            })
            .transpose()?;
        Ok(Self {
            name: name.into(),
            config,
            client,
            next_slot: Mutex::new(None),
            audit,
        })
    }

    /// Blocks until the per-adapter request slot is free, then reserves the next one.
    fn wait_for_slot(&self) {
        let interval = self.config.min_interval();
        if interval.is_zero() {
            return;
        }
        let mut slot = self.next_slot.lock().unwrap_or_else(|e| e.into_inner());
        let now = Instant::now();
        let start = match *slot {
            Some(t) if t > now => {
                std::thread::sleep(t - now);
                t
            }
            _ => now,
        };
        *slot = Some(start + interval);
    }

    fn backoff(&self, attempt: u32) -> Duration {
        Duration::from_millis(self.config.backoff_base_ms.saturating_mul(1u64 << attempt.min(16)))
    }

    fn audit(&self, ctx: &CallContext, url: &str, request: &Value, status: u16, response: &str, key: &str) {
        let Some(file) = &self.audit else { return };
        let line = json!({
            "timestamp": chrono::Utc::now().to_rfc3339(),
            "model": self.name,
            "task": ctx.task,
            "entryId": ctx.entry_id,
            "executionIndex": ctx.execution_index,
            "turnIndex": ctx.turn_index,
            "url": url,
            "request": request,
            "status": status,
            "response": response,
        });
        let text = redact(&line.to_string(), key);
        let mut file = file.lock().unwrap_or_else(|e| e.into_inner());
        if let Err(e) = writeln!(file, "{text}") {
            log::warn!("audit log write failed: {e}");
        }
    }

    fn attempt(&self, ctx: &CallContext, key: &str, request: &super::ProviderRequest) -> Attempt {
        let family = self.config.family();
        let (key_header, key_prefix) = family.key_header();
        let mut builder = self.client.post(&request.url).json(&request.body);
        for (name, value) in &request.headers {
            builder = builder.header(*name, value);
        }
        builder = builder.header(key_header, format!("{key_prefix}{key}"));
        let response = match builder.send() {
            Ok(r) => r,
            Err(e) => {
                let error = AdapterError::ProviderError {
                    status: 0,
                    excerpt: redact(&excerpt(&e.to_string()), key),
                };
                return Attempt::Retry { error, wait: None };
            }
        };
        let status = response.status().as_u16();
        let retry_after = response
            .headers()
            .get(reqwest::header::RETRY_AFTER)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        let body = response.text().unwrap_or_default();
        self.audit(ctx, &request.url, &request.body, status, &body, key);
        let provider_error = || AdapterError::ProviderError {
            status,
            excerpt: redact(&excerpt(&body), key),
        };
        match status {
            200..=299 => Attempt::Done(
                serde_json::from_str::<Value>(&body)
                    .map_err(|_| provider_error())
                    .and_then(|v| parse_response(family, &v)),
            ),
            429 => Attempt::Retry {
                error: AdapterError::RateLimited { attempts: 0 },
                wait: retry_after,
            },
            500..=599 => Attempt::Retry {
                error: provider_error(),
                wait: retry_after,
            },
            _ => Attempt::Done(Err(provider_error())),
        }
    }
}

impl ModelAdapter for HttpAdapter {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, ctx: &CallContext, conversation: &Conversation) -> Result<String, AdapterError> {
        conversation.check_ready()?;
        if let Some(limit) = self.config.max_prompt_chars {
            let chars = conversation.total_chars();
            if chars > limit {
                return Err(AdapterError::PromptTooLarge { chars, limit });
            }
        }
        let key = std::env::var(&self.config.api_key_env_var).map_err(|_| {
            AdapterError::Config(format!(
                "environment variable {} is not set",
                self.config.api_key_env_var
            ))
        })?;
        let request = build_request(
            self.config.family(),
            &self.config.endpoint_url,
            &self.config.model_name,
            conversation,
            self.config.max_tokens,
        );
        let attempts = self.config.max_retries + 1;
        let mut last_error = None;
        for attempt in 0..attempts {
            self.wait_for_slot();
            match self.attempt(ctx, &key, &request) {
                Attempt::Done(result) => return result,
                Attempt::Retry { error, wait } => {
                    log::debug!("{}: attempt {} failed: {error}", self.name, attempt + 1);
                    last_error = Some(error);
                    if attempt + 1 < attempts {
                        std::thread::sleep(wait.unwrap_or_else(|| self.backoff(attempt)));
                    }
                }
            }
        }
        Err(match last_error {
            Some(AdapterError::RateLimited { .. }) => AdapterError::RateLimited { attempts },
            Some(e) => e,
            None => AdapterError::Config("no attempt made".into()),
        })
    }
}

fn redact(text: &str, key: &str) -> String {
    if key.is_empty() {
        text.to_owned()
    } else {
        text.replace(key, REDACTED)
    }
}
