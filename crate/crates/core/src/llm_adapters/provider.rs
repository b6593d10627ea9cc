use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{AdapterError, Conversation, Role};

/// Output token cap sent to providers that require one.
pub const DEFAULT_MAX_TOKENS: u32 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ProviderFamily {
    OpenAi,
    Anthropic,
    Google,
}

impl ProviderFamily {
    /// Guesses the wire format from the endpoint host; OpenAI-compatible
    /// is the fallback.
    pub fn infer(endpoint_url: &str) -> Self {
        let lower = endpoint_url.to_ascii_lowercase();
        if lower.contains("anthropic") {
            ProviderFamily::Anthropic
        } else if lower.contains("googleapis") || lower.contains("generatecontent") {
            ProviderFamily::Google
        } else {
            ProviderFamily::OpenAi
        }
    }

    /// Header carrying the API key and the prefix before the key value.
    pub fn key_header(self) -> (&'static str, &'static str) {
        match self {
            ProviderFamily::OpenAi => ("authorization", "Bearer "),
            ProviderFamily::Anthropic => ("x-api-key", ""),
            ProviderFamily::Google => ("x-goog-api-key", ""),
        }
    }
}

/// A provider request without credentials.
#[derive(Debug, Clone, PartialEq)]
pub struct ProviderRequest {
    pub url: String,
    pub headers: Vec<(&'static str, String)>,
    pub body: Value,
}

/// Translates a conversation into the provider's chat request. `{model}`
/// in the endpoint URL is replaced by the model name.
pub fn build_request(
    family: ProviderFamily,
    endpoint_url: &str,
    model: &str,
    conversation: &Conversation,
    max_tokens: u32,
) -> ProviderRequest {
    let url = endpoint_url.replace("{model}", model);
    let mut headers = vec![("content-type", "application/json".to_owned())];
    let body = match family {
        ProviderFamily::OpenAi => {
            let messages: Vec<Value> = conversation
                .messages
                .iter()
                .map(|m| json!({"role": m.role.to_string(), "content": m.content}))
                .collect();
            json!({"model": model, "messages": messages})
        }
        ProviderFamily::Anthropic => {
            headers.push(("anthropic-version", "2023-06-01".to_owned()));
            let messages: Vec<Value> = conversation
                .turns()
                .iter()
                .map(|m| json!({"role": m.role.to_string(), "content": m.content}))
                .collect();
            let mut body = json!({"model": model, "max_tokens": max_tokens, "messages": messages});
            if let Some(system) = conversation.system() {
                body["system"] = json!(system);
            }
            body
        }
        ProviderFamily::Google => {
            let contents: Vec<Value> = conversation
                .turns()
                .iter()
                .map(|m| {
                    let role = if m.role == Role::Assistant { "model" } else { "user" };
                    json!({"role": role, "parts": [{"text": m.content}]})
                })
                .collect();
            let mut body = json!({"contents": contents});
            if let Some(system) = conversation.system() {
                body["systemInstruction"] = json!({"parts": [{"text": system}]});
            }
            body
        }
    };
    ProviderRequest { url, headers, body }
}

/// Extracts the assistant text from a successful response body.
pub fn parse_response(family: ProviderFamily, body: &Value) -> Result<String, AdapterError> {
    let malformed = || AdapterError::ProviderError {
        status: 200,
        excerpt: excerpt(&body.to_string()),
    };
    match family {
        ProviderFamily::OpenAi => body
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(malformed),
        ProviderFamily::Anthropic => {
            let blocks = body.get("content").and_then(Value::as_array).ok_or_else(malformed)?;
            Ok(blocks
                .iter()
                .filter(|b| b.get("type").and_then(Value::as_str) == Some("text"))
                .filter_map(|b| b.get("text").and_then(Value::as_str))
                .collect())
        }
        ProviderFamily::Google => {
            let parts = body
                .pointer("/candidates/0/content/parts")
                .and_then(Value::as_array)
                .ok_or_else(malformed)?;
            Ok(parts
                .iter()
                .filter_map(|p| p.get("text").and_then(Value::as_str))
                .collect())
        }
    }
}

/// First 200 characters of a response body.
pub(crate) fn excerpt(body: &str) -> String {
    const LIMIT: usize = 200;
    match body.char_indices().nth(LIMIT) {
        Some((i, _)) => format!("{}...", &body[..i]),
        None => body.to_owned(),
    }
}
