//! Chat model adapters behind one completion contract.
//!
//! - [`HttpAdapter`]: hosted chat APIs (OpenAI, Anthropic and Google wire formats)
//! - [`MockAdapter`]: scripted answers for tests
//! - [`ReferenceAdapter`]: answers with each entry's reference solution
//! - [`ReplayAdapter`]: replays assistant turns from a results file

mod http;
mod mock;
mod provider;
mod replay;

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::tasks::TaskConfig;

pub use http::{HttpAdapter, HttpProviderConfig};
pub use mock::{MockAdapter, ReferenceAdapter, ScriptMode};
pub use provider::{build_request, parse_response, ProviderFamily, ProviderRequest};
pub use replay::ReplayAdapter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

/// Messages of one chat, oldest first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversation {
    pub messages: Vec<Message>,
}

impl Conversation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_user(content: impl Into<String>) -> Self {
        let mut c = Self::new();
        c.push(Role::User, content);
        c
    }

    pub fn push(&mut self, role: Role, content: impl Into<String>) {
        self.messages.push(Message {
            role,
            content: content.into(),
        });
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn system(&self) -> Option<&str> {
        self.messages
            .first()
            .filter(|m| m.role == Role::System)
            .map(|m| m.content.as_str())
    }

    /// Messages after the optional leading system message.
    pub fn turns(&self) -> &[Message] {
        let skip = usize::from(self.system().is_some());
        &self.messages[skip..]
    }

    pub fn total_chars(&self) -> usize {
        self.messages.iter().map(|m| m.content.chars().count()).sum()
    }

    /// Checks the shape a completion call needs: nonempty, user and
    /// assistant alternating after an optional system message, ending on a
    /// user message.
    pub fn check_ready(&self) -> Result<(), AdapterError> {
        let turns = self.turns();
        if turns.is_empty() {
            return Err(AdapterError::Config("conversation has no user message".into()));
        }
        for (i, m) in turns.iter().enumerate() {
            let expected = if i % 2 == 0 { Role::User } else { Role::Assistant };
            if m.role != expected {
                return Err(AdapterError::Config(format!(
                    "message {i} has role {}, expected {expected}",
                    m.role
                )));
            }
        }
        if turns.last().map(|m| m.role) != Some(Role::User) {
            return Err(AdapterError::Config("conversation must end with a user message".into()));
        }
        Ok(())
    }
}

/// Identifies the call being made, for adapters that key their answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallContext {
    pub model: String,
    pub task: String,
    pub entry_id: String,
    pub execution_index: usize,
    /// Zero-based index of the assistant answer being requested.
    pub turn_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdapterError {
    #[error("rate limited by provider after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("provider returned status {status}: {excerpt}")]
    ProviderError { status: u16, excerpt: String },
    #[error("mock script exhausted after {0} answers")]
    ScriptExhausted(usize),
    #[error("no recorded answer for {task}/{entry_id} execution {execution_index} turn {turn_index}")]
    ReplayMiss {
        task: String,
        entry_id: String,
        execution_index: usize,
        turn_index: usize,
    },
    #[error("prompt of {chars} characters exceeds the limit of {limit}")]
    PromptTooLarge { chars: usize, limit: usize },
    #[error("adapter configuration error: {0}")]
    Config(String),
}

/// A chat model that answers a conversation. Implementations must be safe
/// to share across sessions running on different threads.
pub trait ModelAdapter: Send + Sync {
    fn name(&self) -> &str;

    fn complete(&self, ctx: &CallContext, conversation: &Conversation) -> Result<String, AdapterError>;
}

/// Adapter settings as written in a run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AdapterConfig {
    /// Model name recorded with every session.
    pub name: String,
    #[serde(flatten)]
    pub kind: AdapterKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum AdapterKind {
    HttpProvider(HttpProviderConfig),
    #[serde(rename_all = "camelCase")]
    Mock {
        script: Vec<String>,
        #[serde(default)]
        mode: ScriptMode,
    },
    #[serde(rename_all = "camelCase")]
    Replay {
        results_file: PathBuf,
        /// Model whose turns are replayed; defaults to the adapter name.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source_model: Option<String>,
    },
    Reference,
}

impl AdapterConfig {
    /// Instantiates the adapter. Relative paths resolve against `base_dir`;
    /// the reference adapter needs the loaded tasks.
    pub fn build(&self, tasks: &[Arc<TaskConfig>], base_dir: &Path) -> Result<Arc<dyn ModelAdapter>, AdapterError> {
        Ok(match &self.kind {
            AdapterKind::HttpProvider(cfg) => {
                let mut cfg = cfg.clone();
                if let Some(log) = cfg.audit_log.as_mut() {
                    *log = base_dir.join(&*log);
                }
                Arc::new(HttpAdapter::new(self.name.clone(), cfg)?)
            }
            AdapterKind::Mock { script, mode } => Arc::new(MockAdapter::new(self.name.clone(), script.clone(), *mode)),
            AdapterKind::Replay {
                results_file,
                source_model,
            } => Arc::new(ReplayAdapter::load(
                self.name.clone(),
                &base_dir.join(results_file),
                source_model.clone(),
            )?),
            AdapterKind::Reference => Arc::new(ReferenceAdapter::from_tasks(self.name.clone(), tasks)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ready_conversations() {
        let mut c = Conversation::new();
        assert!(c.check_ready().is_err());
        c.push(Role::System, "be brief");
        assert!(c.check_ready().is_err());
        c.push(Role::User, "q");
        c.check_ready().unwrap();
        c.push(Role::Assistant, "a");
        assert!(c.check_ready().is_err());
        c.push(Role::User, "again");
        c.check_ready().unwrap();
        c.push(Role::User, "twice");
        assert!(c.check_ready().is_err());
        assert_eq!(c.system(), Some("be brief"));
    }

    #[test]
    fn config_json_shape() {
        let cfg: AdapterConfig =
            serde_json::from_str(r#"{"name":"m","kind":"mock","script":["A","B"],"mode":"perSession"}"#).unwrap();
        assert_eq!(
            cfg.kind,
            AdapterKind::Mock {
                script: vec!["A".into(), "B".into()],
                mode: ScriptMode::PerSession
            }
        );
        let cfg: AdapterConfig = serde_json::from_str(
            r#"{"name":"gpt","kind":"httpProvider","endpointUrl":"https://api.openai.com/v1/chat/completions",
                "modelName":"gpt-4o","apiKeyEnvVar":"OPENAI_API_KEY","requestsPerMinute":30,"maxRetries":3}"#,
        )
        .unwrap();
        match cfg.kind {
            AdapterKind::HttpProvider(h) => {
                assert_eq!(h.api_key_env_var, "OPENAI_API_KEY");
                assert_eq!(h.family(), ProviderFamily::OpenAi);
            }
            other => panic!("unexpected {other:?}"),
        }
        let cfg: AdapterConfig = serde_json::from_str(r#"{"name":"ref","kind":"reference"}"#).unwrap();
        assert_eq!(cfg.kind, AdapterKind::Reference);
    }
}
