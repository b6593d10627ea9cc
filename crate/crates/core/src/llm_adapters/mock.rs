use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{AdapterError, CallContext, Conversation, ModelAdapter};
use crate::tasks::TaskConfig;

/// How a mock picks its next script entry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ScriptMode {
    /// One shared cursor: entries are returned in call order.
    #[default]
    Sequential,
    /// Entry `k` answers the `k`-th turn of every session, which keeps
    /// concurrent runs deterministic.
    PerSession,
}

pub struct MockAdapter {
    name: String,
    script: Vec<String>,
    mode: ScriptMode,
    cursor: Mutex<usize>,
}

impl MockAdapter {
    pub fn new(name: impl Into<String>, script: Vec<String>, mode: ScriptMode) -> Self {
        Self {
            name: name.into(),
            script,
            mode,
            cursor: Mutex::new(0),
        }
    }

    pub fn sequential<S: Into<String>>(name: impl Into<String>, script: impl IntoIterator<Item = S>) -> Self {
        Self::new(
            name,
            script.into_iter().map(Into::into).collect(),
            ScriptMode::Sequential,
        )
    }

    pub fn per_session<S: Into<String>>(name: impl Into<String>, script: impl IntoIterator<Item = S>) -> Self {
        Self::new(
            name,
            script.into_iter().map(Into::into).collect(),
            ScriptMode::PerSession,
        )
    }
}

impl ModelAdapter for MockAdapter {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, ctx: &CallContext, conversation: &Conversation) -> Result<String, AdapterError> {
        conversation.check_ready()?;
        let idx = match self.mode {
            ScriptMode::PerSession => ctx.turn_index,
            ScriptMode::Sequential => {
                let mut cursor = self.cursor.lock().unwrap_or_else(|e| e.into_inner());
                let idx = *cursor;
                if idx < self.script.len() {
                    *cursor += 1;
                }
                idx
            }
        };
        self.script
            .get(idx)
            .cloned()
            .ok_or(AdapterError::ScriptExhausted(self.script.len()))
    }
}

/// Answers every prompt with the entry's reference solution: the reference
/// query in a fenced block for query tasks, the expected lines otherwise.
pub struct ReferenceAdapter {
    name: String,
    answers: HashMap<(String, String), String>,
}

impl ReferenceAdapter {
    pub fn from_tasks(name: impl Into<String>, tasks: &[Arc<TaskConfig>]) -> Self {
        let mut answers = HashMap::new();
        for task in tasks {
            for entry in &task.entries {
                let answer = if task.task_type.expects_query() {
                    format!("```sparql\n{}\n```", entry.reference_query.trim())
                } else {
                    entry
                        .expected
                        .alternatives()
                        .first()
                        .cloned()
                        .unwrap_or_default()
                        .join("\n")
                };
                answers.insert((task.name.clone(), entry.id.clone()), answer);
            }
        }
        Self {
            name: name.into(),
            answers,
        }
    }
}

impl ModelAdapter for ReferenceAdapter {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, ctx: &CallContext, conversation: &Conversation) -> Result<String, AdapterError> {
        conversation.check_ready()?;
        self.answers
            .get(&(ctx.task.clone(), ctx.entry_id.clone()))
            .cloned()
            .ok_or_else(|| AdapterError::Config(format!("no reference answer for {}/{}", ctx.task, ctx.entry_id)))
    }
}
