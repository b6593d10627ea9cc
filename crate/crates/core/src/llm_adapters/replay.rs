use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use serde_json::Value;

use super::{AdapterError, CallContext, Conversation, ModelAdapter, Role};
use crate::dialog::DialogSession;

type SessionKey = (String, String, String, usize);

/// Answers with the assistant turns stored in a results file, keyed by
/// model, task, entry and execution index.
pub struct ReplayAdapter {
    name: String,
    source_model: String,
    answers: HashMap<SessionKey, Vec<String>>,
}

impl ReplayAdapter {
    /// Reads every line of a results file that carries a `session` object.
    /// Lines that do not parse are skipped with a warning.
    pub fn load(name: impl Into<String>, path: &Path, source_model: Option<String>) -> Result<Self, AdapterError> {
        let file = std::fs::File::open(path).map_err(|e| AdapterError::Config(format!("{}: {e}", path.display())))?;
        let mut sessions = Vec::new();
        for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| AdapterError::Config(format!("{}: {e}", path.display())))?;
            if line.trim().is_empty() {
                continue;
            }
            let session = serde_json::from_str::<Value>(&line)
                .ok()
                .and_then(|mut v| v.get_mut("session").map(Value::take))
                .and_then(|v| serde_json::from_value::<DialogSession>(v).ok());
            match session {
                Some(s) => sessions.push(s),
                None => log::warn!("{}:{}: no readable session, skipped", path.display(), n + 1),
            }
        }
        Ok(Self::from_sessions(name, sessions, source_model))
    }

    pub fn from_sessions(
        name: impl Into<String>,
        sessions: impl IntoIterator<Item = DialogSession>,
        source_model: Option<String>,
    ) -> Self {
        let name = name.into();
        let answers = sessions
            .into_iter()
            .map(|s| {
                let turns = s
                    .turns
                    .iter()
                    .filter(|t| t.role == Role::Assistant)
                    .map(|t| t.content.clone())
                    .collect();
                ((s.model, s.task, s.entry_id, s.execution_index), turns)
            })
            .collect();
        Self {
            source_model: source_model.unwrap_or_else(|| name.clone()),
            name,
            answers,
        }
    }

    pub fn session_count(&self) -> usize {
        self.answers.len()
    }
}

impl ModelAdapter for ReplayAdapter {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, ctx: &CallContext, conversation: &Conversation) -> Result<String, AdapterError> {
        conversation.check_ready()?;
        let key = (
            self.source_model.clone(),
            ctx.task.clone(),
            ctx.entry_id.clone(),
            ctx.execution_index,
        );
        self.answers
            .get(&key)
            .and_then(|turns| turns.get(ctx.turn_index))
            .cloned()
            .ok_or_else(|| AdapterError::ReplayMiss {
                task: ctx.task.clone(),
                entry_id: ctx.entry_id.clone(),
                execution_index: ctx.execution_index,
                turn_index: ctx.turn_index,
            })
    }
}
