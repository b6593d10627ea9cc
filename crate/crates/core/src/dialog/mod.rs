//! One benchmark execution: prompt, answer extraction, scoring and the
//! corrective feedback loop for query tasks.

mod extract;
mod session;

pub use extract::{extract_fenced_block, make_feedback, ExtractedQuery, FeedbackKind, EMPTY_RESULT_FEEDBACK};
pub use session::{
    rescore_session, run_answer_session, run_session, run_sparql_session, DialogSession, TerminationReason, Turn,
    TurnScores, MAX_ANSWERS,
};

use crate::tasks::TaskType;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DialogError {
    #[error("task {task} is {actual}, this session kind needs {expected}")]
    WrongTaskType {
        task: String,
        actual: TaskType,
        expected: &'static str,
    },
    #[error("task {task} has no entry {entry}")]
    UnknownEntry { task: String, entry: String },
    #[error("cannot build prompt: {0}")]
    Prompt(String),
}
