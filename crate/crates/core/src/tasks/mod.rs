//! Task types, dataset files, prompt rendering and entry scheduling.

mod config;
mod prompt;
mod types;

pub use config::{
    prepare_kg_info, select_entry, verify_entry, SourceSpec, TaskConfig, TaskConfigFile, ENTRIES_PER_TASK,
};
pub use prompt::{
    common_prefixes, render_prompt, render_template, template_for, S2A_TEMPLATE, SSF_TEMPLATE, T2A_TEMPLATE,
    T2S_TEMPLATE,
};
pub use types::{Aspect, AspectTags, KgInfoKind, Serialization, TaskAspect, TaskEntry, TaskType};

use crate::kg_store::KgError;

#[derive(Debug, thiserror::Error)]
pub enum TaskError {
    #[error("entry {entry} is missing required field {field}")]
    MissingField { entry: String, field: &'static str },
    #[error("invalid task: {0}")]
    Invalid(String),
    #[error("template error: {0}")]
    Template(String),
    #[error("unknown aspect {0:?}")]
    UnknownAspect(String),
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("invalid dataset file: {0}")]
    Json(String),
}
