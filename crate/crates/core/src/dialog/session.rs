use serde::{Deserialize, Serialize};

use super::extract::{extract_fenced_block, make_feedback, ExtractedQuery, FeedbackKind};
use super::DialogError;
use crate::kg_store::ExecError;
use crate::llm_adapters::{CallContext, Conversation, ModelAdapter, Role};
use crate::scoring::{
    answer_lines, score_answer_lines, score_sparql_query, AnswerScores, SparqlEvaluation, SparqlScores,
};
use crate::tasks::{render_prompt, TaskConfig, TaskEntry, TaskType};

/// Answers collected per query-task session: one initial try plus two corrections.
pub const MAX_ANSWERS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum TurnScores {
    Sparql(SparqlScores<f64>),
    Answer(AnswerScores<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Turn {
    pub role: Role,
    pub content: String,
    pub timestamp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extracted_query: Option<ExtractedQuery>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<TurnScores>,
    /// Syntax or execution error of the extracted query.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result_rows: Option<usize>,
}

impl Turn {
    fn user(content: String) -> Self {
        Turn {
            role: Role::User,
            content,
            timestamp: now(),
            extracted_query: None,
            scores: None,
            error: None,
            result_rows: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TerminationReason {
    ResultYielded,
    MaxAnswersReached,
    SingleTurnTask,
    AdapterError,
    /// The endpoint failed while executing an answer; no feedback is sent.
    EndpointError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DialogSession {
    pub task: String,
    pub task_type: TaskType,
    pub entry_id: String,
    pub execution_index: usize,
    pub model: String,
    pub started_at: String,
    pub turns: Vec<Turn>,
    pub termination_reason: TerminationReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl DialogSession {
    pub fn assistant_turns(&self) -> impl Iterator<Item = &Turn> {
        self.turns.iter().filter(|t| t.role == Role::Assistant)
    }

    /// The conversation as the model saw it.
    pub fn conversation(&self) -> Conversation {
        let mut c = Conversation::new();
        for t in &self.turns {
            c.push(t.role, t.content.clone());
        }
        c
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

struct SparqlTurn {
    extracted: ExtractedQuery,
    evaluation: SparqlEvaluation<f64>,
}

fn evaluate_sparql(config: &TaskConfig, entry: &TaskEntry, answer: &str) -> SparqlTurn {
    let extracted = extract_fenced_block(answer);
    let evaluation = score_sparql_query(
        &extracted.code,
        &entry.reference_query,
        &config.expected_values(entry),
        &config.source,
        &config.prefix_map,
    );
    SparqlTurn { extracted, evaluation }
}

fn sparql_turn(answer: String, scored: &SparqlTurn) -> Turn {
    let eval = &scored.evaluation;
    Turn {
        role: Role::Assistant,
        content: answer,
        timestamp: now(),
        extracted_query: Some(scored.extracted.clone()),
        scores: Some(TurnScores::Sparql(eval.scores)),
        error: eval
            .syntax_error
            .clone()
            .or_else(|| eval.execution_error.as_ref().map(ToString::to_string)),
        result_rows: Some(eval.result_rows),
    }
}

fn answer_turn(answer: String, scores: AnswerScores<f64>) -> Turn {
    Turn {
        role: Role::Assistant,
        content: answer,
        timestamp: now(),
        extracted_query: None,
        scores: Some(TurnScores::Answer(scores)),
        error: None,
        result_rows: None,
    }
}

fn start(
    config: &TaskConfig,
    entry: &TaskEntry,
    adapter: &dyn ModelAdapter,
    execution_index: usize,
) -> Result<(DialogSession, Conversation), DialogError> {
    let prompt = render_prompt(config, entry, config.kg_info()).map_err(|e| DialogError::Prompt(e.to_string()))?;
    let session = DialogSession {
        task: config.name.clone(),
        task_type: config.task_type,
        entry_id: entry.id.clone(),
        execution_index,
        model: adapter.name().to_owned(),
        started_at: now(),
        turns: vec![Turn::user(prompt.clone())],
        termination_reason: TerminationReason::SingleTurnTask,
        error: None,
    };
    Ok((session, Conversation::with_user(prompt)))
}

fn call_context(session: &DialogSession, turn_index: usize) -> CallContext {
    CallContext {
        model: session.model.clone(),
        task: session.task.clone(),
        entry_id: session.entry_id.clone(),
        execution_index: session.execution_index,
        turn_index,
    }
}

/// Runs a query task with up to [`MAX_ANSWERS`] answers. The loop stops at
/// the first answer whose query returns rows; otherwise a syntax error or
/// empty result produces a feedback message and the whole conversation is
/// sent again.
pub fn run_sparql_session(
    config: &TaskConfig,
    entry: &TaskEntry,
    adapter: &dyn ModelAdapter,
    execution_index: usize,
) -> Result<DialogSession, DialogError> {
    if !config.task_type.feedback_enabled() {
        return Err(DialogError::WrongTaskType {
            task: config.name.clone(),
            actual: config.task_type,
            expected: "SSF or T2S",
        });
    }
    let (mut session, mut conversation) = start(config, entry, adapter, execution_index)?;
    for k in 0..MAX_ANSWERS {
        let answer = match adapter.complete(&call_context(&session, k), &conversation) {
            Ok(a) => a,
            Err(e) => {
                session.termination_reason = TerminationReason::AdapterError;
                session.error = Some(e.to_string());
                break;
            }
        };
        let scored = evaluate_sparql(config, entry, &answer);
        conversation.push(Role::Assistant, answer.clone());
        session.turns.push(sparql_turn(answer, &scored));

        let eval = &scored.evaluation;
        if eval.yielded_result() {
            session.termination_reason = TerminationReason::ResultYielded;
            break;
        }
        if let Some(err @ (ExecError::Endpoint(_) | ExecError::Timeout(_))) = &eval.execution_error {
            session.termination_reason = TerminationReason::EndpointError;
            session.error = Some(err.to_string());
            break;
        }
        if k + 1 == MAX_ANSWERS {
            session.termination_reason = TerminationReason::MaxAnswersReached;
            break;
        }
        let kind = match &eval.syntax_error {
            Some(message) => FeedbackKind::SyntaxError(message.clone()),
            None => FeedbackKind::EmptyResult,
        };
        let feedback = make_feedback(&kind, &scored.extracted.code);
        conversation.push(Role::User, feedback.clone());
        session.turns.push(Turn::user(feedback));
    }
    Ok(session)
}

/// Runs an answer task: one prompt, one answer scored line by line.
pub fn run_answer_session(
    config: &TaskConfig,
    entry: &TaskEntry,
    adapter: &dyn ModelAdapter,
    execution_index: usize,
) -> Result<DialogSession, DialogError> {
    if config.task_type.feedback_enabled() {
        return Err(DialogError::WrongTaskType {
            task: config.name.clone(),
            actual: config.task_type,
            expected: "S2A or T2A",
        });
    }
    let (mut session, conversation) = start(config, entry, adapter, execution_index)?;
    match adapter.complete(&call_context(&session, 0), &conversation) {
        Ok(answer) => {
            let scores = score_answer_lines(&answer_lines(&answer), &entry.expected);
            session.turns.push(answer_turn(answer, scores));
            session.termination_reason = TerminationReason::SingleTurnTask;
        }
        Err(e) => {
            session.termination_reason = TerminationReason::AdapterError;
            session.error = Some(e.to_string());
        }
    }
    Ok(session)
}

/// Runs whichever session kind the task needs.
pub fn run_session(
    config: &TaskConfig,
    entry: &TaskEntry,
    adapter: &dyn ModelAdapter,
    execution_index: usize,
) -> Result<DialogSession, DialogError> {
    if config.task_type.feedback_enabled() {
        run_sparql_session(config, entry, adapter, execution_index)
    } else {
        run_answer_session(config, entry, adapter, execution_index)
    }
}

/// Recomputes extraction and scores of every assistant turn with the
/// current scoring code. Contents, timestamps and the termination reason
/// are kept.
pub fn rescore_session(config: &TaskConfig, session: &DialogSession) -> Result<DialogSession, DialogError> {
    let entry = config
        .entry(&session.entry_id)
        .ok_or_else(|| DialogError::UnknownEntry {
            task: config.name.clone(),
            entry: session.entry_id.clone(),
        })?;
    let mut out = session.clone();
    for turn in out.turns.iter_mut().filter(|t| t.role == Role::Assistant) {
        let rescored = if config.task_type.expects_query() {
            sparql_turn(turn.content.clone(), &evaluate_sparql(config, entry, &turn.content))
        } else {
            answer_turn(
                turn.content.clone(),
                score_answer_lines(&answer_lines(&turn.content), &entry.expected),
            )
        };
        *turn = Turn {
            timestamp: std::mem::take(&mut turn.timestamp),
            ..rescored
        };
    }
    Ok(out)
}
