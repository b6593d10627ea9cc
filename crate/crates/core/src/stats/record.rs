use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dialog::{DialogSession, TurnScores};
use crate::scoring::{AnswerScores, SparqlScores};
use crate::tasks::{AspectTags, TaskType};

/// Per-turn base score names for query tasks, in report order.
pub const SPARQL_BASE_SCORES: [&str; 12] = [
    "answerParse",
    "f1measure",
    "precision",
    "recall",
    "sparqlIrisF1measure",
    "sparqlIrisPrecision",
    "sparqlIrisRecall",
    "sparqlIriSuffixF1measure",
    "sparqlIriSuffixPrecision",
    "sparqlIriSuffixRecall",
    "combined",
    "wellFormedAnswer",
];

/// Score names for answer tasks, in report order.
pub const ANSWER_SCORES: [&str; 13] = [
    "f1",
    "precision",
    "recall",
    "trimF1",
    "trimPrecision",
    "trimRecall",
    "fixedF1",
    "fixedPrecision",
    "fixedRecall",
    "relaxedF1",
    "relaxedPrecision",
    "relaxedRecall",
    "combinedF1",
];

/// Aggregate prefixes computed over all answers of a session.
pub const AGGREGATE_PREFIXES: [&str; 3] = ["last_", "mean_", "max_"];

/// Named score values of one session plus where they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScoreRecord {
    pub values: BTreeMap<String, f64>,
    pub model: String,
    pub task: String,
    pub task_type: TaskType,
    pub entry_id: String,
    pub execution_index: usize,
    pub timestamp: String,
    #[serde(default)]
    pub aspects: AspectTags,
}

impl ScoreRecord {
    pub fn with_aspects(mut self, aspects: AspectTags) -> Self {
        self.aspects = aspects;
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

fn sparql_values(s: &SparqlScores<f64>, well_formed: bool) -> [f64; 12] {
    [
        s.answer_parse,
        s.result_set.f1,
        s.result_set.precision,
        s.result_set.recall,
        s.sparql_iris.f1,
        s.sparql_iris.precision,
        s.sparql_iris.recall,
        s.sparql_iri_suffix.f1,
        s.sparql_iri_suffix.precision,
        s.sparql_iri_suffix.recall,
        s.combined,
        if well_formed { 1.0 } else { 0.0 },
    ]
}

fn answer_values(s: &AnswerScores<f64>) -> [f64; 13] {
    [
        s.exact.f1,
        s.exact.precision,
        s.exact.recall,
        s.trimmed.f1,
        s.trimmed.precision,
        s.trimmed.recall,
        s.fixed.f1,
        s.fixed.precision,
        s.fixed.recall,
        s.relaxed.f1,
        s.relaxed.precision,
        s.relaxed.recall,
        s.combined_f1,
    ]
}

/// Names every score of a session.
///
/// Query tasks get `k_X` for each answer `k` (zero-based) and the
/// aggregates `last_X`, `mean_X`, `max_X` over the answers present.
/// Answer tasks have a single answer and use the unprefixed names. A
/// session without scored answers yields no values.
pub fn prefix_scores(session: &DialogSession) -> ScoreRecord {
    let mut values = BTreeMap::new();
    let mut per_turn: Vec<Vec<f64>> = Vec::new();
    for turn in session.assistant_turns() {
        match &turn.scores {
            Some(TurnScores::Sparql(s)) => {
                let well_formed = turn.extracted_query.as_ref().is_some_and(|q| q.well_formed);
                per_turn.push(sparql_values(s, well_formed).to_vec());
            }
            Some(TurnScores::Answer(s)) => {
                values.extend(
                    ANSWER_SCORES
                        .iter()
                        .zip(answer_values(s))
                        .map(|(k, v)| (k.to_string(), v)),
                );
            }
            None => {}
        }
    }
    if !per_turn.is_empty() {
        for (k, turn_values) in per_turn.iter().enumerate() {
            for (name, v) in SPARQL_BASE_SCORES.iter().zip(turn_values) {
                values.insert(format!("{k}_{name}"), *v);
            }
        }
        let n = per_turn.len() as f64;
        for (i, name) in SPARQL_BASE_SCORES.iter().enumerate() {
            let column = per_turn.iter().map(|t| t[i]);
            let last = per_turn[per_turn.len() - 1][i];
            let mean = column.clone().sum::<f64>() / n;
            let max = column.fold(f64::NEG_INFINITY, f64::max);
            values.insert(format!("last_{name}"), last);
            values.insert(format!("mean_{name}"), mean);
            values.insert(format!("max_{name}"), max);
        }
    }
    ScoreRecord {
        values,
        model: session.model.clone(),
        task: session.task.clone(),
        task_type: session.task_type,
        entry_id: session.entry_id.clone(),
        execution_index: session.execution_index,
        timestamp: session.started_at.clone(),
        aspects: AspectTags::default(),
    }
}

/// The per-answer values of one base score, in answer order.
pub fn per_turn_values(record: &ScoreRecord, base: &str) -> Vec<f64> {
    (0..)
        .map_while(|k| record.values.get(&format!("{k}_{base}")).copied())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialog::{ExtractedQuery, TerminationReason, Turn};
    use crate::llm_adapters::Role;
    use crate::scoring::Prf;

    fn sparql_turn(parse: f64, f1: f64) -> Turn {
        let prf = Prf {
            precision: f1,
            recall: f1,
            f1,
        };
        Turn {
            role: Role::Assistant,
            content: String::new(),
            timestamp: String::new(),
            extracted_query: Some(ExtractedQuery {
                code: String::new(),
                well_formed: true,
            }),
            scores: Some(TurnScores::Sparql(SparqlScores {
                answer_parse: parse,
                result_set: prf,
                sparql_iris: prf,
                sparql_iri_suffix: prf,
                combined: 0.2 * parse + 0.8 * f1,
            })),
            error: None,
            result_rows: None,
        }
    }

    fn session(turns: Vec<Turn>) -> DialogSession {
        DialogSession {
            task: "t".into(),
            task_type: TaskType::T2s,
            entry_id: "e".into(),
            execution_index: 0,
            model: "m".into(),
            started_at: "now".into(),
            turns,
            termination_reason: TerminationReason::MaxAnswersReached,
            error: None,
        }
    }

    #[test]
    fn single_turn_all_aggregates_equal() {
        let r = prefix_scores(&session(vec![sparql_turn(1.0, 1.0)]));
        for key in ["0_combined", "last_combined", "mean_combined", "max_combined"] {
            assert_eq!(r.get(key), Some(1.0), "{key}");
        }
        assert!(r.get("1_combined").is_none());
    }

    #[test]
    fn two_turn_f1_aggregates() {
        let r = prefix_scores(&session(vec![sparql_turn(1.0, 0.0), sparql_turn(1.0, 0.8)]));
        assert!((r.get("mean_f1measure").unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(r.get("max_f1measure"), Some(0.8));
        assert_eq!(r.get("last_f1measure"), Some(0.8));
    }

    #[test]
    fn three_turn_parse_aggregates() {
        let r = prefix_scores(&session(vec![
            sparql_turn(0.0, 0.0),
            sparql_turn(1.0, 0.0),
            sparql_turn(1.0, 1.0),
        ]));
        assert_eq!(r.get("0_answerParse"), Some(0.0));
        assert_eq!(r.get("2_answerParse"), Some(1.0));
        assert!((r.get("mean_answerParse").unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(per_turn_values(&r, "answerParse"), vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn no_answers_no_values() {
        assert!(prefix_scores(&session(vec![])).values.is_empty());
    }
}
