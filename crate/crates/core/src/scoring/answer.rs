use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::prf::Prf;
use crate::Scalar;

/// Answer comparison stages, from strictest to most lenient. Each stage
/// applies all transforms of the previous one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Stage {
    Exact,
    Trimmed,
    Fixed,
    Relaxed,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Exact, Stage::Trimmed, Stage::Fixed, Stage::Relaxed];
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Exact => "exact",
            Stage::Trimmed => "trimmed",
            Stage::Fixed => "fixed",
            Stage::Relaxed => "relaxed",
        })
    }
}

/// What a correct answer looks like.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Expectation {
    ValueSet {
        values: Vec<String>,
    },
    /// A number; at the relaxed stage a list of `n` values is accepted too.
    Count {
        n: u64,
    },
    /// Several acceptable answers (e.g. IRIs or labels); the best one counts.
    AnyOf {
        alternatives: Vec<Vec<String>>,
    },
}

impl Expectation {
    pub fn values(values: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Expectation::ValueSet {
            values: values.into_iter().map(Into::into).collect(),
        }
    }

    /// The expected answer lines for each alternative.
    pub fn alternatives(&self) -> Vec<Vec<String>> {
        match self {
            Expectation::ValueSet { values } => vec![values.clone()],
            Expectation::Count { n } => vec![vec![n.to_string()]],
            Expectation::AnyOf { alternatives } => alternatives.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnswerScores<F> {
    pub exact: Prf<F>,
    pub trimmed: Prf<F>,
    pub fixed: Prf<F>,
    pub relaxed: Prf<F>,
    pub combined_f1: F,
}

impl<F: Scalar> AnswerScores<F> {
    pub fn stage(&self, stage: Stage) -> Prf<F> {
        match stage {
            Stage::Exact => self.exact,
            Stage::Trimmed => self.trimmed,
            Stage::Fixed => self.fixed,
            Stage::Relaxed => self.relaxed,
        }
    }

    fn from_stages(stages: [Prf<F>; 4]) -> Self {
        let combined_f1 = stages.iter().fold(F::zero(), |acc, p| acc + p.f1) / F::lit(4.0);
        let [exact, trimmed, fixed, relaxed] = stages;
        AnswerScores {
            exact,
            trimmed,
            fixed,
            relaxed,
            combined_f1,
        }
    }
}

pub fn normalize_line(line: &str, stage: Stage) -> String {
    match stage {
        Stage::Exact => line.to_owned(),
        Stage::Trimmed => line.trim().to_owned(),
        Stage::Fixed => {
            let trimmed = normalize_line(line, Stage::Trimmed);
            let unquoted: String = trimmed
                .replace("https://", "http://")
                .chars()
                .filter(|c| !matches!(c, '<' | '>' | '\'' | '"'))
                .collect();
            let unquoted = unquoted.trim();
            match unquoted.strip_prefix("0:") {
                Some(local) => format!(":{local}"),
                None => unquoted.to_owned(),
            }
        }
        Stage::Relaxed => {
            let fixed = normalize_line(line, Stage::Fixed).to_lowercase();
            match fixed.strip_prefix(':') {
                Some(local) => local.to_owned(),
                None => fixed,
            }
        }
    }
}

pub fn normalize_lines(lines: &[String], stage: Stage) -> Vec<String> {
    lines.iter().map(|l| normalize_line(l, stage)).collect()
}

/// Splits a model answer into value lines, dropping blank lines.
pub fn answer_lines(answer: &str) -> Vec<String> {
    answer
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_owned)
        .collect()
}

/// Compares distinct given lines with distinct expected lines at one stage.
///
/// A given line counts toward precision when its normalized form matches
/// some normalized expected line, and vice versa for recall. At the exact
/// stage this is plain set comparison; counting per original line keeps
/// every score monotone across stages.
fn stage_prf<F: Scalar>(given: &BTreeSet<&str>, expected: &BTreeSet<&str>, stage: Stage) -> Prf<F> {
    let norm_given: BTreeSet<String> = given.iter().map(|l| normalize_line(l, stage)).collect();
    let norm_expected: BTreeSet<String> = expected.iter().map(|l| normalize_line(l, stage)).collect();
    let given_hits = given
        .iter()
        .filter(|l| norm_expected.contains(&normalize_line(l, stage)))
        .count();
    let expected_hits = expected
        .iter()
        .filter(|l| norm_given.contains(&normalize_line(l, stage)))
        .count();
    Prf::from_counts(given_hits, given.len(), expected_hits, expected.len())
}

fn score_alternative<F: Scalar>(given: &[String], expected: &[String]) -> [Prf<F>; 4] {
    let given: BTreeSet<&str> = given.iter().map(String::as_str).collect();
    let expected: BTreeSet<&str> = expected.iter().map(String::as_str).collect();
    Stage::ALL.map(|stage| stage_prf(&given, &expected, stage))
}

/// Scores answer lines at every stage.
///
/// For a count expectation, a relaxed-stage answer listing exactly `n`
/// values is accepted, unless it is a single number (a wrong count).
pub fn score_answer_lines<F: Scalar>(given: &[String], expectation: &Expectation) -> AnswerScores<F> {
    let mut best: Option<[Prf<F>; 4]> = None;
    for alternative in expectation.alternatives() {
        let stages = score_alternative::<F>(given, &alternative);
        best = Some(match best {
            None => stages,
            Some(current) => {
                let mut merged = current;
                for (slot, candidate) in merged.iter_mut().zip(stages) {
                    if candidate.f1 > slot.f1 {
                        *slot = candidate;
                    }
                }
                merged
            }
        });
    }
    let mut stages = best.unwrap_or_else(|| score_alternative(given, &[]));

    if let Expectation::Count { n } = expectation {
        let single_number = given.len() == 1 && given[0].trim().parse::<f64>().is_ok();
        if given.len() as u64 == *n && !single_number {
            stages[3] = Prf::perfect();
        }
    }
    AnswerScores::from_stages(stages)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lines(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn ladder_examples() {
        assert_eq!(normalize_lines(&lines(&["  :Alice "]), Stage::Trimmed), [":Alice"]);
        assert_eq!(
            normalize_lines(&lines(&["<https://ex.org/a>"]), Stage::Fixed),
            ["http://ex.org/a"]
        );
        assert_eq!(normalize_lines(&lines(&["0:Alice"]), Stage::Fixed), [":Alice"]);
        assert_eq!(normalize_lines(&lines(&["\"Anne\""]), Stage::Fixed), ["Anne"]);
        assert_eq!(normalize_lines(&lines(&[" :Alice"]), Stage::Relaxed), ["alice"]);
        assert_eq!(normalize_lines(&lines(&[" x "]), Stage::Exact), [" x "]);
    }

    #[test]
    fn identical_answers_perfect() {
        let s: AnswerScores<f64> = score_answer_lines(&lines(&[":a", ":b"]), &Expectation::values([":a", ":b"]));
        for stage in Stage::ALL {
            assert_eq!(s.stage(stage), Prf::perfect());
        }
        assert_eq!(s.combined_f1, 1.0);
    }

    #[test]
    fn right_length_list_accepted_for_count() {
        let s: AnswerScores<f64> = score_answer_lines(&lines(&[":a", ":b", ":c"]), &Expectation::Count { n: 3 });
        assert_eq!(s.exact.f1, 0.0);
        assert_eq!(s.trimmed.f1, 0.0);
        assert_eq!(s.fixed.f1, 0.0);
        assert_eq!(s.relaxed, Prf::perfect());
        assert_eq!(s.combined_f1, 0.25);
    }

    #[test]
    fn wrong_count_scores_zero() {
        let s: AnswerScores<f64> = score_answer_lines(&lines(&["4"]), &Expectation::Count { n: 3 });
        assert_eq!(s.combined_f1, 0.0);
        let s: AnswerScores<f64> = score_answer_lines(&lines(&["2"]), &Expectation::Count { n: 1 });
        assert_eq!(s.relaxed.f1, 0.0);
        let s: AnswerScores<f64> = score_answer_lines(&lines(&["3"]), &Expectation::Count { n: 3 });
        assert_eq!(s.combined_f1, 1.0);
    }

    #[test]
    fn case_and_whitespace_only_at_relaxed() {
        let s: AnswerScores<f64> = score_answer_lines(&lines(&["  X "]), &Expectation::values(["x"]));
        assert_eq!(s.exact.f1, 0.0);
        assert_eq!(s.trimmed.f1, 0.0);
        assert_eq!(s.fixed.f1, 0.0);
        assert_eq!(s.relaxed, Prf::perfect());
    }

    #[test]
    fn any_of_takes_best_alternative_per_stage() {
        let exp = Expectation::AnyOf {
            alternatives: vec![lines(&["http://www.wikidata.org/entity/Q64"]), lines(&["Berlin"])],
        };
        let s: AnswerScores<f64> = score_answer_lines(&lines(&["berlin"]), &exp);
        assert_eq!(s.exact.f1, 0.0);
        assert_eq!(s.relaxed.f1, 1.0);
        let s: AnswerScores<f64> = score_answer_lines(&lines(&["<https://www.wikidata.org/entity/Q64>"]), &exp);
        assert_eq!(s.fixed.f1, 1.0);
    }

    #[test]
    fn blank_lines_dropped_when_splitting() {
        assert_eq!(answer_lines(":a\n\n  \n:b\n"), [":a", ":b"]);
        assert!(answer_lines("").is_empty());
    }

    #[test]
    fn expectation_json_shape() {
        let e: Expectation = serde_json::from_str(r#"{"kind":"count","n":4}"#).unwrap();
        assert_eq!(e, Expectation::Count { n: 4 });
        let e: Expectation = serde_json::from_str(r#"{"kind":"anyOf","alternatives":[["a"],["b"]]}"#).unwrap();
        assert_eq!(e.alternatives().len(), 2);
    }
}
