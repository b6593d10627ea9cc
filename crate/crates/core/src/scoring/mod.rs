//! Result-set, query-IRI and answer-line scoring.

mod answer;
mod prf;
mod sparql;

pub use answer::{answer_lines, normalize_line, normalize_lines, score_answer_lines, AnswerScores, Expectation, Stage};
pub use prf::{combined, set_prf, Prf};
pub use sparql::{flatten_result_set, iri_suffix, score_sparql_query, SparqlEvaluation, SparqlScores};
