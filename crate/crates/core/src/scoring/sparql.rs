use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::prf::{combined, set_prf, Prf};
use crate::kg_store::{
    execute_select, extract_query_iris, validate_select, ExecError, GraphSource, RdfTerm, ResultTable, TermKind,
};
use crate::Scalar;

/// Scores for one SPARQL answer.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SparqlScores<F> {
    pub answer_parse: F,
    pub result_set: Prf<F>,
    pub sparql_iris: Prf<F>,
    pub sparql_iri_suffix: Prf<F>,
    pub combined: F,
}

/// Scores plus what happened while producing them.
#[derive(Debug, Clone, PartialEq)]
pub struct SparqlEvaluation<F> {
    pub scores: SparqlScores<F>,
    pub syntax_error: Option<String>,
    pub execution_error: Option<ExecError>,
    /// Number of rows returned; zero when parsing or execution failed.
    pub result_rows: usize,
}

impl<F> SparqlEvaluation<F> {
    pub fn yielded_result(&self) -> bool {
        self.result_rows > 0
    }
}

/// Pools every bound cell of every row into one set of canonical strings.
///
/// IRIs are kept as-is and literals contribute their lexical form. Blank
/// node labels are replaced by `_:b0`, `_:b1`, ... numbered by first
/// appearance over the rows in canonical order, so only the pattern of
/// blank nodes matters, never their labels.
pub fn flatten_result_set(table: &ResultTable) -> BTreeSet<String> {
    let masked = |row: &BTreeMap<String, RdfTerm>| -> Vec<(String, String)> {
        row.iter()
            .map(|(var, term)| {
                let value = if term.is_blank() {
                    "_:".to_owned()
                } else {
                    term.lexical.clone()
                };
                (var.clone(), value)
            })
            .collect()
    };
    let mut rows: Vec<&BTreeMap<String, RdfTerm>> = table.rows.iter().collect();
    rows.sort_by_cached_key(|row| masked(row));

    let mut blank_ids: HashMap<&str, usize> = HashMap::new();
    let mut out = BTreeSet::new();
    for row in rows {
        for term in row.values() {
            let value = match term.kind {
                TermKind::BlankNode => {
                    let next = blank_ids.len();
                    let id = *blank_ids.entry(term.lexical.as_str()).or_insert(next);
                    format!("_:b{id}")
                }
                _ => term.lexical.clone(),
            };
            out.insert(value);
        }
    }
    out
}

/// Last path or fragment segment of an IRI: the part after the last `#`,
/// else after the last `/`, else the IRI itself.
pub fn iri_suffix(iri: &str) -> &str {
    if let Some(pos) = iri.rfind('#') {
        &iri[pos + 1..]
    } else if let Some(pos) = iri.rfind('/') {
        &iri[pos + 1..]
    } else {
        iri
    }
}

/// Scores a model's query against the reference query and the expected
/// (flattened) reference result.
///
/// Execution failures score the result set as zero and are reported in
/// `execution_error`, separately from syntax failures.
pub fn score_sparql_query<F: Scalar>(
    given_query: &str,
    reference_query: &str,
    expected: &BTreeSet<String>,
    source: &GraphSource,
    prefix_map: &BTreeMap<String, String>,
) -> SparqlEvaluation<F> {
    let reference_iris = extract_query_iris(reference_query, prefix_map).unwrap_or_default();
    let reference_suffixes: BTreeSet<String> = reference_iris.iter().map(|i| iri_suffix(i).to_owned()).collect();

    let parsed = match validate_select(given_query, prefix_map) {
        Ok(parsed) => parsed,
        Err(err) => {
            let empty = BTreeSet::<String>::new();
            let scores = SparqlScores {
                answer_parse: F::zero(),
                result_set: Prf::zero(),
                sparql_iris: set_prf(&empty, &reference_iris),
                sparql_iri_suffix: set_prf(&empty, &reference_suffixes),
                combined: combined(false, F::zero()),
            };
            return SparqlEvaluation {
                scores,
                syntax_error: Some(err.message),
                execution_error: None,
                result_rows: 0,
            };
        }
    };

    let given_iris = extract_query_iris(given_query, prefix_map).unwrap_or_default();
    let given_suffixes: BTreeSet<String> = given_iris.iter().map(|i| iri_suffix(i).to_owned()).collect();

    let (result_set, execution_error, result_rows) = match execute_select(&parsed, source) {
        Ok(table) => (set_prf(&flatten_result_set(&table), expected), None, table.len()),
        Err(err) => (Prf::zero(), Some(err), 0),
    };
    SparqlEvaluation {
        scores: SparqlScores {
            answer_parse: F::one(),
            result_set,
            sparql_iris: set_prf(&given_iris, &reference_iris),
            sparql_iri_suffix: set_prf(&given_suffixes, &reference_suffixes),
            combined: combined(true, result_set.f1),
        },
        syntax_error: None,
        execution_error,
        result_rows,
    }
}
