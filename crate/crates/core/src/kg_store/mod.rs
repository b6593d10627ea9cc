//! RDF graphs: loading, serialization, SELECT evaluation and the
//! knowledge-graph views embedded into prompts.

mod exec;
mod graph;
mod sparql;
mod term;
mod view;

pub use exec::{
    execute_select, parse_sparql_json, ExecError, GraphSource, RemoteEndpoint, ResultTable,
    DEFAULT_ENDPOINT_CONCURRENCY, DEFAULT_ENDPOINT_TIMEOUT,
};
pub use graph::{
    compact_iri, is_isomorphic, load_graph, serialize_graph, triples_isomorphic, GraphFormat, KnowledgeGraph,
    JSONLD_DEFAULT_PREFIX, RDF_TYPE,
};
pub use sparql::{extract_query_iris, validate_select, ParsedQuery, SyntaxError};
pub use term::{RdfTerm, TermKind, Triple};
pub use view::{
    derive_kg_view, iri_list, label_rows, render_label_table, schema_triples, KgView, ViewFormat, ViewKind, ViewSpec,
    RDFS_LABEL,
};

#[derive(Debug, thiserror::Error)]
pub enum KgError {
    #[error("{format} parse error{}: {message}", position(*.line, *.column))]
    Parse {
        format: GraphFormat,
        line: Option<u64>,
        column: Option<u64>,
        message: String,
    },
    #[error("invalid RDF term: {0}")]
    InvalidTerm(String),
    #[error("unknown graph format {0:?}")]
    UnknownFormat(String),
    #[error("unsupported view {kind:?}/{format:?}: {reason}")]
    UnsupportedView {
        kind: ViewKind,
        format: ViewFormat,
        reason: String,
    },
    #[error("store error: {0}")]
    Store(String),
    #[error("i/o error: {0}")]
    Io(String),
}

fn position(line: Option<u64>, column: Option<u64>) -> String {
    match (line, column) {
        (Some(l), Some(c)) => format!(" at line {l}, column {c}"),
        (Some(l), None) => format!(" at line {l}"),
        _ => String::new(),
    }
}
