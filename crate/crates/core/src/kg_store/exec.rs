use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Condvar, Mutex, OnceLock};
use std::time::Duration;

use oxigraph::sparql::{QueryResults, SparqlEvaluator};
use serde::{Deserialize, Serialize};

use super::graph::KnowledgeGraph;
use super::sparql::ParsedQuery;
use super::term::RdfTerm;

pub const DEFAULT_ENDPOINT_TIMEOUT: Duration = Duration::from_secs(30);
pub const DEFAULT_ENDPOINT_CONCURRENCY: usize = 2;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ExecError {
    #[error("endpoint error: {0}")]
    Endpoint(String),
    #[error("endpoint timed out after {0:?}")]
    Timeout(Duration),
    #[error("query evaluation failed: {0}")]
    Evaluation(String),
}

/// A SPARQL 1.1 protocol endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RemoteEndpoint {
    pub url: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_concurrency")]
    pub max_concurrent: usize,
}

fn default_timeout_secs() -> u64 {
    DEFAULT_ENDPOINT_TIMEOUT.as_secs()
}

fn default_concurrency() -> usize {
    DEFAULT_ENDPOINT_CONCURRENCY
}

impl RemoteEndpoint {
    pub fn new(url: impl Into<String>) -> Result<Self, ExecError> {
        let url = url.into();
        let parsed = reqwest::Url::parse(&url).map_err(|e| ExecError::Endpoint(format!("{url}: {e}")))?;
        if !matches!(parsed.scheme(), "http" | "https") {
            return Err(ExecError::Endpoint(format!("{url}: not an HTTP(S) URL")));
        }
        Ok(RemoteEndpoint {
            url,
            timeout_secs: default_timeout_secs(),
            max_concurrent: default_concurrency(),
        })
    }
}

#[derive(Debug, Clone)]
pub enum GraphSource {
    InMemory(Arc<KnowledgeGraph>),
    Remote(RemoteEndpoint),
}

impl GraphSource {
    pub fn in_memory(graph: KnowledgeGraph) -> Self {
        GraphSource::InMemory(Arc::new(graph))
    }

    pub fn graph(&self) -> Option<&KnowledgeGraph> {
        match self {
            GraphSource::InMemory(g) => Some(g),
            GraphSource::Remote(_) => None,
        }
    }
}

/// Variable bindings returned by a SELECT query. Missing keys in a row are unbound cells.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResultTable {
    pub variables: Vec<String>,
    pub rows: Vec<BTreeMap<String, RdfTerm>>,
}

impl ResultTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Rows in a canonical order, for comparing row multisets.
    pub fn sorted_rows(&self) -> Vec<BTreeMap<String, RdfTerm>> {
        let mut rows = self.rows.clone();
        rows.sort();
        rows
    }
}

pub fn execute_select(query: &ParsedQuery, source: &GraphSource) -> Result<ResultTable, ExecError> {
    match source {
        GraphSource::InMemory(graph) => execute_in_memory(query, graph),
        GraphSource::Remote(endpoint) => execute_remote(query, endpoint),
    }
}

fn execute_in_memory(query: &ParsedQuery, graph: &KnowledgeGraph) -> Result<ResultTable, ExecError> {
    let results = SparqlEvaluator::new()
        .for_query(query.algebra().clone())
        .on_store(graph.store())
        .execute()
        .map_err(|e| ExecError::Evaluation(e.to_string()))?;
    let QueryResults::Solutions(solutions) = results else {
        return Err(ExecError::Evaluation("query did not produce solutions".into()));
    };
    let variables: Vec<String> = solutions.variables().iter().map(|v| v.as_str().to_owned()).collect();
    let mut rows = Vec::new();
    for solution in solutions {
        let solution = solution.map_err(|e| ExecError::Evaluation(e.to_string()))?;
        let row = solution
            .iter()
            .map(|(var, term)| (var.as_str().to_owned(), RdfTerm::from(term)))
            .collect();
        rows.push(row);
    }
    Ok(ResultTable { variables, rows })
}

/// Counting semaphore keyed by endpoint URL.
struct Gate {
    in_flight: Mutex<usize>,
    freed: Condvar,
    limit: usize,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn acquire(&self) -> Permit<'_> {
        let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= self.limit {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut n = self.0.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        *n -= 1;
        self.0.freed.notify_one();
    }
}

fn gate_for(endpoint: &RemoteEndpoint) -> Arc<Gate> {
    static GATES: OnceLock<Mutex<HashMap<String, Arc<Gate>>>> = OnceLock::new();
    let gates = GATES.get_or_init(Default::default);
    let mut gates = gates.lock().unwrap_or_else(|e| e.into_inner());
    gates
        .entry(endpoint.url.clone())
        .or_insert_with(|| {
            Arc::new(Gate {
                in_flight: Mutex::new(0),
                freed: Condvar::new(),
                limit: endpoint.max_concurrent.max(1),
            })
        })
        .clone()
}

fn execute_remote(query: &ParsedQuery, endpoint: &RemoteEndpoint) -> Result<ResultTable, ExecError> {
    let timeout = Duration::from_secs(endpoint.timeout_secs);
    let client = reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| ExecError::Endpoint(e.to_string()))?;
    let gate = gate_for(endpoint);
    let _permit = gate.acquire();

    let mut last_error = None;
    for _attempt in 0..2 {
        let response = client
            .post(&endpoint.url)
            .header(reqwest::header::ACCEPT, "application/sparql-results+json")
            .form(&[("query", query.text())])
            .send();
        match response {
            Ok(resp) if resp.status().is_success() => {
                let body = resp.text().map_err(|e| ExecError::Endpoint(e.to_string()))?;
                return parse_sparql_json(&body);
            }
            Ok(resp) => {
                let status = resp.status();
                let body = resp.text().unwrap_or_default();
                let excerpt: String = body.chars().take(200).collect();
                last_error = Some(ExecError::Endpoint(format!("HTTP {status}: {excerpt}")));
                if status.is_client_error() {
                    break;
                }
            }
            Err(e) if e.is_timeout() => last_error = Some(ExecError::Timeout(timeout)),
            Err(e) => last_error = Some(ExecError::Endpoint(e.to_string())),
        }
    }
    Err(last_error.unwrap_or_else(|| ExecError::Endpoint("no response".into())))
}

#[derive(Deserialize)]
struct JsonResults {
    head: JsonHead,
    results: Option<JsonBindings>,
}

#[derive(Deserialize)]
struct JsonHead {
    #[serde(default)]
    vars: Vec<String>,
}

#[derive(Deserialize)]
struct JsonBindings {
    bindings: Vec<BTreeMap<String, JsonTerm>>,
}

#[derive(Deserialize)]
struct JsonTerm {
    #[serde(rename = "type")]
    kind: String,
    value: String,
    #[serde(rename = "xml:lang")]
    lang: Option<String>,
    datatype: Option<String>,
}

/// Parses an `application/sparql-results+json` document.
pub fn parse_sparql_json(body: &str) -> Result<ResultTable, ExecError> {
    let parsed: JsonResults =
        serde_json::from_str(body).map_err(|e| ExecError::Endpoint(format!("invalid results document: {e}")))?;
    let Some(results) = parsed.results else {
        return Err(ExecError::Endpoint("results document has no bindings".into()));
    };
    let mut rows = Vec::with_capacity(results.bindings.len());
    for binding in results.bindings {
        let mut row = BTreeMap::new();
        for (var, term) in binding {
            let term = match term.kind.as_str() {
                "uri" => RdfTerm::iri(term.value).map_err(|e| ExecError::Endpoint(e.to_string()))?,
                "bnode" => RdfTerm::blank(term.value),
                "literal" | "typed-literal" => match (term.lang, term.datatype) {
                    (Some(lang), _) => RdfTerm::lang_literal(term.value, lang),
                    (None, Some(dt)) => RdfTerm::typed_literal(term.value, dt),
                    (None, None) => RdfTerm::literal(term.value),
                },
                other => return Err(ExecError::Endpoint(format!("unknown term type {other}"))),
            };
            row.insert(var, term);
        }
        rows.push(row);
    }
    Ok(ResultTable {
        variables: parsed.head.vars,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg_store::{load_graph, validate_select, GraphFormat};
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;

    fn source(ttl: &str) -> GraphSource {
        GraphSource::in_memory(load_graph(ttl.as_bytes(), GraphFormat::Turtle, "t").unwrap())
    }

    fn run(src: &GraphSource, q: &str) -> ResultTable {
        let prefixes = BTreeMap::from([(String::new(), "http://ex.org/".to_owned())]);
        execute_select(&validate_select(q, &prefixes).unwrap(), src).unwrap()
    }

    #[test]
    fn single_pattern_match() {
        let src = source("@prefix : <http://ex.org/> . :a :knows :b .");
        let table = run(&src, "SELECT ?x WHERE { :a :knows ?x }");
        assert_eq!(table.variables, ["x"]);
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0]["x"], RdfTerm::iri("http://ex.org/b").unwrap());
    }

    #[test]
    fn unsatisfiable_pattern_is_empty() {
        let src = source("@prefix : <http://ex.org/> . :a :knows :b .");
        assert!(run(&src, "SELECT ?x WHERE { :b :knows ?x }").is_empty());
    }

    #[test]
    fn optional_leaves_cells_unbound() {
        let src = source("@prefix : <http://ex.org/> . :a :knows :b . :b :knows :c . :b :age 3 .");
        let table = run(&src, "SELECT ?x ?age WHERE { ?y :knows ?x OPTIONAL { ?x :age ?age } }");
        let rows = table.sorted_rows();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].len(), 2);
        assert_eq!(rows[1].len(), 1);
    }

    #[test]
    fn remote_endpoint_must_be_http() {
        assert!(RemoteEndpoint::new("ftp://example.org/sparql").is_err());
        assert!(RemoteEndpoint::new("not a url").is_err());
        assert!(RemoteEndpoint::new("https://query.wikidata.org/sparql").is_ok());
    }

    #[test]
    fn sparql_json_results_parsed() {
        let body = r#"{"head":{"vars":["x","l"]},"results":{"bindings":[
            {"x":{"type":"uri","value":"http://ex.org/a"},"l":{"type":"literal","value":"A","xml:lang":"en"}},
            {"x":{"type":"bnode","value":"n1"}}]}}"#;
        let table = parse_sparql_json(body).unwrap();
        assert_eq!(table.variables, ["x", "l"]);
        assert_eq!(table.rows[0]["l"], RdfTerm::lang_literal("A", "en"));
        assert!(table.rows[1]["x"].is_blank());
    }

    fn serve_once(status: &'static str, body: &'static str) -> (String, std::thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/sparql", listener.local_addr().unwrap());
        let handle = std::thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut content_length = 0;
            let mut request = String::new();
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    content_length = v.trim().parse().unwrap();
                }
                request.push_str(&line);
                if line == "\r\n" {
                    break;
                }
            }
            let mut body_in = vec![0; content_length];
            reader.read_exact(&mut body_in).unwrap();
            request.push_str(&String::from_utf8_lossy(&body_in));
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: application/sparql-results+json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
            request
        });
        (url, handle)
    }

    #[test]
    fn remote_select_over_protocol() {
        let (url, server) = serve_once(
            "200 OK",
            r#"{"head":{"vars":["x"]},"results":{"bindings":[{"x":{"type":"uri","value":"http://ex.org/b"}}]}}"#,
        );
        let src = GraphSource::Remote(RemoteEndpoint::new(url).unwrap());
        let table = run(&src, "SELECT ?x WHERE { :a :knows ?x }");
        assert_eq!(table.rows.len(), 1);
        let request = server.join().unwrap();
        assert!(request.contains("application/sparql-results+json"));
        assert!(request.contains("query=PREFIX"));
    }

    #[test]
    fn remote_client_error_is_endpoint_error() {
        let (url, server) = serve_once("400 Bad Request", "bad query");
        let src = GraphSource::Remote(RemoteEndpoint::new(url).unwrap());
        let q = validate_select("SELECT ?x WHERE { ?x ?p ?o }", &BTreeMap::new()).unwrap();
        match execute_select(&q, &src) {
            Err(ExecError::Endpoint(msg)) => assert!(msg.contains("400")),
            other => panic!("{other:?}"),
        }
        server.join().unwrap();
    }
}
