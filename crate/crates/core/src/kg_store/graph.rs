use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use oxigraph::io::{JsonLdProfileSet, RdfFormat, RdfParseError, RdfParser, RdfSerializer};
use oxigraph::model::{GraphNameRef, QuadRef};
use oxigraph::store::Store;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::term::{RdfTerm, TermKind, Triple};
use super::KgError;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// Label used for the empty (default) prefix in JSON-LD contexts, where an
/// empty term is not allowed.
pub const JSONLD_DEFAULT_PREFIX: &str = "0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    Turtle,
    #[serde(alias = "json-ld")]
    Jsonld,
}

impl GraphFormat {
    pub fn from_extension(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "ttl" => Some(GraphFormat::Turtle),
            "jsonld" | "json" => Some(GraphFormat::Jsonld),
            _ => None,
        }
    }

    fn ox(self) -> RdfFormat {
        match self {
            GraphFormat::Turtle => RdfFormat::Turtle,
            GraphFormat::Jsonld => RdfFormat::JsonLd {
                profile: JsonLdProfileSet::empty(),
            },
        }
    }
}

impl fmt::Display for GraphFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphFormat::Turtle => "turtle",
            GraphFormat::Jsonld => "jsonld",
        })
    }
}

impl FromStr for GraphFormat {
    type Err = KgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "turtle" | "ttl" => Ok(GraphFormat::Turtle),
            "jsonld" | "json-ld" => Ok(GraphFormat::Jsonld),
            other => Err(KgError::UnknownFormat(other.to_owned())),
        }
    }
}

/// An immutable set of triples with its prefix declarations and a backing
/// in-memory store for query evaluation.
///
/// Blank nodes are relabelled `b0`, `b1`, ... in order of first appearance
/// so serializations are stable across loads.
#[derive(Clone)]
pub struct KnowledgeGraph {
    name: String,
    prefixes: BTreeMap<String, String>,
    triples: Vec<Triple>,
    store: Store,
}

impl fmt::Debug for KnowledgeGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KnowledgeGraph")
            .field("name", &self.name)
            .field("prefixes", &self.prefixes)
            .field("triples", &self.triples.len())
            .finish()
    }
}

impl KnowledgeGraph {
    pub fn from_triples(
        name: impl Into<String>,
        prefixes: BTreeMap<String, String>,
        triples: impl IntoIterator<Item = Triple>,
    ) -> Result<Self, KgError> {
        let triples: BTreeSet<Triple> = triples.into_iter().collect();
        let triples: Vec<Triple> = triples.into_iter().collect();
        let store = Store::new().map_err(|e| KgError::Store(e.to_string()))?;
        for t in &triples {
            let ox = t.to_ox()?;
            store
                .insert(QuadRef::new(
                    ox.subject.as_ref(),
                    ox.predicate.as_ref(),
                    ox.object.as_ref(),
                    GraphNameRef::DefaultGraph,
                ))
                .map_err(|e| KgError::Store(e.to_string()))?;
        }
        Ok(KnowledgeGraph {
            name: name.into(),
            prefixes,
            triples,
            store,
        })
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self::from_triples(name, BTreeMap::new(), Vec::new()).expect("empty store")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    /// Triples in canonical (sorted, duplicate-free) order.
    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub(crate) fn store(&self) -> &Store {
        &self.store
    }

    /// Every distinct IRI used as subject, predicate or object.
    pub fn iris(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in &self.triples {
            for term in [&t.subject, &t.predicate, &t.object] {
                if term.is_iri() {
                    out.insert(term.lexical.clone());
                }
            }
        }
        out
    }

    /// Prefixed form of `iri` using the longest matching namespace, if any.
    pub fn compact_iri(&self, iri: &str) -> Option<String> {
        compact_iri(&self.prefixes, iri)
    }

    /// Builds a new graph holding `triples` with this graph's prefixes.
    pub fn subgraph(&self, triples: impl IntoIterator<Item = Triple>) -> Result<Self, KgError> {
        Self::from_triples(self.name.clone(), self.prefixes.clone(), triples)
    }
}

pub fn compact_iri(prefixes: &BTreeMap<String, String>, iri: &str) -> Option<String> {
    prefixes
        .iter()
        .filter(|(_, ns)| !ns.is_empty() && iri.starts_with(ns.as_str()) && iri.len() > ns.len())
        .max_by_key(|(_, ns)| ns.len())
        .map(|(label, ns)| format!("{label}:{}", &iri[ns.len()..]))
}

/// Parses a Turtle or JSON-LD document into a graph.
pub fn load_graph(data: &[u8], format: GraphFormat, name: impl Into<String>) -> Result<KnowledgeGraph, KgError> {
    let mut reader = RdfParser::from_format(format.ox()).for_reader(data);
    let mut triples = Vec::new();
    let mut blank_labels: HashMap<String, String> = HashMap::new();
    let mut relabel = |term: RdfTerm| -> RdfTerm {
        if term.kind != TermKind::BlankNode {
            return term;
        }
        let next = blank_labels.len();
        let label = blank_labels
            .entry(term.lexical)
            .or_insert_with(|| format!("b{next}"))
            .clone();
        RdfTerm::blank(label)
    };
    for quad in &mut reader {
        let quad = quad.map_err(|e| parse_error(format, e))?;
        if !quad.graph_name.is_default_graph() {
            return Err(KgError::Parse {
                format,
                line: None,
                column: None,
                message: "named graphs are not supported".into(),
            });
        }
        let triple = Triple::from_ox(&oxigraph::model::Triple::from(quad));
        triples.push(Triple {
            subject: relabel(triple.subject),
            predicate: triple.predicate,
            object: relabel(triple.object),
        });
    }
    let prefixes = reader
        .prefixes()
        .map(|(label, ns)| (label.to_owned(), ns.to_owned()))
        .map(|(label, ns)| {
            if format == GraphFormat::Jsonld && label == JSONLD_DEFAULT_PREFIX {
                (String::new(), ns)
            } else {
                (label, ns)
            }
        })
        .collect();
    KnowledgeGraph::from_triples(name, prefixes, triples)
}

fn parse_error(format: GraphFormat, error: RdfParseError) -> KgError {
    match error {
        RdfParseError::Syntax(e) => {
            let (line, column) = match e.location() {
                Some(range) => (Some(range.start.line + 1), Some(range.start.column + 1)),
                None => (None, None),
            };
            KgError::Parse {
                format,
                line,
                column,
                message: e.to_string(),
            }
        }
        RdfParseError::Io(e) => KgError::Io(e.to_string()),
    }
}

/// Serializes the graph. Output always re-loads to an isomorphic graph.
pub fn serialize_graph(graph: &KnowledgeGraph, format: GraphFormat) -> Result<String, KgError> {
    match format {
        GraphFormat::Turtle => serialize_turtle(graph),
        GraphFormat::Jsonld => Ok(serialize_jsonld(graph)),
    }
}

fn serialize_turtle(graph: &KnowledgeGraph) -> Result<String, KgError> {
    let mut serializer = RdfSerializer::from_format(RdfFormat::Turtle);
    for (label, ns) in graph.prefixes() {
        serializer = serializer
            .with_prefix(label.as_str(), ns.as_str())
            .map_err(|e| KgError::InvalidTerm(e.to_string()))?;
    }
    let mut writer = serializer.for_writer(Vec::new());
    for t in graph.triples() {
        writer
            .serialize_triple(&t.to_ox()?)
            .map_err(|e| KgError::Io(e.to_string()))?;
    }
    let bytes = writer.finish().map_err(|e| KgError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| KgError::Io(e.to_string()))
}

/// Compacted JSON-LD with an `@context` built from the prefix map and one
/// node object per subject in `@graph`.
fn serialize_jsonld(graph: &KnowledgeGraph) -> String {
    let prefixes: BTreeMap<String, String> = graph
        .prefixes()
        .iter()
        .filter(|(label, _)| !matches!(label.as_str(), "http" | "https" | "_"))
        .map(|(label, ns)| {
            let label = if label.is_empty() {
                JSONLD_DEFAULT_PREFIX.to_owned()
            } else {
                label.clone()
            };
            (label, ns.clone())
        })
        .collect();
    let compact = |iri: &str| -> String {
        match compact_iri(&prefixes, iri) {
            Some(c) if !c.split_once(':').is_some_and(|(_, local)| local.starts_with("//")) => c,
            _ => iri.to_owned(),
        }
    };
    let node_ref = |term: &RdfTerm| -> String {
        match term.kind {
            TermKind::BlankNode => format!("_:{}", term.lexical),
            _ => compact(&term.lexical),
        }
    };

    let mut nodes: BTreeMap<&RdfTerm, Map<String, Value>> = BTreeMap::new();
    for t in graph.triples() {
        let node = nodes.entry(&t.subject).or_insert_with(|| {
            let mut m = Map::new();
            m.insert("@id".into(), Value::String(node_ref(&t.subject)));
            m
        });
        if t.predicate.lexical == RDF_TYPE && t.object.kind != TermKind::Literal {
            push_value(node, "@type", Value::String(node_ref(&t.object)));
            continue;
        }
        let value = match t.object.kind {
            TermKind::Iri | TermKind::BlankNode => json!({ "@id": node_ref(&t.object) }),
            TermKind::Literal => {
                let mut v = Map::new();
                v.insert("@value".into(), Value::String(t.object.lexical.clone()));
                if let Some(lang) = &t.object.language_tag {
                    v.insert("@language".into(), Value::String(lang.clone()));
                } else if let Some(dt) = &t.object.datatype_iri {
                    v.insert("@type".into(), Value::String(compact(dt)));
                }
                Value::Object(v)
            }
        };
        push_value(node, &compact(&t.predicate.lexical), value);
    }

    let context: Map<String, Value> = prefixes
        .into_iter()
        .map(|(label, ns)| (label, Value::String(ns)))
        .collect();
    let doc = json!({
        "@context": Value::Object(context),
        "@graph": nodes.into_values().map(Value::Object).collect::<Vec<_>>(),
    });
    let mut out = serde_json::to_string_pretty(&doc).expect("json values serialize");
    out.push('\n');
    out
}

fn push_value(node: &mut Map<String, Value>, key: &str, value: Value) {
    match node.entry(key.to_owned()).or_insert_with(|| Value::Array(Vec::new())) {
        Value::Array(items) => items.push(value),
        _ => unreachable!("node values are always arrays"),
    }
}

/// Graph isomorphism under blank node renaming.
pub fn is_isomorphic(a: &KnowledgeGraph, b: &KnowledgeGraph) -> bool {
    triples_isomorphic(a.triples(), b.triples())
}

pub fn triples_isomorphic(a: &[Triple], b: &[Triple]) -> bool {
    let a: BTreeSet<&Triple> = a.iter().collect();
    let b: BTreeSet<&Triple> = b.iter().collect();
    if a.len() != b.len() {
        return false;
    }
    let has_blank = |t: &Triple| t.subject.is_blank() || t.object.is_blank();
    let ground_a: BTreeSet<_> = a.iter().filter(|t| !has_blank(t)).collect();
    let ground_b: BTreeSet<_> = b.iter().filter(|t| !has_blank(t)).collect();
    if ground_a != ground_b {
        return false;
    }
    let rest_a: Vec<&Triple> = a.iter().copied().filter(|t| has_blank(t)).collect();
    let rest_b: BTreeSet<&Triple> = b.iter().copied().filter(|t| has_blank(t)).collect();
    if rest_a.len() != rest_b.len() {
        return false;
    }

    let blanks = |ts: &mut dyn Iterator<Item = &Triple>| -> Vec<String> {
        let mut set = BTreeSet::new();
        for t in ts {
            for term in [&t.subject, &t.object] {
                if term.is_blank() {
                    set.insert(term.lexical.clone());
                }
            }
        }
        set.into_iter().collect()
    };
    let blanks_a = blanks(&mut rest_a.iter().copied());
    let blanks_b = blanks(&mut rest_b.iter().copied());
    if blanks_a.len() != blanks_b.len() {
        return false;
    }

    // Blank nodes can only map onto nodes with the same local signature.
    let signature = |ts: &mut dyn Iterator<Item = &Triple>, node: &str| -> Vec<String> {
        let mut sig: Vec<String> = Vec::new();
        for t in ts {
            if t.subject.is_blank() && t.subject.lexical == node {
                let o = if t.object.is_blank() {
                    "_".to_owned()
                } else {
                    t.object.to_string()
                };
                sig.push(format!("s {} {}", t.predicate, o));
            }
            if t.object.is_blank() && t.object.lexical == node {
                let s = if t.subject.is_blank() {
                    "_".to_owned()
                } else {
                    t.subject.to_string()
                };
                sig.push(format!("o {} {}", s, t.predicate));
            }
        }
        sig.sort();
        sig
    };
    let sig_a: Vec<Vec<String>> = blanks_a
        .iter()
        .map(|n| signature(&mut rest_a.iter().copied(), n))
        .collect();
    let sig_b: Vec<Vec<String>> = blanks_b
        .iter()
        .map(|n| signature(&mut rest_b.iter().copied(), n))
        .collect();

    let mut mapping: HashMap<String, String> = HashMap::new();
    let mut used = vec![false; blanks_b.len()];
    search_bijection(
        0,
        &blanks_a,
        &blanks_b,
        &sig_a,
        &sig_b,
        &rest_a,
        &rest_b,
        &mut mapping,
        &mut used,
    )
}

#[allow(clippy::too_many_arguments)]
fn search_bijection(
    depth: usize,
    blanks_a: &[String],
    blanks_b: &[String],
    sig_a: &[Vec<String>],
    sig_b: &[Vec<String>],
    rest_a: &[&Triple],
    rest_b: &BTreeSet<&Triple>,
    mapping: &mut HashMap<String, String>,
    used: &mut [bool],
) -> bool {
    if depth == blanks_a.len() {
        return rest_a.iter().all(|t| {
            let map = |term: &RdfTerm| -> RdfTerm {
                if term.is_blank() {
                    RdfTerm::blank(mapping[&term.lexical].clone())
                } else {
                    term.clone()
                }
            };
            let mapped = Triple {
                subject: map(&t.subject),
                predicate: t.predicate.clone(),
                object: map(&t.object),
            };
            rest_b.contains(&mapped)
        });
    }
    for j in 0..blanks_b.len() {
        if used[j] || sig_a[depth] != sig_b[j] {
            continue;
        }
        used[j] = true;
        mapping.insert(blanks_a[depth].clone(), blanks_b[j].clone());
        if search_bijection(
            depth + 1,
            blanks_a,
            blanks_b,
            sig_a,
            sig_b,
            rest_a,
            rest_b,
            mapping,
            used,
        ) {
            return true;
        }
        mapping.remove(&blanks_a[depth]);
        used[j] = false;
    }
    false
}
