use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::graph::{serialize_graph, GraphFormat, KnowledgeGraph, RDF_TYPE};
use super::term::Triple;
use super::KgError;

const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
const OWL: &str = "http://www.w3.org/2002/07/owl#";

pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ViewKind {
    FullGraph,
    Schema,
    Subschema,
    Subgraph,
    IriList,
    LabelTable,
}

impl fmt::Display for ViewKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViewKind::FullGraph => "full knowledge graph",
            ViewKind::Schema => "schema",
            ViewKind::Subschema => "schema subset",
            ViewKind::Subgraph => "knowledge graph subset",
            ViewKind::IriList => "relevant IRIs",
            ViewKind::LabelTable => "IRIs and labels",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewFormat {
    Turtle,
    #[serde(alias = "json-ld")]
    Jsonld,
    List,
    Table,
}

impl fmt::Display for ViewFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViewFormat::Turtle => "Turtle",
            ViewFormat::Jsonld => "JSON-LD",
            ViewFormat::List => "list",
            ViewFormat::Table => "table",
        })
    }
}

/// Which slice of a graph to show and how to render it.
///
/// `focus` names the IRIs a subgraph or subschema is built around; for
/// `iriList` and `labelTable` a non-empty focus restricts the output.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ViewSpec {
    pub kind: ViewKind,
    pub format: ViewFormat,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub focus: Vec<String>,
}

impl ViewSpec {
    pub fn new(kind: ViewKind, format: ViewFormat) -> Self {
        ViewSpec {
            kind,
            format,
            focus: Vec::new(),
        }
    }

    pub fn with_focus(mut self, focus: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.focus = focus.into_iter().map(Into::into).collect();
        self
    }

    pub fn is_legal(&self) -> bool {
        match self.kind {
            ViewKind::FullGraph | ViewKind::Schema | ViewKind::Subschema | ViewKind::Subgraph => {
                matches!(self.format, ViewFormat::Turtle | ViewFormat::Jsonld)
            }
            ViewKind::IriList => self.format == ViewFormat::List,
            ViewKind::LabelTable => self.format == ViewFormat::Table,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KgView {
    pub kind: ViewKind,
    pub format: ViewFormat,
    pub content: String,
}

pub fn derive_kg_view(graph: &KnowledgeGraph, spec: &ViewSpec) -> Result<KgView, KgError> {
    if !spec.is_legal() {
        return Err(KgError::UnsupportedView {
            kind: spec.kind,
            format: spec.format,
            reason: "format not allowed for this kind".into(),
        });
    }
    let needs_focus = matches!(spec.kind, ViewKind::Subgraph | ViewKind::Subschema);
    if needs_focus && spec.focus.is_empty() {
        return Err(KgError::UnsupportedView {
            kind: spec.kind,
            format: spec.format,
            reason: "no focus IRIs given".into(),
        });
    }
    let focus: BTreeSet<&str> = spec.focus.iter().map(String::as_str).collect();

    let content = match spec.kind {
        ViewKind::FullGraph => render_graph(graph, graph.triples().to_vec(), spec.format)?,
        ViewKind::Schema => render_graph(graph, schema_triples(graph), spec.format)?,
        ViewKind::Subschema => {
            let triples = schema_triples(graph)
                .into_iter()
                .filter(|t| focus.contains(t.subject.lexical.as_str()) && t.subject.is_iri())
                .collect();
            render_graph(graph, triples, spec.format)?
        }
        ViewKind::Subgraph => {
            let in_focus = |term: &super::RdfTerm| term.is_iri() && focus.contains(term.lexical.as_str());
            let triples = graph
                .triples()
                .iter()
                .filter(|t| in_focus(&t.subject) || in_focus(&t.object))
                .cloned()
                .collect();
            render_graph(graph, triples, spec.format)?
        }
        ViewKind::IriList => iri_list(graph, &focus).join("\n"),
        ViewKind::LabelTable => render_label_table(&label_rows(graph, &focus)),
    };
    Ok(KgView {
        kind: spec.kind,
        format: spec.format,
        content,
    })
}

fn render_graph(graph: &KnowledgeGraph, triples: Vec<Triple>, format: ViewFormat) -> Result<String, KgError> {
    let sub = graph.subgraph(triples)?;
    let format = match format {
        ViewFormat::Turtle => GraphFormat::Turtle,
        ViewFormat::Jsonld => GraphFormat::Jsonld,
        _ => unreachable!("checked by is_legal"),
    };
    serialize_graph(&sub, format)
}

/// Class and property declarations, hierarchy and domain/range axioms, plus
/// labels and comments of the declared resources.
pub fn schema_triples(graph: &KnowledgeGraph) -> Vec<Triple> {
    let declaration_types: BTreeSet<String> = [
        format!("{RDFS}Class"),
        format!("{OWL}Class"),
        format!("{RDF}Property"),
        format!("{OWL}ObjectProperty"),
        format!("{OWL}DatatypeProperty"),
    ]
    .into();
    let axioms: BTreeSet<String> = [
        format!("{RDFS}subClassOf"),
        format!("{RDFS}subPropertyOf"),
        format!("{RDFS}domain"),
        format!("{RDFS}range"),
    ]
    .into();
    let annotations: BTreeSet<String> = [RDFS_LABEL.to_owned(), format!("{RDFS}comment")].into();

    let mut kept = Vec::new();
    let mut subjects = BTreeSet::new();
    for t in graph.triples() {
        let is_declaration =
            t.predicate.lexical == RDF_TYPE && t.object.is_iri() && declaration_types.contains(&t.object.lexical);
        if is_declaration || axioms.contains(&t.predicate.lexical) {
            subjects.insert(t.subject.clone());
            kept.push(t.clone());
        }
    }
    for t in graph.triples() {
        if annotations.contains(&t.predicate.lexical) && subjects.contains(&t.subject) {
            kept.push(t.clone());
        }
    }
    kept
}

/// Sorted, distinct IRIs of the graph, restricted to `focus` when it is non-empty.
pub fn iri_list(graph: &KnowledgeGraph, focus: &BTreeSet<&str>) -> Vec<String> {
    graph
        .iris()
        .into_iter()
        .filter(|iri| focus.is_empty() || focus.contains(iri.as_str()))
        .collect()
}

pub fn label_rows(graph: &KnowledgeGraph, focus: &BTreeSet<&str>) -> Vec<(String, String)> {
    let rows: BTreeSet<(String, String)> = graph
        .triples()
        .iter()
        .filter(|t| t.predicate.lexical == RDFS_LABEL && t.subject.is_iri() && t.object.is_literal())
        .filter(|t| focus.is_empty() || focus.contains(t.subject.lexical.as_str()))
        .map(|t| (t.subject.lexical.clone(), t.object.lexical.clone()))
        .collect();
    rows.into_iter().collect()
}

pub fn render_label_table(rows: &[(String, String)]) -> String {
    let mut out = String::from("| IRI | label |\n|---|---|");
    for (iri, label) in rows {
        out.push_str(&format!("\n| {} | {} |", iri, label.replace('|', "\\|")));
    }
    out
}
