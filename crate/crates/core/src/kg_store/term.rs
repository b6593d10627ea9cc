use std::fmt;

use oxigraph::model::{BlankNode, Literal, NamedNode, NamedOrBlankNode, Term};
use serde::{Deserialize, Serialize};

use super::KgError;

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TermKind {
    Iri,
    Literal,
    BlankNode,
}

/// A node or value in a graph or in a result binding.
///
/// Plain string literals carry neither a datatype nor a language tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RdfTerm {
    pub kind: TermKind,
    pub lexical: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datatype_iri: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_tag: Option<String>,
}

impl RdfTerm {
    pub fn iri(iri: impl Into<String>) -> Result<Self, KgError> {
        let iri = iri.into();
        NamedNode::new(iri.as_str()).map_err(|e| KgError::InvalidTerm(format!("{iri}: {e}")))?;
        Ok(RdfTerm {
            kind: TermKind::Iri,
            lexical: iri,
            datatype_iri: None,
            language_tag: None,
        })
    }

    pub fn literal(value: impl Into<String>) -> Self {
        RdfTerm {
            kind: TermKind::Literal,
            lexical: value.into(),
            datatype_iri: None,
            language_tag: None,
        }
    }

    pub fn typed_literal(value: impl Into<String>, datatype: impl Into<String>) -> Self {
        let datatype = datatype.into();
        if datatype == XSD_STRING {
            return Self::literal(value);
        }
        RdfTerm {
            kind: TermKind::Literal,
            lexical: value.into(),
            datatype_iri: Some(datatype),
            language_tag: None,
        }
    }

    pub fn lang_literal(value: impl Into<String>, lang: impl Into<String>) -> Self {
        RdfTerm {
            kind: TermKind::Literal,
            lexical: value.into(),
            datatype_iri: None,
            language_tag: Some(lang.into().to_ascii_lowercase()),
        }
    }

    pub fn blank(id: impl Into<String>) -> Self {
        RdfTerm {
            kind: TermKind::BlankNode,
            lexical: id.into(),
            datatype_iri: None,
            language_tag: None,
        }
    }

    pub fn is_iri(&self) -> bool {
        self.kind == TermKind::Iri
    }

    pub fn is_literal(&self) -> bool {
        self.kind == TermKind::Literal
    }

    pub fn is_blank(&self) -> bool {
        self.kind == TermKind::BlankNode
    }

    pub(crate) fn to_ox(&self) -> Result<Term, KgError> {
        Ok(match self.kind {
            TermKind::Iri => NamedNode::new(self.lexical.as_str())
                .map_err(|e| KgError::InvalidTerm(e.to_string()))?
                .into(),
            TermKind::BlankNode => BlankNode::new(self.lexical.as_str())
                .map_err(|e| KgError::InvalidTerm(e.to_string()))?
                .into(),
            TermKind::Literal => match (&self.language_tag, &self.datatype_iri) {
                (Some(lang), _) => Literal::new_language_tagged_literal(&self.lexical, lang)
                    .map_err(|e| KgError::InvalidTerm(e.to_string()))?
                    .into(),
                (None, Some(dt)) => Literal::new_typed_literal(
                    &self.lexical,
                    NamedNode::new(dt.as_str()).map_err(|e| KgError::InvalidTerm(e.to_string()))?,
                )
                .into(),
                (None, None) => Literal::new_simple_literal(&self.lexical).into(),
            },
        })
    }

    pub(crate) fn to_ox_subject(&self) -> Result<NamedOrBlankNode, KgError> {
        match self.to_ox()? {
            Term::NamedNode(n) => Ok(n.into()),
            Term::BlankNode(b) => Ok(b.into()),
            _ => Err(KgError::InvalidTerm(format!("literal {} cannot be a subject", self))),
        }
    }

    pub(crate) fn to_ox_predicate(&self) -> Result<NamedNode, KgError> {
        match self.to_ox()? {
            Term::NamedNode(n) => Ok(n),
            _ => Err(KgError::InvalidTerm(format!("{} cannot be a predicate", self))),
        }
    }
}

impl From<&Term> for RdfTerm {
    fn from(term: &Term) -> Self {
        match term {
            Term::NamedNode(n) => RdfTerm {
                kind: TermKind::Iri,
                lexical: n.as_str().to_owned(),
                datatype_iri: None,
                language_tag: None,
            },
            Term::BlankNode(b) => RdfTerm::blank(b.as_str()),
            Term::Literal(l) => {
                if let Some(lang) = l.language() {
                    RdfTerm::lang_literal(l.value(), lang)
                } else {
                    RdfTerm::typed_literal(l.value(), l.datatype().as_str())
                }
            }
            #[allow(unreachable_patterns)]
            other => RdfTerm::literal(other.to_string()),
        }
    }
}

impl From<&NamedOrBlankNode> for RdfTerm {
    fn from(node: &NamedOrBlankNode) -> Self {
        match node {
            NamedOrBlankNode::NamedNode(n) => RdfTerm {
                kind: TermKind::Iri,
                lexical: n.as_str().to_owned(),
                datatype_iri: None,
                language_tag: None,
            },
            NamedOrBlankNode::BlankNode(b) => RdfTerm::blank(b.as_str()),
        }
    }
}

impl From<&NamedNode> for RdfTerm {
    fn from(node: &NamedNode) -> Self {
        RdfTerm {
            kind: TermKind::Iri,
            lexical: node.as_str().to_owned(),
            datatype_iri: None,
            language_tag: None,
        }
    }
}

/// N-Triples style rendering.
impl fmt::Display for RdfTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TermKind::Iri => write!(f, "<{}>", self.lexical),
            TermKind::BlankNode => write!(f, "_:{}", self.lexical),
            TermKind::Literal => {
                write!(f, "{}", Literal::new_simple_literal(&self.lexical))?;
                if let Some(lang) = &self.language_tag {
                    write!(f, "@{lang}")
                } else if let Some(dt) = &self.datatype_iri {
                    write!(f, "^^<{dt}>")
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// A single statement. Predicates are always IRIs; subjects are IRIs or blank nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub subject: RdfTerm,
    pub predicate: RdfTerm,
    pub object: RdfTerm,
}

impl Triple {
    pub fn new(subject: RdfTerm, predicate: RdfTerm, object: RdfTerm) -> Result<Self, KgError> {
        if subject.is_literal() {
            return Err(KgError::InvalidTerm(format!("literal subject {subject}")));
        }
        if !predicate.is_iri() {
            return Err(KgError::InvalidTerm(format!("non-IRI predicate {predicate}")));
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub(crate) fn to_ox(&self) -> Result<oxigraph::model::Triple, KgError> {
        Ok(oxigraph::model::Triple::new(
            self.subject.to_ox_subject()?,
            self.predicate.to_ox_predicate()?,
            self.object.to_ox()?,
        ))
    }

    pub(crate) fn from_ox(t: &oxigraph::model::Triple) -> Self {
        Triple {
            subject: RdfTerm::from(&t.subject),
            predicate: RdfTerm::from(&t.predicate),
            object: RdfTerm::from(&t.object),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}
