use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::kg_store::{ViewFormat, ViewKind, ViewSpec};
use crate::scoring::Expectation;

use super::TaskError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskType {
    /// Repair a syntactically broken query.
    #[serde(rename = "SSF")]
    Ssf,
    /// Write a query for a question.
    #[serde(rename = "T2S")]
    T2s,
    /// Answer with the bindings a given query would return.
    #[serde(rename = "S2A")]
    S2a,
    /// Answer a question directly from the graph.
    #[serde(rename = "T2A")]
    T2a,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TaskAspect {
    SyntaxRead,
    SyntaxCreate,
    SemanticRead,
    SemanticCreate,
    KgInfoRead,
}

impl TaskType {
    pub const ALL: [TaskType; 4] = [TaskType::Ssf, TaskType::T2s, TaskType::S2a, TaskType::T2a];

    pub fn aspects(self) -> BTreeSet<TaskAspect> {
        use TaskAspect::*;
        match self {
            TaskType::Ssf => [SyntaxRead, SyntaxCreate].into(),
            TaskType::S2a => [SyntaxRead, SemanticRead, KgInfoRead].into(),
            TaskType::T2s => [SyntaxCreate, SemanticCreate, KgInfoRead].into(),
            TaskType::T2a => [KgInfoRead].into(),
        }
    }

    /// Whether answers are queries that go through the feedback dialog.
    pub fn feedback_enabled(self) -> bool {
        matches!(self, TaskType::Ssf | TaskType::T2s)
    }

    pub fn expects_query(self) -> bool {
        self.feedback_enabled()
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskType::Ssf => "SSF",
            TaskType::T2s => "T2S",
            TaskType::S2a => "S2A",
            TaskType::T2a => "T2A",
        })
    }
}

/// One question/query pair of a task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaskEntry {
    pub id: String,
    #[serde(default)]
    pub question: String,
    pub reference_query: String,
    /// For query tasks, the flattened reference result; for answer tasks,
    /// the expected answer lines.
    pub expected: Expectation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub broken_query: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_error_message: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Serialization {
    Turtle,
    Jsonld,
}

impl fmt::Display for Serialization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Serialization::Turtle => "turtle",
            Serialization::Jsonld => "jsonld",
        })
    }
}

/// Kind of graph information a task puts into the prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum KgInfoKind {
    Iris,
    Schema,
    FullGraph,
    Subgraph,
}

impl fmt::Display for KgInfoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KgInfoKind::Iris => "iris",
            KgInfoKind::Schema => "schema",
            KgInfoKind::FullGraph => "fullGraph",
            KgInfoKind::Subgraph => "subgraph",
        })
    }
}

/// Declarative grouping tags used by the aspect comparisons.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AspectTags {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub serialization: Option<Serialization>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub kg_info: BTreeSet<KgInfoKind>,
}

impl AspectTags {
    pub fn from_views(views: &[ViewSpec]) -> Self {
        let mut tags = AspectTags::default();
        for view in views {
            match view.format {
                ViewFormat::Turtle => tags.serialization = Some(Serialization::Turtle),
                ViewFormat::Jsonld => tags.serialization = Some(Serialization::Jsonld),
                _ => {}
            }
            tags.kg_info.insert(match view.kind {
                ViewKind::FullGraph => KgInfoKind::FullGraph,
                ViewKind::Subgraph => KgInfoKind::Subgraph,
                ViewKind::Schema | ViewKind::Subschema => KgInfoKind::Schema,
                ViewKind::IriList | ViewKind::LabelTable => KgInfoKind::Iris,
            });
        }
        tags
    }
}

/// A population selector for aspect comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Aspect {
    Serialization(Serialization),
    KgInfo(KgInfoKind),
    /// Full graph or graph subset.
    Graph,
}

impl Aspect {
    pub fn matches(&self, tags: &AspectTags) -> bool {
        match self {
            Aspect::Serialization(s) => tags.serialization == Some(*s),
            Aspect::KgInfo(k) => tags.kg_info.contains(k),
            Aspect::Graph => {
                tags.kg_info.contains(&KgInfoKind::FullGraph) || tags.kg_info.contains(&KgInfoKind::Subgraph)
            }
        }
    }

    /// All aspect labels a task with these tags belongs to.
    pub fn labels_for(tags: &AspectTags) -> Vec<Aspect> {
        Aspect::all().into_iter().filter(|a| a.matches(tags)).collect()
    }

    pub fn all() -> Vec<Aspect> {
        vec![
            Aspect::Serialization(Serialization::Turtle),
            Aspect::Serialization(Serialization::Jsonld),
            Aspect::KgInfo(KgInfoKind::Iris),
            Aspect::KgInfo(KgInfoKind::Schema),
            Aspect::KgInfo(KgInfoKind::FullGraph),
            Aspect::KgInfo(KgInfoKind::Subgraph),
            Aspect::Graph,
        ]
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aspect::Serialization(s) => write!(f, "{s}"),
            Aspect::KgInfo(k) => write!(f, "{k}"),
            Aspect::Graph => f.write_str("graph"),
        }
    }
}

impl FromStr for Aspect {
    type Err = TaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().replace(['-', '_', ' '], "").as_str() {
            "turtle" | "ttl" => Aspect::Serialization(Serialization::Turtle),
            "jsonld" => Aspect::Serialization(Serialization::Jsonld),
            "iris" | "irilist" => Aspect::KgInfo(KgInfoKind::Iris),
            "schema" => Aspect::KgInfo(KgInfoKind::Schema),
            "fullgraph" | "fullkg" => Aspect::KgInfo(KgInfoKind::FullGraph),
            "subgraph" => Aspect::KgInfo(KgInfoKind::Subgraph),
            "graph" => Aspect::Graph,
            _ => return Err(TaskError::UnknownAspect(s.to_owned())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aspect_table_matches() {
        use TaskAspect::*;
        assert_eq!(TaskType::Ssf.aspects(), [SyntaxRead, SyntaxCreate].into());
        assert_eq!(TaskType::S2a.aspects(), [SyntaxRead, SemanticRead, KgInfoRead].into());
        assert_eq!(
            TaskType::T2s.aspects(),
            [SyntaxCreate, SemanticCreate, KgInfoRead].into()
        );
        assert_eq!(TaskType::T2a.aspects(), [KgInfoRead].into());
    }

    #[test]
    fn feedback_only_for_query_tasks() {
        let with_feedback: Vec<_> = TaskType::ALL.into_iter().filter(|t| t.feedback_enabled()).collect();
        assert_eq!(with_feedback, [TaskType::Ssf, TaskType::T2s]);
    }

    #[test]
    fn tags_from_views() {
        let tags = AspectTags::from_views(&[
            ViewSpec::new(ViewKind::FullGraph, ViewFormat::Turtle),
            ViewSpec::new(ViewKind::LabelTable, ViewFormat::Table),
        ]);
        assert_eq!(tags.serialization, Some(Serialization::Turtle));
        assert_eq!(tags.kg_info, [KgInfoKind::FullGraph, KgInfoKind::Iris].into());
        assert!(AspectTags::from_views(&[]).kg_info.is_empty());
    }

    #[test]
    fn aspect_names() {
        assert_eq!(
            "JSON-LD".parse::<Aspect>().unwrap(),
            Aspect::Serialization(Serialization::Jsonld)
        );
        assert_eq!(
            "full KG".parse::<Aspect>().unwrap(),
            Aspect::KgInfo(KgInfoKind::FullGraph)
        );
        assert!(matches!("colour".parse::<Aspect>(), Err(TaskError::UnknownAspect(_))));
    }
}
