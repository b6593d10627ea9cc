use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::kg_store::{
    derive_kg_view, execute_select, load_graph, validate_select, GraphFormat, GraphSource, KnowledgeGraph,
    RemoteEndpoint, ViewSpec,
};
use crate::scoring::{flatten_result_set, normalize_line, Expectation, Stage};

use super::types::{AspectTags, TaskEntry, TaskType};
use super::TaskError;

pub const ENTRIES_PER_TASK: usize = 5;

/// Where a task's graph comes from, as written in a dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SourceSpec {
    /// A local Turtle or JSON-LD file, relative to the dataset file.
    #[serde(rename_all = "camelCase")]
    File {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        format: Option<GraphFormat>,
    },
    /// A SPARQL protocol endpoint; `kgInfoFile` supplies the graph used for
    /// prompt views.
    #[serde(rename_all = "camelCase")]
    Endpoint {
        url: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        timeout_secs: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_concurrent: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kg_info_file: Option<PathBuf>,
    },
}

/// On-disk form of a task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaskConfigFile {
    pub name: String,
    pub task_type: TaskType,
    pub dataset_name: String,
    pub kg_name: String,
    pub source: SourceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix_map: Option<BTreeMap<String, String>>,
    #[serde(default)]
    pub kg_views: Vec<ViewSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aspects: Option<AspectTags>,
    pub entries: Vec<TaskEntry>,
}

/// A loaded, validated task: the graph is resolved and the prompt views
/// are rendered once.
#[derive(Debug, Clone)]
pub struct TaskConfig {
    pub name: String,
    pub task_type: TaskType,
    pub dataset_name: String,
    pub kg_name: String,
    pub source: GraphSource,
    pub view_graph: Option<KnowledgeGraph>,
    pub prefix_map: BTreeMap<String, String>,
    pub kg_views: Vec<ViewSpec>,
    pub aspects: AspectTags,
    pub entries: Vec<TaskEntry>,
    kg_info: String,
}

impl TaskConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TaskError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| TaskError::Io(format!("{}: {e}", path.display())))?;
        let file: TaskConfigFile =
            serde_json::from_str(&text).map_err(|e| TaskError::Json(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_file(file, base)
    }

    /// Builds a task from its file form, resolving relative paths against `base_dir`.
    pub fn from_file(file: TaskConfigFile, base_dir: &Path) -> Result<Self, TaskError> {
        let (source, view_graph) = match &file.source {
            SourceSpec::File { path, format } => {
                let graph = read_graph(&base_dir.join(path), *format, &file.kg_name)?;
                (GraphSource::in_memory(graph.clone()), Some(graph))
            }
            SourceSpec::Endpoint {
                url,
                timeout_secs,
                max_concurrent,
                kg_info_file,
            } => {
                let mut endpoint = RemoteEndpoint::new(url.clone()).map_err(|e| TaskError::Invalid(e.to_string()))?;
                if let Some(t) = timeout_secs {
                    endpoint.timeout_secs = *t;
                }
                if let Some(m) = max_concurrent {
                    endpoint.max_concurrent = *m;
                }
                let view_graph = kg_info_file
                    .as_ref()
                    .map(|p| read_graph(&base_dir.join(p), None, &file.kg_name))
                    .transpose()?;
                (GraphSource::Remote(endpoint), view_graph)
            }
        };
        let prefix_map = match file.prefix_map {
            Some(map) => map,
            None => view_graph.as_ref().map(|g| g.prefixes().clone()).unwrap_or_default(),
        };
        let aspects = file.aspects.unwrap_or_else(|| AspectTags::from_views(&file.kg_views));
        let mut config = TaskConfig {
            name: file.name,
            task_type: file.task_type,
            dataset_name: file.dataset_name,
            kg_name: file.kg_name,
            source,
            view_graph,
            prefix_map,
            kg_views: file.kg_views,
            aspects,
            entries: file.entries,
            kg_info: String::new(),
        };
        config.validate()?;
        config.kg_info = prepare_kg_info(&config)?;
        Ok(config)
    }

    fn validate(&mut self) -> Result<(), TaskError> {
        if self.entries.len() != ENTRIES_PER_TASK {
            return Err(TaskError::Invalid(format!(
                "task {} has {} entries, expected {ENTRIES_PER_TASK}",
                self.name,
                self.entries.len()
            )));
        }
        let mut ids = BTreeSet::new();
        for view in &self.kg_views {
            if !view.is_legal() {
                return Err(TaskError::Invalid(format!(
                    "task {}: view {:?} cannot use format {:?}",
                    self.name, view.kind, view.format
                )));
            }
        }
        for entry in &mut self.entries {
            if !ids.insert(entry.id.clone()) {
                return Err(TaskError::Invalid(format!("duplicate entry id {}", entry.id)));
            }
            validate_select(&entry.reference_query, &self.prefix_map)
                .map_err(|e| TaskError::Invalid(format!("entry {}: reference query does not parse: {e}", entry.id)))?;
            if self.task_type == TaskType::Ssf {
                let broken = entry.broken_query.as_deref().ok_or_else(|| TaskError::MissingField {
                    entry: entry.id.clone(),
                    field: "brokenQuery",
                })?;
                let message = match validate_select(broken, &self.prefix_map) {
                    Ok(_) => return Err(TaskError::Invalid(format!("entry {}: broken query parses", entry.id))),
                    Err(e) => e.message,
                };
                match &entry.parse_error_message {
                    Some(stored) if *stored != message => {
                        return Err(TaskError::Invalid(format!(
                            "entry {}: stored parse error {stored:?} differs from validator message {message:?}",
                            entry.id
                        )))
                    }
                    Some(_) => {}
                    None => entry.parse_error_message = Some(message),
                }
            }
            if self.task_type.expects_query() && !matches!(entry.expected, Expectation::ValueSet { .. }) {
                return Err(TaskError::Invalid(format!(
                    "entry {}: query tasks expect a valueSet",
                    entry.id
                )));
            }
        }
        Ok(())
    }

    /// Prompt text describing the graph, rendered at load time.
    pub fn kg_info(&self) -> &str {
        &self.kg_info
    }

    pub fn entry(&self, id: &str) -> Option<&TaskEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Expected flattened result set for a query task entry.
    pub fn expected_values(&self, entry: &TaskEntry) -> BTreeSet<String> {
        match &entry.expected {
            Expectation::ValueSet { values } => values.iter().cloned().collect(),
            other => other.alternatives().into_iter().flatten().collect(),
        }
    }
}

fn read_graph(path: &Path, format: Option<GraphFormat>, name: &str) -> Result<KnowledgeGraph, TaskError> {
    let format = format
        .or_else(|| GraphFormat::from_extension(path))
        .ok_or_else(|| TaskError::Invalid(format!("{}: cannot tell graph format", path.display())))?;
    let data = std::fs::read(path).map_err(|e| TaskError::Io(format!("{}: {e}", path.display())))?;
    Ok(load_graph(&data, format, name)?)
}

/// Entry chosen for an execution: round-robin over the task's entries.
pub fn select_entry(config: &TaskConfig, execution_index: usize) -> &TaskEntry {
    &config.entries[execution_index % config.entries.len()]
}

/// Renders every configured view in order, each under a one-line header.
pub fn prepare_kg_info(config: &TaskConfig) -> Result<String, TaskError> {
    if config.kg_views.is_empty() {
        return Ok(String::new());
    }
    let graph = config.view_graph.as_ref().ok_or_else(|| {
        TaskError::Invalid(format!(
            "task {} has views but no local graph to derive them from",
            config.name
        ))
    })?;
    let mut sections = Vec::with_capacity(config.kg_views.len());
    for spec in &config.kg_views {
        let view = derive_kg_view(graph, spec)?;
        sections.push(format!(
            "KG info, {} ({}):\n{}",
            view.kind,
            view.format,
            view.content.trim_end()
        ));
    }
    Ok(sections.join("\n\n"))
}

/// Checks that executing the entry's reference query yields a nonempty
/// result matching its expected data. Answer lines are compared after
/// compacting IRIs with the task's prefix map, at the fixed stage.
pub fn verify_entry(config: &TaskConfig, entry: &TaskEntry) -> Result<(), TaskError> {
    let parsed =
        validate_select(&entry.reference_query, &config.prefix_map).map_err(|e| TaskError::Invalid(e.to_string()))?;
    let table = execute_select(&parsed, &config.source).map_err(|e| TaskError::Invalid(e.to_string()))?;
    if table.is_empty() {
        return Err(TaskError::Invalid(format!(
            "entry {}: reference result is empty",
            entry.id
        )));
    }
    let flat = flatten_result_set(&table);
    let ok = if config.task_type.expects_query() {
        flat == config.expected_values(entry)
    } else {
        let compact: BTreeSet<String> = flat
            .iter()
            .map(|v| crate::kg_store::compact_iri(&config.prefix_map, v).unwrap_or_else(|| v.clone()))
            .map(|v| normalize_line(&v, Stage::Fixed))
            .collect();
        match &entry.expected {
            Expectation::Count { n } => flat.len() == 1 && flat.contains(&n.to_string()),
            other => other.alternatives().iter().any(|alt| {
                let alt: BTreeSet<String> = alt.iter().map(|l| normalize_line(l, Stage::Fixed)).collect();
                alt == compact || alt == flat
            }),
        }
    };
    if ok {
        Ok(())
    } else {
        Err(TaskError::Invalid(format!(
            "entry {}: reference result {flat:?} does not match expected {:?}",
            entry.id, entry.expected
        )))
    }
}
