use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use kgbench::llm_adapters::{AdapterConfig, AdapterError, AdapterKind, ModelAdapter};
use kgbench::tasks::{TaskConfig, TaskError, ENTRIES_PER_TASK};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A benchmark run as written by the operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunManifest {
    pub adapters: Vec<AdapterConfig>,
    /// Task files, relative to the manifest.
    pub tasks: Vec<PathBuf>,
    pub executions_per_task: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_concurrency")]
    pub concurrency_limit: usize,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_concurrency() -> usize {
    1
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: invalid manifest: {message}")]
    Json { path: PathBuf, message: String },
    #[error("invalid manifest: {0}")]
    Invalid(String),
    #[error("task file {path}: {source}")]
    Task { path: PathBuf, source: TaskError },
    #[error("adapter {name}: {source}")]
    Adapter { name: String, source: AdapterError },
}

pub struct LoadedTask {
    pub path: PathBuf,
    pub config: Arc<TaskConfig>,
}

/// A manifest with its tasks loaded and adapters instantiated.
pub struct LoadedManifest {
    pub manifest: RunManifest,
    pub base_dir: PathBuf,
    pub tasks: Vec<LoadedTask>,
    pub adapters: Vec<Arc<dyn ModelAdapter>>,
    /// Hex SHA-256 over the manifest and the bytes of every task file.
    pub fingerprint: String,
}

impl LoadedManifest {
    pub fn results_path(&self) -> PathBuf {
        self.base_dir.join(&self.manifest.output_dir).join("results.jsonl")
    }
}

impl RunManifest {
    pub fn validate(&self) -> Result<(), ManifestError> {
        let n = self.executions_per_task;
        if n == 0 || !n.is_multiple_of(ENTRIES_PER_TASK) {
            return Err(ManifestError::Invalid(format!(
                "executionsPerTask must be a positive multiple of {ENTRIES_PER_TASK}, got {n}"
            )));
        }
        if self.concurrency_limit == 0 {
            return Err(ManifestError::Invalid("concurrencyLimit must be at least 1".into()));
        }
        if self.adapters.is_empty() || self.tasks.is_empty() {
            return Err(ManifestError::Invalid(
                "at least one adapter and one task are required".into(),
            ));
        }
        let mut names = BTreeSet::new();
        for a in &self.adapters {
            if !names.insert(a.name.as_str()) {
                return Err(ManifestError::Invalid(format!("duplicate adapter name {}", a.name)));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<LoadedManifest, ManifestError> {
        let text = std::fs::read(path).map_err(|e| ManifestError::Io {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        let manifest: RunManifest = serde_json::from_slice(&text).map_err(|e| ManifestError::Json {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        manifest.instantiate(base_dir)
    }

    pub fn instantiate(self, base_dir: PathBuf) -> Result<LoadedManifest, ManifestError> {
        self.validate()?;
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(&self).expect("manifest serializes"));

        let mut tasks = Vec::with_capacity(self.tasks.len());
        let mut task_names = BTreeSet::new();
        for rel in &self.tasks {
            let path = base_dir.join(rel);
            let bytes = std::fs::read(&path).map_err(|e| ManifestError::Io {
                path: path.clone(),
                message: e.to_string(),
            })?;
            hasher.update(&bytes);
            let config = TaskConfig::load(&path).map_err(|source| ManifestError::Task {
                path: path.clone(),
                source,
            })?;
            if !task_names.insert(config.name.clone()) {
                return Err(ManifestError::Invalid(format!("duplicate task name {}", config.name)));
            }
            tasks.push(LoadedTask {
                path,
                config: Arc::new(config),
            });
        }

        let configs: Vec<Arc<TaskConfig>> = tasks.iter().map(|t| Arc::clone(&t.config)).collect();
        let mut adapters = Vec::with_capacity(self.adapters.len());
        for cfg in &self.adapters {
            if let AdapterKind::HttpProvider(http) = &cfg.kind {
                if std::env::var_os(&http.api_key_env_var).is_none() {
                    return Err(ManifestError::Adapter {
                        name: cfg.name.clone(),
                        source: AdapterError::Config(format!(
                            "environment variable {} is not set",
                            http.api_key_env_var
                        )),
                    });
                }
            }
            let adapter = cfg
                .build(&configs, &base_dir)
                .map_err(|source| ManifestError::Adapter {
                    name: cfg.name.clone(),
                    source,
                })?;
            adapters.push(adapter);
        }

        Ok(LoadedManifest {
            fingerprint: hex::encode(hasher.finalize()),
            manifest: self,
            base_dir,
            tasks,
            adapters,
        })
    }
}
