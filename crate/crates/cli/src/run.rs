use std::collections::BTreeSet;
use std::path::Path;
use std::sync::mpsc;
use std::sync::Mutex;

use anyhow::Context;
use kgbench::dialog::{run_session, DialogError};
use kgbench::llm_adapters::ModelAdapter;
use kgbench::stats::prefix_scores;
use kgbench::tasks::select_entry;

use crate::manifest::{LoadedManifest, LoadedTask};
use crate::results::{read_results, relative_to, ResultLine, ResultsWriter, RunKey};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub written: usize,
    pub skipped: usize,
    /// Executions that could not start a session at all.
    pub failed: Vec<(RunKey, String)>,
}

struct Job {
    adapter: usize,
    task: usize,
    execution_index: usize,
}

/// Runs every (adapter, task, execution) not already present in the results
/// file under the same fingerprint, appending one line per session.
pub fn run(loaded: &LoadedManifest, results_path: &Path, concurrency: Option<usize>) -> anyhow::Result<RunSummary> {
    let (existing, bad) = read_results(results_path).with_context(|| format!("reading {}", results_path.display()))?;
    for b in &bad {
        log::warn!(
            "{}:{}: ignoring unreadable line: {}",
            results_path.display(),
            b.line,
            b.reason
        );
    }
    let done: BTreeSet<RunKey> = existing
        .iter()
        .filter(|(_, r)| r.fingerprint == loaded.fingerprint)
        .map(|(_, r)| r.key())
        .collect();

    let mut summary = RunSummary::default();
    let mut jobs = Vec::new();
    for (a, adapter) in loaded.adapters.iter().enumerate() {
        for (t, task) in loaded.tasks.iter().enumerate() {
            for execution_index in 0..loaded.manifest.executions_per_task {
                let key = RunKey {
                    model: adapter.name().to_owned(),
                    task: task.config.name.clone(),
                    execution_index,
                };
                if done.contains(&key) {
                    summary.skipped += 1;
                } else {
                    jobs.push(Job {
                        adapter: a,
                        task: t,
                        execution_index,
                    });
                }
            }
        }
    }
    log::info!("{} executions to run, {} already present", jobs.len(), summary.skipped);

    let results_dir = results_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut writer =
        ResultsWriter::append(results_path).with_context(|| format!("opening {}", results_path.display()))?;
    let workers = concurrency
        .unwrap_or(loaded.manifest.concurrency_limit)
        .max(1)
        .min(jobs.len().max(1));
    let queue = Mutex::new(jobs.into_iter());
    let (tx, rx) = mpsc::channel::<(RunKey, Result<ResultLine, DialogError>)>();

    std::thread::scope(|scope| -> anyhow::Result<()> {
        for _ in 0..workers {
            let tx = tx.clone();
            let queue = &queue;
            let results_dir = &results_dir;
            scope.spawn(move || loop {
                let Some(job) = queue.lock().expect("job queue").next() else {
                    break;
                };
                let adapter = &loaded.adapters[job.adapter];
                let task = &loaded.tasks[job.task];
                let key = RunKey {
                    model: adapter.name().to_owned(),
                    task: task.config.name.clone(),
                    execution_index: job.execution_index,
                };
                let line = execute(loaded, task, adapter.as_ref(), job.execution_index, results_dir);
                if tx.send((key, line)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        // Single writer: lines never interleave.
        for (key, line) in rx {
            match line {
                Ok(line) => {
                    writer.write(&line).context("appending result line")?;
                    summary.written += 1;
                }
                Err(e) => {
                    log::error!("{} / {} #{}: {e}", key.model, key.task, key.execution_index);
                    summary.failed.push((key, e.to_string()));
                }
            }
        }
        Ok(())
    })?;
    Ok(summary)
}

fn execute(
    loaded: &LoadedManifest,
    task: &LoadedTask,
    adapter: &dyn ModelAdapter,
    execution_index: usize,
    results_dir: &Path,
) -> Result<ResultLine, DialogError> {
    let config = &task.config;
    let entry = select_entry(config, execution_index);
    let session = run_session(config, entry, adapter, execution_index)?;
    if let Some(err) = &session.error {
        log::warn!("{} / {} #{}: {err}", session.model, session.task, execution_index);
    }
    let scores = prefix_scores(&session).with_aspects(config.aspects.clone());
    Ok(ResultLine {
        fingerprint: loaded.fingerprint.clone(),
        task_file: relative_to(&task.path, results_dir),
        session,
        scores,
    })
}
