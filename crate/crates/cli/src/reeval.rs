use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use kgbench::dialog::rescore_session;
use kgbench::stats::prefix_scores;
use kgbench::tasks::TaskConfig;

use crate::results::{read_results, BadLine, ResultLine, ResultsWriter};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReevalSummary {
    pub rescored: usize,
    pub flagged: Vec<BadLine>,
}

/// Recomputes scores of every stored session with the current scoring code
/// and writes the rescored lines to `out`. Lines that cannot be rescored are
/// flagged and left out; the rest are still processed.
pub fn reeval(results: &Path, out: &Path) -> anyhow::Result<ReevalSummary> {
    if !results.exists() {
        bail!("{} does not exist", results.display());
    }
    if out.exists() && same_file(results, out) {
        bail!("refusing to overwrite the input file {}", results.display());
    }
    let (lines, mut flagged) = read_results(results).with_context(|| format!("reading {}", results.display()))?;
    let base = results.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut tasks: HashMap<PathBuf, Result<Arc<TaskConfig>, String>> = HashMap::new();
    let mut writer = ResultsWriter::create(out).with_context(|| format!("creating {}", out.display()))?;
    let mut summary = ReevalSummary::default();

    for (n, line) in lines {
        let path = base.join(&line.task_file);
        let config = tasks
            .entry(path.clone())
            .or_insert_with(|| TaskConfig::load(&path).map(Arc::new).map_err(|e| e.to_string()))
            .clone();
        match config.and_then(|c| rescore(&c, &line)) {
            Ok(rescored) => {
                writer
                    .write(&rescored)
                    .with_context(|| format!("writing {}", out.display()))?;
                summary.rescored += 1;
            }
            Err(reason) => flagged.push(BadLine { line: n, reason }),
        }
    }
    flagged.sort_by_key(|b| b.line);
    for b in &flagged {
        log::warn!("{}:{}: {}", results.display(), b.line, b.reason);
    }
    summary.flagged = flagged;
    Ok(summary)
}

fn rescore(config: &TaskConfig, line: &ResultLine) -> Result<ResultLine, String> {
    if config.name != line.session.task {
        return Err(format!(
            "session belongs to task {} but {} defines {}",
            line.session.task,
            line.task_file.display(),
            config.name
        ));
    }
    let session = rescore_session(config, &line.session).map_err(|e| e.to_string())?;
    let scores = prefix_scores(&session).with_aspects(config.aspects.clone());
    Ok(ResultLine {
        fingerprint: line.fingerprint.clone(),
        task_file: line.task_file.clone(),
        session,
        scores,
    })
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}
