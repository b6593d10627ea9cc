use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use kgbench::dialog::DialogSession;
use kgbench::stats::ScoreRecord;
use serde::{Deserialize, Serialize};

/// One line of a results file: a complete session and its scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResultLine {
    pub fingerprint: String,
    /// Task file the session ran against, relative to the results file
    /// where possible.
    pub task_file: PathBuf,
    pub session: DialogSession,
    pub scores: ScoreRecord,
}

/// Identity of one execution within a run.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RunKey {
    pub model: String,
    pub task: String,
    pub execution_index: usize,
}

impl ResultLine {
    pub fn key(&self) -> RunKey {
        RunKey {
            model: self.session.model.clone(),
            task: self.session.task.clone(),
            execution_index: self.session.execution_index,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("result line serializes")
    }
}

/// A line that could not be used, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadLine {
    pub line: usize,
    pub reason: String,
}

/// Parsed lines with their 1-based numbers, and the lines that failed.
pub type ReadResults = (Vec<(usize, ResultLine)>, Vec<BadLine>);

/// Reads a results file. Blank lines are ignored; unreadable lines are
/// returned separately so callers can report them and carry on.
pub fn read_results(path: &Path) -> std::io::Result<ReadResults> {
    let mut good = Vec::new();
    let mut bad = Vec::new();
    if !path.exists() {
        return Ok((good, bad));
    }
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ResultLine>(&line) {
            Ok(r) => good.push((i + 1, r)),
            Err(e) => bad.push(BadLine {
                line: i + 1,
                reason: e.to_string(),
            }),
        }
    }
    Ok((good, bad))
}

/// Appends lines, flushing after each so an interrupted run loses at most
/// the line being written.
pub struct ResultsWriter {
    file: File,
}

impl ResultsWriter {
    pub fn append(path: &Path) -> std::io::Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        // Start on a fresh line if a previous run died mid-write.
        let len = file.metadata()?.len();
        if len > 0 && !ends_with_newline(path)? {
            file.write_all(b"\n")?;
        }
        Ok(Self { file })
    }

    pub fn create(path: &Path) -> std::io::Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        Ok(Self {
            file: File::create(path)?,
        })
    }

    pub fn write(&mut self, line: &ResultLine) -> std::io::Result<()> {
        writeln!(self.file, "{}", line.to_json())?;
        self.file.flush()
    }
}

fn ends_with_newline(path: &Path) -> std::io::Result<bool> {
    use std::io::{Read, Seek, SeekFrom};
    let mut f = File::open(path)?;
    f.seek(SeekFrom::End(-1))?;
    let mut b = [0u8; 1];
    f.read_exact(&mut b)?;
    Ok(b[0] == b'\n')
}

/// `path` relative to `base` when it lies below it, else unchanged.
pub fn relative_to(path: &Path, base: &Path) -> PathBuf {
    let canon = |p: &Path| p.canonicalize().unwrap_or_else(|_| p.to_path_buf());
    let (p, b) = (canon(path), canon(base));
    match p.strip_prefix(&b) {
        Ok(rel) => rel.to_path_buf(),
        Err(_) => p,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths() {
        assert_eq!(
            relative_to(Path::new("/a/b/c.json"), Path::new("/a")),
            PathBuf::from("b/c.json")
        );
        assert_eq!(
            relative_to(Path::new("/x/c.json"), Path::new("/a")),
            PathBuf::from("/x/c.json")
        );
    }
}
