use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;

use kgbench_cli::report::{load_records, summarize};
use kgbench_cli::{read_results, reeval, run, GroupBy, RunManifest};
use serde_json::{json, Value};

fn dataset(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../datasets")
        .join(rel)
        .canonicalize()
        .unwrap()
}

const TASKS: [&str; 3] = [
    "orga/t2s-orga.json",
    "orga/t2a-orga-turtle.json",
    "wikidata-mini/ssf-lcquad.json",
];

fn manifest(dir: &Path, executions: usize, extra_adapters: Vec<Value>) -> PathBuf {
    let mut adapters = vec![
        json!({"name": "reference", "kind": "reference"}),
        json!({"name": "stubborn", "kind": "mock", "mode": "perSession",
               "script": ["```sparql\nSELECT ?x WHERE {\n```", "nothing", "still nothing"]}),
    ];
    adapters.extend(extra_adapters);
    let m = json!({
        "adapters": adapters,
        "tasks": TASKS.iter().map(|t| dataset(t)).collect::<Vec<_>>(),
        "executionsPerTask": executions,
        "outputDir": "out",
        "concurrencyLimit": 4,
    });
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&m).unwrap()).unwrap();
    path
}

fn keys(path: &Path) -> Vec<(String, String, usize)> {
    read_results(path)
        .unwrap()
        .0
        .into_iter()
        .map(|(_, l)| (l.session.model, l.session.task, l.session.execution_index))
        .collect()
}

#[test]
fn one_line_per_execution_and_resume_skips_done_work() {
    let dir = tempfile::tempdir().unwrap();
    let loaded = RunManifest::load(&manifest(dir.path(), 5, vec![])).unwrap();
    let results = loaded.results_path();
    let summary = run(&loaded, &results, None).unwrap();
    assert_eq!(summary.written, 2 * TASKS.len() * 5);
    assert!(summary.failed.is_empty(), "{:?}", summary.failed);

    let mut per_pair: BTreeMap<(String, String), usize> = BTreeMap::new();
    for (model, task, _) in keys(&results) {
        *per_pair.entry((model, task)).or_default() += 1;
    }
    assert_eq!(per_pair.len(), 2 * TASKS.len());
    assert!(per_pair.values().all(|&n| n == 5));
    let mut entries: BTreeMap<(String, String), BTreeSet<String>> = BTreeMap::new();
    for (_, l) in read_results(&results).unwrap().0 {
        entries
            .entry((l.session.model, l.session.task))
            .or_default()
            .insert(l.session.entry_id);
    }
    assert!(
        entries.values().all(|ids| ids.len() == 5),
        "each entry once: {entries:?}"
    );

    // Simulate a crash: keep four complete lines and a torn fifth.
    let text = std::fs::read_to_string(&results).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let torn = format!("{}\n{}", lines[..4].join("\n"), &lines[4][..lines[4].len() / 2]);
    std::fs::write(&results, torn).unwrap();

    let again = run(&loaded, &results, Some(2)).unwrap();
    assert_eq!(again.skipped, 4);
    assert_eq!(again.written, 2 * TASKS.len() * 5 - 4);
    let k = keys(&results);
    let unique: BTreeSet<_> = k.iter().cloned().collect();
    assert_eq!(k.len(), unique.len(), "duplicate keys after resume");
    assert_eq!(unique.len(), 2 * TASKS.len() * 5);

    let third = run(&loaded, &results, None).unwrap();
    assert_eq!((third.written, third.skipped), (0, 2 * TASKS.len() * 5));
}

#[test]
fn fifty_executions_cover_each_entry_ten_times() {
    let dir = tempfile::tempdir().unwrap();
    let loaded = RunManifest::load(&manifest(dir.path(), 50, vec![])).unwrap();
    let results = loaded.results_path();
    run(&loaded, &results, None).unwrap();
    let mut per_entry: BTreeMap<(String, String, String), usize> = BTreeMap::new();
    for (_, line) in read_results(&results).unwrap().0 {
        *per_entry
            .entry((line.session.model, line.session.task, line.session.entry_id))
            .or_default() += 1;
    }
    assert_eq!(per_entry.len(), 2 * TASKS.len() * 5);
    assert!(per_entry.values().all(|&n| n == 10), "{per_entry:?}");
}

#[test]
fn reeval_of_a_fresh_run_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let loaded = RunManifest::load(&manifest(dir.path(), 5, vec![])).unwrap();
    let results = loaded.results_path();
    run(&loaded, &results, None).unwrap();

    let out = dir.path().join("out/reeval.jsonl");
    let summary = reeval(&results, &out).unwrap();
    assert!(summary.flagged.is_empty());
    let before = std::fs::read_to_string(&results).unwrap();
    let after = std::fs::read_to_string(&out).unwrap();
    assert_eq!(before, after);

    // A broken line is flagged and the others still go through.
    let mut lines: Vec<String> = before.lines().map(str::to_owned).collect();
    lines.insert(2, "{\"not\": \"a result\"}".into());
    let torn = lines[7].clone();
    lines[7] = torn[..torn.len() / 3].to_owned();
    let mut v: Value = serde_json::from_str(&lines[5]).unwrap();
    v["session"]["entryId"] = json!("missing-entry");
    lines[5] = v.to_string();
    std::fs::write(&results, lines.join("\n") + "\n").unwrap();
    let summary = reeval(&results, &out).unwrap();
    assert_eq!(summary.flagged.iter().map(|b| b.line).collect::<Vec<_>>(), [3, 6, 8]);
    assert_eq!(summary.rescored, lines.len() - 3);
}

#[test]
fn reeval_after_an_expectation_change_touches_only_that_entry() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("orga");
    std::fs::create_dir_all(&data).unwrap();
    for f in ["graph.ttl", "t2s-orga.json"] {
        std::fs::copy(dataset("orga").join(f), data.join(f)).unwrap();
    }
    let m = json!({
        "adapters": [{"name": "reference", "kind": "reference"}],
        "tasks": ["orga/t2s-orga.json"],
        "executionsPerTask": 10,
        "outputDir": "out",
    });
    std::fs::write(dir.path().join("m.json"), m.to_string()).unwrap();
    let loaded = RunManifest::load(&dir.path().join("m.json")).unwrap();
    let results = loaded.results_path();
    run(&loaded, &results, None).unwrap();

    // Drop one expected value of the first entry.
    let task_path = data.join("t2s-orga.json");
    let mut task: Value = serde_json::from_str(&std::fs::read_to_string(&task_path).unwrap()).unwrap();
    let changed = task["entries"][0]["id"].as_str().unwrap().to_owned();
    task["entries"][0]["expected"]["values"].as_array_mut().unwrap().pop();
    std::fs::write(&task_path, task.to_string()).unwrap();

    let out = dir.path().join("reeval.jsonl");
    assert!(reeval(&results, &out).unwrap().flagged.is_empty());
    let before = read_results(&results).unwrap().0;
    let after = read_results(&out).unwrap().0;
    assert_eq!(before.len(), after.len());
    let mut touched = 0;
    for ((_, b), (_, a)) in before.iter().zip(&after) {
        let transcript = |l: &kgbench_cli::ResultLine| {
            l.session
                .turns
                .iter()
                .map(|t| (t.role, t.content.clone(), t.timestamp.clone()))
                .collect::<Vec<_>>()
        };
        assert_eq!(transcript(a), transcript(b));
        if a.session.entry_id == changed {
            touched += 1;
            assert!(a.scores.get("last_f1measure").unwrap() < 1.0);
            assert_eq!(a.scores.get("last_answerParse"), Some(1.0));
        } else {
            assert_eq!(a.scores, b.scores);
        }
    }
    assert_eq!(touched, 2);
}

#[test]
fn replayed_run_reproduces_scores() {
    let dir = tempfile::tempdir().unwrap();
    let loaded = RunManifest::load(&manifest(dir.path(), 5, vec![])).unwrap();
    let results = loaded.results_path();
    run(&loaded, &results, None).unwrap();

    let replay_dir = dir.path().join("replay");
    std::fs::create_dir_all(&replay_dir).unwrap();
    let replay = RunManifest::load(&manifest(
        &replay_dir,
        5,
        vec![json!({"name": "replayed", "kind": "replay", "resultsFile": results, "sourceModel": "reference"})],
    ))
    .unwrap();
    let replay_results = replay.results_path();
    run(&replay, &replay_results, None).unwrap();

    let scores = |path: &Path, model: &str| -> BTreeMap<(String, usize), BTreeMap<String, f64>> {
        read_results(path)
            .unwrap()
            .0
            .into_iter()
            .filter(|(_, l)| l.session.model == model)
            .map(|(_, l)| ((l.session.task, l.session.execution_index), l.scores.values))
            .collect()
    };
    let original = scores(&results, "reference");
    assert_eq!(original.len(), TASKS.len() * 5);
    assert_eq!(scores(&replay_results, "replayed"), original);
}

#[test]
fn report_means_match_an_independent_computation() {
    let dir = tempfile::tempdir().unwrap();
    let loaded = RunManifest::load(&manifest(dir.path(), 10, vec![])).unwrap();
    let results = loaded.results_path();
    run(&loaded, &results, None).unwrap();

    // Oracle: straight from the raw JSON.
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for line in std::fs::read_to_string(&results).unwrap().lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        if let Some(x) = v["scores"]["values"]["max_combined"].as_f64() {
            let e = sums
                .entry(v["session"]["model"].as_str().unwrap().to_owned())
                .or_default();
            e.0 += x;
            e.1 += 1;
        }
    }
    let records = load_records(&results).unwrap();
    let rows = summarize(&records, GroupBy::Model, "max_combined").unwrap();
    assert_eq!(rows.len(), sums.len());
    for row in &rows {
        let (sum, n) = sums[&row.group];
        assert_eq!(row.summary.count, n);
        assert!((row.summary.mean - sum / n as f64).abs() < 1e-12);
    }
    assert_eq!(rows.iter().find(|r| r.group == "reference").unwrap().summary.mean, 1.0);
}

fn kgbench() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_kgbench"));
    c.env("RUST_LOG", "error");
    c
}

#[test]
fn binary_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), 5, vec![]);
    let out = kgbench().args(["run", "--manifest"]).arg(&m).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("30 sessions written"));
    let results = dir.path().join("out/results.jsonl");

    let report_dir = dir.path().join("report");
    let out = kgbench()
        .args([
            "report",
            "--group-by",
            "task",
            "--metric",
            "max_combined",
            "--format",
            "csv",
            "markdown",
            "svgBoxplot",
        ])
        .arg("--results")
        .arg(&results)
        .arg("--out")
        .arg(&report_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(report_dir.join("summary-task-max_combined.csv").exists());
    assert!(report_dir.join("summary-task-max_combined.md").exists());
    let svgs = std::fs::read_dir(&report_dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".svg"))
        .count();
    // The answer task has no max_combined, so only the two query tasks get a figure.
    assert_eq!(svgs, 2);

    let unknown = kgbench()
        .args(["report", "--metric", "noSuchScore"])
        .arg("--results")
        .arg(&results)
        .arg("--out")
        .arg(&report_dir)
        .output()
        .unwrap();
    assert!(!unknown.status.success());
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("noSuchScore"));

    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let status = kgbench()
        .args(["report", "--results"])
        .arg(&empty)
        .arg("--out")
        .arg(dir.path().join("empty-report"))
        .output()
        .unwrap();
    assert!(status.status.success());
}

#[test]
fn configuration_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), 7, vec![]);
    let out = kgbench().args(["run", "--manifest"]).arg(&m).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("multiple of 5"));

    let secret_var = "KGBENCH_TEST_UNSET_KEY";
    let m = manifest(
        dir.path(),
        5,
        vec![
            json!({"name": "remote", "kind": "httpProvider", "endpointUrl": "http://127.0.0.1:9/v1/chat/completions",
                    "modelName": "x", "apiKeyEnvVar": secret_var, "requestsPerMinute": 60, "maxRetries": 0}),
        ],
    );
    let out = kgbench()
        .env_remove(secret_var)
        .args(["run", "--manifest"])
        .arg(&m)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains(secret_var));
    assert!(!dir.path().join("out/results.jsonl").exists());
}
