use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use kgbench::stats::{compare_aspects, describe, ScoreRecord, StatTestResult, Summary, DEFAULT_ASPECT_COMPARISONS};
use kgbench::tasks::Aspect;

use crate::results::read_results;
use crate::svg::boxplot_svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GroupBy {
    Model,
    Task,
    Aspect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Csv,
    Markdown,
    #[value(name = "svgBoxplot", alias = "svg-boxplot")]
    SvgBoxplot,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("metric {0} does not occur in any score record")]
    UnknownMetric(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupRow {
    pub group: String,
    pub summary: Summary<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub a: String,
    pub b: String,
    pub result: Result<StatTestResult<f64>, String>,
}

/// Score records of a results file; unreadable lines are logged and skipped.
pub fn load_records(path: &Path) -> anyhow::Result<Vec<ScoreRecord>> {
    let (lines, bad) = read_results(path).with_context(|| format!("reading {}", path.display()))?;
    for b in &bad {
        log::warn!("{}:{}: skipping unreadable line: {}", path.display(), b.line, b.reason);
    }
    Ok(lines.into_iter().map(|(_, l)| l.scores).collect())
}

fn check_metric(records: &[ScoreRecord], metric: &str) -> Result<(), ReportError> {
    if records.iter().any(|r| r.values.contains_key(metric)) {
        Ok(())
    } else {
        Err(ReportError::UnknownMetric(metric.to_owned()))
    }
}

fn groups(records: &[ScoreRecord], group_by: GroupBy, metric: &str) -> BTreeMap<String, Vec<f64>> {
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in records {
        let Some(v) = r.get(metric) else { continue };
        let labels = match group_by {
            GroupBy::Model => vec![r.model.clone()],
            GroupBy::Task => vec![r.task.clone()],
            GroupBy::Aspect => Aspect::labels_for(&r.aspects).iter().map(ToString::to_string).collect(),
        };
        for label in labels {
            out.entry(label).or_default().push(v);
        }
    }
    out
}

/// Descriptive statistics of `metric` per group, ordered by group name.
pub fn summarize(records: &[ScoreRecord], group_by: GroupBy, metric: &str) -> Result<Vec<GroupRow>, ReportError> {
    if records.is_empty() {
        return Ok(Vec::new());
    }
    check_metric(records, metric)?;
    Ok(groups(records, group_by, metric)
        .into_iter()
        .filter_map(|(group, values)| describe(&values).map(|summary| GroupRow { group, summary }))
        .collect())
}

/// Welch tests for the default aspect pairs.
pub fn aspect_comparisons(records: &[ScoreRecord], metric: &str) -> Vec<ComparisonRow> {
    DEFAULT_ASPECT_COMPARISONS
        .iter()
        .map(|(a, b)| ComparisonRow {
            a: (*a).to_owned(),
            b: (*b).to_owned(),
            result: compare_aspects(records, a, b, metric)
                .map(|c| c.result)
                .map_err(|e| e.to_string()),
        })
        .collect()
}

pub struct ReportOptions<'a> {
    pub group_by: GroupBy,
    pub metric: &'a str,
    pub formats: &'a [ReportFormat],
    pub out_dir: &'a Path,
}

/// Writes the requested report files and returns their paths.
pub fn write_report(records: &[ScoreRecord], opts: &ReportOptions) -> anyhow::Result<Vec<PathBuf>> {
    if records.is_empty() {
        log::warn!("no score records; nothing to report");
        return Ok(Vec::new());
    }
    let rows = summarize(records, opts.group_by, opts.metric)?;
    let comparisons = (opts.group_by == GroupBy::Aspect).then(|| aspect_comparisons(records, opts.metric));
    std::fs::create_dir_all(opts.out_dir).with_context(|| format!("creating {}", opts.out_dir.display()))?;
    let stem = format!("summary-{}-{}", group_name(opts.group_by), file_safe(opts.metric));
    let mut written = Vec::new();

    for format in opts.formats {
        match format {
            ReportFormat::Csv => {
                let path = opts.out_dir.join(format!("{stem}.csv"));
                std::fs::write(&path, summary_csv(&rows)?)?;
                written.push(path);
                if let Some(c) = &comparisons {
                    let path = opts.out_dir.join(format!("welch-{}.csv", file_safe(opts.metric)));
                    std::fs::write(&path, comparison_csv(opts.metric, c)?)?;
                    written.push(path);
                }
            }
            ReportFormat::Markdown => {
                let path = opts.out_dir.join(format!("{stem}.md"));
                std::fs::write(&path, markdown(opts, &rows, comparisons.as_deref()))?;
                written.push(path);
            }
            ReportFormat::SvgBoxplot => {
                let mut by_task: BTreeMap<&str, Vec<&ScoreRecord>> = BTreeMap::new();
                for r in records {
                    by_task.entry(&r.task).or_default().push(r);
                }
                for (task, recs) in by_task {
                    let owned: Vec<ScoreRecord> = recs.into_iter().cloned().collect();
                    let per_model: Vec<(String, Vec<f64>)> =
                        groups(&owned, GroupBy::Model, opts.metric).into_iter().collect();
                    if per_model.is_empty() {
                        continue;
                    }
                    let path = opts
                        .out_dir
                        .join(format!("boxplot-{}-{}.svg", file_safe(task), file_safe(opts.metric)));
                    std::fs::write(&path, boxplot_svg(task, opts.metric, &per_model))?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}

fn group_name(g: GroupBy) -> &'static str {
    match g {
        GroupBy::Model => "model",
        GroupBy::Task => "task",
        GroupBy::Aspect => "aspect",
    }
}

fn file_safe(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn summary_csv(rows: &[GroupRow]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["group", "count", "mean", "min", "q1", "median", "q3", "max"])?;
    for row in rows {
        let m = &row.summary;
        w.write_record(
            std::iter::once(row.group.clone())
                .chain(std::iter::once(m.count.to_string()))
                .chain([m.mean, m.min, m.q1, m.median, m.q3, m.max].map(|v| v.to_string())),
        )?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn comparison_csv(metric: &str, rows: &[ComparisonRow]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["a", "b", "metric", "nA", "nB", "meanA", "meanB", "t", "df", "p", "note"])?;
    for row in rows {
        match &row.result {
            Ok(r) => w.write_record([
                row.a.clone(),
                row.b.clone(),
                metric.to_owned(),
                r.n_a.to_string(),
                r.n_b.to_string(),
                r.mean_a.to_string(),
                r.mean_b.to_string(),
                r.t.to_string(),
                r.df.to_string(),
                r.p.to_string(),
                String::new(),
            ])?,
            Err(note) => w.write_record([
                row.a.as_str(),
                row.b.as_str(),
                metric,
                "",
                "",
                "",
                "",
                "",
                "",
                "",
                note.as_str(),
            ])?,
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn markdown(opts: &ReportOptions, rows: &[GroupRow], comparisons: Option<&[ComparisonRow]>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {} by {}\n", opts.metric, group_name(opts.group_by));
    let _ = writeln!(
        s,
        "| {} | count | mean | min | q1 | median | q3 | max |",
        group_name(opts.group_by)
    );
    let _ = writeln!(s, "|---|---:|---:|---:|---:|---:|---:|---:|");
    for r in rows {
        let m = &r.summary;
        let _ = writeln!(
            s,
            "| {} | {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} |",
            r.group.replace('|', "\\|"),
            m.count,
            m.mean,
            m.min,
            m.q1,
            m.median,
            m.q3,
            m.max
        );
    }
    if let Some(rows) = comparisons {
        let _ = writeln!(s, "\n## Welch t-tests\n");
        let _ = writeln!(s, "| a | b | nA | nB | meanA | meanB | t | df | p |");
        let _ = writeln!(s, "|---|---|---:|---:|---:|---:|---:|---:|---:|");
        for row in rows {
            match &row.result {
                Ok(r) => {
                    let _ = writeln!(
                        s,
                        "| {} | {} | {} | {} | {:.4} | {:.4} | {:.3} | {:.1} | {:.3e} |",
                        row.a, row.b, r.n_a, r.n_b, r.mean_a, r.mean_b, r.t, r.df, r.p
                    );
                }
                Err(note) => {
                    let _ = writeln!(s, "| {} | {} | | | | | | | {} |", row.a, row.b, note);
                }
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use kgbench::tasks::{AspectTags, KgInfoKind, Serialization, TaskType};

    fn rec(model: &str, task: &str, ser: Serialization, v: f64) -> ScoreRecord {
        ScoreRecord {
            values: BTreeMap::from([("max_combined".to_owned(), v)]),
            model: model.into(),
            task: task.into(),
            task_type: TaskType::T2s,
            entry_id: "e".into(),
            execution_index: 0,
            timestamp: String::new(),
            aspects: AspectTags {
                serialization: Some(ser),
                kg_info: [KgInfoKind::FullGraph].into(),
            },
        }
    }

    #[test]
    fn summary_rows_per_model() {
        let records = [
            rec("a", "t", Serialization::Turtle, 1.0),
            rec("a", "t", Serialization::Turtle, 0.0),
            rec("b", "t", Serialization::Jsonld, 0.5),
        ];
        let rows = summarize(&records, GroupBy::Model, "max_combined").unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(
            (rows[0].group.as_str(), rows[0].summary.count, rows[0].summary.mean),
            ("a", 2, 0.5)
        );
        let csv = summary_csv(&rows).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "group,count,mean,min,q1,median,q3,max");

        let aspects = summarize(&records, GroupBy::Aspect, "max_combined").unwrap();
        let names: Vec<_> = aspects.iter().map(|r| r.group.as_str()).collect();
        assert!(names.contains(&"turtle") && names.contains(&"jsonld") && names.contains(&"graph"));
    }

    #[test]
    fn unknown_metric_is_rejected() {
        let records = [rec("a", "t", Serialization::Turtle, 1.0)];
        assert!(matches!(
            summarize(&records, GroupBy::Model, "nope"),
            Err(ReportError::UnknownMetric(_))
        ));
        assert!(summarize(&[], GroupBy::Model, "nope").unwrap().is_empty());
    }

    #[test]
    fn insufficient_comparisons_carry_a_note() {
        let records = [rec("a", "t", Serialization::Turtle, 1.0)];
        let rows = aspect_comparisons(&records, "max_combined");
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.result.is_err()));
        let csv = comparison_csv("max_combined", &rows).unwrap();
        assert_eq!(csv.lines().count(), 5);
    }
}
