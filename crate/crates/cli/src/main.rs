use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use kgbench_cli::report::load_records;
use kgbench_cli::{reeval, run, write_report, GroupBy, ReportFormat, ReportOptions, RunManifest};

#[derive(Parser)]
#[command(
    name = "kgbench",
    version,
    about = "Benchmark language models on SPARQL and RDF tasks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every adapter on every task of a manifest, resuming where a
    /// previous run stopped.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        /// Results file; defaults to <outputDir>/results.jsonl.
        #[arg(long)]
        results: Option<PathBuf>,
        /// Overrides concurrencyLimit from the manifest.
        #[arg(long)]
        concurrency: Option<usize>,
    },
    /// Rescore stored sessions with the current scoring code.
    Reeval {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a results file.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "model")]
        group_by: GroupBy,
        #[arg(long, default_value = "max_combined")]
        metric: String,
        #[arg(long, value_enum, num_args = 1.., default_values = ["csv"])]
        format: Vec<ReportFormat>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run {
            manifest,
            results,
            concurrency,
        } => {
            let loaded = RunManifest::load(&manifest)?;
            let path = results.unwrap_or_else(|| loaded.results_path());
            let summary = run(&loaded, &path, concurrency)?;
            println!(
                "{} sessions written, {} skipped as already present, {} failed to start -> {}",
                summary.written,
                summary.skipped,
                summary.failed.len(),
                path.display()
            );
        }
        Command::Reeval { results, out } => {
            let summary = reeval(&results, &out)?;
            println!("{} sessions rescored -> {}", summary.rescored, out.display());
            for b in &summary.flagged {
                println!("flagged line {}: {}", b.line, b.reason);
            }
        }
        Command::Report {
            results,
            out,
            group_by,
            metric,
            format,
        } => {
            let records = load_records(&results)?;
            let written = write_report(
                &records,
                &ReportOptions {
                    group_by,
                    metric: &metric,
                    formats: &format,
                    out_dir: &out,
                },
            )
            .with_context(|| format!("reporting {metric}"))?;
            for p in written {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}
