//! Runner, re-evaluator and reporter behind the `kgbench` binary.

pub mod manifest;
pub mod reeval;
pub mod report;
pub mod results;
pub mod run;
pub mod svg;

pub use manifest::{LoadedManifest, ManifestError, RunManifest};
pub use reeval::{reeval, ReevalSummary};
pub use report::{write_report, GroupBy, ReportFormat, ReportOptions};
pub use results::{read_results, ResultLine, RunKey};
pub use run::{run, RunSummary};
