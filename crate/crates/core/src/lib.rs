//! Benchmark harness for chat models working with SPARQL SELECT queries
//! over RDF knowledge graphs.
//!
//! Scores and statistics are generic over the float type; the aliases
//! below fix it to `f64` or `f32`.

pub mod dialog;
pub mod kg_store;
pub mod llm_adapters;
mod scalar;
pub mod scoring;
pub mod stats;
pub mod tasks;

pub use scalar::Scalar;

pub type Prf64 = scoring::Prf<f64>;
pub type Prf32 = scoring::Prf<f32>;
pub type SparqlScores64 = scoring::SparqlScores<f64>;
pub type SparqlScores32 = scoring::SparqlScores<f32>;
pub type AnswerScores64 = scoring::AnswerScores<f64>;
pub type AnswerScores32 = scoring::AnswerScores<f32>;
pub type StatTestResult64 = stats::StatTestResult<f64>;
pub type StatTestResult32 = stats::StatTestResult<f32>;
pub type Summary64 = stats::Summary<f64>;
pub type Summary32 = stats::Summary<f32>;
