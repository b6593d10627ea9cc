//! Score naming, session aggregates, descriptive statistics and the
//! aspect comparisons by Welch's t-test.

mod describe;
mod group;
mod record;
mod welch;

pub use describe::{describe, mean, quantile_sorted, sample_variance, Summary};
pub use group::{compare_aspects, group_population, AspectComparison, DEFAULT_ASPECT_COMPARISONS};
pub use record::{per_turn_values, prefix_scores, ScoreRecord, AGGREGATE_PREFIXES, ANSWER_SCORES, SPARQL_BASE_SCORES};
pub use welch::{ln_gamma, regularized_incomplete_beta, student_t_two_tailed, welch_t_test, StatTestResult};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("unknown aspect {0:?}")]
    UnknownAspect(String),
}
