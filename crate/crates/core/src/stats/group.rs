use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::record::ScoreRecord;
use super::welch::{welch_t_test, StatTestResult};
use super::StatsError;
use crate::tasks::Aspect;

/// Aspect pairs compared by default in aspect reports.
pub const DEFAULT_ASPECT_COMPARISONS: [(&str, &str); 4] = [
    ("turtle", "jsonld"),
    ("iris", "schema"),
    ("iris", "fullGraph"),
    ("graph", "schema"),
];

fn parse_aspect(name: &str) -> Result<Aspect, StatsError> {
    Aspect::from_str(name).map_err(|_| StatsError::UnknownAspect(name.to_owned()))
}

/// Metric values of the records whose task carries the aspect. Records
/// without the metric (sessions that produced no scored answer) are left out.
pub fn group_population(records: &[ScoreRecord], aspect: &str, metric: &str) -> Result<Vec<f64>, StatsError> {
    let aspect = parse_aspect(aspect)?;
    Ok(records
        .iter()
        .filter(|r| aspect.matches(&r.aspects))
        .filter_map(|r| r.get(metric))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AspectComparison {
    pub a: String,
    pub b: String,
    pub metric: String,
    pub result: StatTestResult<f64>,
}

pub fn compare_aspects(
    records: &[ScoreRecord],
    a: &str,
    b: &str,
    metric: &str,
) -> Result<AspectComparison, StatsError> {
    let pa = group_population(records, a, metric)?;
    let pb = group_population(records, b, metric)?;
    Ok(AspectComparison {
        a: a.to_owned(),
        b: b.to_owned(),
        metric: metric.to_owned(),
        result: welch_t_test(&pa, &pb)?,
    })
}
