use serde::{Deserialize, Serialize};

use crate::Scalar;

pub fn mean<F: Scalar>(xs: &[F]) -> F {
    if xs.is_empty() {
        return F::nan();
    }
    xs.iter().fold(F::zero(), |acc, &x| acc + x) / F::from_count(xs.len())
}

/// Unbiased (n - 1) variance, two-pass.
pub fn sample_variance<F: Scalar>(xs: &[F]) -> F {
    if xs.len() < 2 {
        return F::nan();
    }
    let m = mean(xs);
    let ss = xs.iter().fold(F::zero(), |acc, &x| acc + (x - m) * (x - m));
    ss / F::from_count(xs.len() - 1)
}

/// Quantile of sorted data by linear interpolation between closest ranks.
pub fn quantile_sorted<F: Scalar>(sorted: &[F], q: F) -> F {
    match sorted.len() {
        0 => F::nan(),
        1 => sorted[0],
        n => {
            let pos = q.max(F::zero()).min(F::one()) * F::from_count(n - 1);
            let lo = pos.floor();
            let i = lo.to_usize().unwrap_or(0).min(n - 1);
            let j = (i + 1).min(n - 1);
            let frac = pos - lo;
            sorted[i] + (sorted[j] - sorted[i]) * frac
        }
    }
}

/// Five-number summary plus count and mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary<F> {
    pub count: usize,
    pub mean: F,
    pub min: F,
    pub q1: F,
    pub median: F,
    pub q3: F,
    pub max: F,
}

/// Summarizes a sample; `None` when it is empty. NaN values are ignored.
pub fn describe<F: Scalar>(values: &[F]) -> Option<Summary<F>> {
    let mut sorted: Vec<F> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    if sorted.is_empty() {
        return None;
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN filtered"));
    Some(Summary {
        count: sorted.len(),
        mean: mean(&sorted),
        min: sorted[0],
        q1: quantile_sorted(&sorted, F::lit(0.25)),
        median: quantile_sorted(&sorted, F::lit(0.5)),
        q3: quantile_sorted(&sorted, F::lit(0.75)),
        max: sorted[sorted.len() - 1],
    })
}
