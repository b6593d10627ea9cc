use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::Scalar;

/// Precision, recall and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf<F> {
    pub precision: F,
    pub recall: F,
    pub f1: F,
}

impl<F: Scalar> Prf<F> {
    pub fn new(precision: F, recall: F) -> Self {
        let sum = precision + recall;
        let f1 = if sum > F::zero() {
            F::lit(2.0) * precision * recall / sum
        } else {
            F::zero()
        };
        Prf { precision, recall, f1 }
    }

    pub fn perfect() -> Self {
        Prf {
            precision: F::one(),
            recall: F::one(),
            f1: F::one(),
        }
    }

    pub fn zero() -> Self {
        Prf {
            precision: F::zero(),
            recall: F::zero(),
            f1: F::zero(),
        }
    }

    /// `given_hits` of `given` items are correct and `expected_hits` of
    /// `expected` items were found. Both empty counts as a perfect match;
    /// exactly one empty side scores zero.
    pub fn from_counts(given_hits: usize, given: usize, expected_hits: usize, expected: usize) -> Self {
        match (given, expected) {
            (0, 0) => Self::perfect(),
            (0, _) | (_, 0) => Self::zero(),
            _ => Self::new(
                F::from_count(given_hits) / F::from_count(given),
                F::from_count(expected_hits) / F::from_count(expected),
            ),
        }
    }
}

/// Compares two value sets.
pub fn set_prf<F: Scalar, T: Ord>(given: &BTreeSet<T>, expected: &BTreeSet<T>) -> Prf<F> {
    let hits = given.intersection(expected).count();
    Prf::from_counts(hits, given.len(), hits, expected.len())
}

/// Syntax bonus plus weighted result-set F1.
pub fn combined<F: Scalar>(parses: bool, f1: F) -> F {
    let parse = if parses { F::one() } else { F::zero() };
    F::lit(0.2) * parse + F::lit(0.8) * f1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identity_disjoint_and_overlap() {
        let p: Prf<f64> = set_prf(&set(&["a", "b"]), &set(&["a", "b"]));
        assert_eq!(p, Prf::perfect());
        let p: Prf<f64> = set_prf(&set(&["a"]), &set(&["b"]));
        assert_eq!(p, Prf::zero());
        let p: Prf<f64> = set_prf(&set(&["a", "b"]), &set(&["b", "c"]));
        assert_eq!((p.precision, p.recall, p.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn empty_conventions() {
        let empty = set(&[]);
        let p: Prf<f64> = set_prf(&empty, &empty);
        assert_eq!(p, Prf::perfect());
        let p: Prf<f64> = set_prf(&empty, &set(&["a"]));
        assert_eq!(p, Prf::zero());
        let p: Prf<f64> = set_prf(&set(&["a"]), &empty);
        assert_eq!(p, Prf::zero());
    }

    #[test]
    fn combined_weights() {
        assert_eq!(combined(true, 0.0f64), 0.2);
        assert_eq!(combined(false, 0.0f64), 0.0);
        assert_eq!(combined(true, 1.0f64), 1.0);
        assert_eq!(combined(true, 0.0f32), 0.2f32);
    }

    #[test]
    fn works_in_single_precision() {
        let p: Prf<f32> = set_prf(&set(&["a", "b", "c"]), &set(&["a"]));
        assert!((p.precision - 1.0 / 3.0).abs() < 1e-6);
        assert_eq!(p.recall, 1.0);
        assert!((p.f1 - 0.5).abs() < 1e-6);
    }
}
