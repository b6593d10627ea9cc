use serde::{Deserialize, Serialize};

use super::describe::{mean, sample_variance};
use super::StatsError;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StatTestResult<F> {
    pub t: F,
    /// Two-tailed.
    pub p: F,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: F,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: F,
    pub mean_b: F,
}

/// Welch's unequal-variance t-test of `a` against `b`.
pub fn welch_t_test<F: Scalar>(a: &[F], b: &[F]) -> Result<StatTestResult<F>, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::InsufficientData(format!(
            "need at least two values per population, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (mean_a, mean_b) = (mean(a), mean(b));
    let va = sample_variance(a) / F::from_count(a.len());
    let vb = sample_variance(b) / F::from_count(b.len());
    let se2 = va + vb;
    if se2 <= F::zero() {
        return Err(StatsError::InsufficientData(
            "both populations have zero variance".into(),
        ));
    }
    let t = (mean_a - mean_b) / se2.sqrt();
    let df = se2 * se2 / (va * va / F::from_count(a.len() - 1) + vb * vb / F::from_count(b.len() - 1));
    Ok(StatTestResult {
        t,
        p: student_t_two_tailed(t, df),
        df,
        n_a: a.len(),
        n_b: b.len(),
        mean_a,
        mean_b,
    })
}

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
pub fn student_t_two_tailed<F: Scalar>(t: F, df: F) -> F {
    if t.is_nan() || df.is_nan() {
        return F::nan();
    }
    if t.is_infinite() {
        return F::zero();
    }
    let x = df / (df + t * t);
    let p = regularized_incomplete_beta(x, df / F::lit(2.0), F::lit(0.5));
    p.max(F::zero()).min(F::one())
}

/// ln Γ(x) for x > 0, Lanczos approximation (g = 7, 9 terms).
pub fn ln_gamma<F: Scalar>(x: F) -> F {
    #[allow(clippy::excessive_precision)]
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let half = F::lit(0.5);
    if x < half {
        // Reflection formula.
        let pi = F::lit(std::f64::consts::PI);
        return (pi / (pi * x).sin()).ln() - ln_gamma(F::one() - x);
    }
    let x = x - F::one();
    let mut sum = F::lit(COEF[0]);
    for (i, c) in COEF.iter().enumerate().skip(1) {
        sum = sum + F::lit(*c) / (x + F::from_count(i));
    }
    let t = x + F::lit(7.5);
    F::lit(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + half) * t.ln() - t + sum.ln()
}

/// I_x(a, b) via the continued fraction, using the symmetry
/// I_x(a, b) = 1 - I_{1-x}(b, a) where it converges faster.
pub fn regularized_incomplete_beta<F: Scalar>(x: F, a: F, b: F) -> F {
    if x <= F::zero() {
        return F::zero();
    }
    if x >= F::one() {
        return F::one();
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (F::one() - x).ln();
    let front = ln_front.exp();
    if x < (a + F::one()) / (a + b + F::lit(2.0)) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        F::one() - front * beta_continued_fraction(F::one() - x, b, a) / b
    }
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_continued_fraction<F: Scalar>(x: F, a: F, b: F) -> F {
    let max_iter = 500;
    let eps = F::epsilon();
    let tiny = F::min_positive_value() / eps;
    let one = F::one();
    let two = F::lit(2.0);
    let (qab, qap, qam) = (a + b, a + one, a - one);
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for m in 1..=max_iter {
        let m = F::from_count(m);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let delta = d * c;
        h = h * delta;
        if (delta - one).abs() <= eps {
            break;
        }
    }
    h
}
