//! Small statistics toolbox backing the verification suites: sample moments,
//! a Kolmogorov–Smirnov test and chi-square tests.

use crate::scalar::{real, Real};

/// Sample mean. Returns zero for an empty slice.
pub fn mean<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    xs.iter().copied().sum::<T>() / real(xs.len() as f64)
}

/// Unbiased sample variance (denominator `n - 1`); zero when `n < 2`.
pub fn sample_variance<T: Real>(xs: &[T]) -> T {
    if xs.len() < 2 {
        return T::zero();
    }
    let m = mean(xs);
    let ss = xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>();
    ss / real((xs.len() - 1) as f64)
}

/// Standard error of the sample mean, `sqrt(var / n)`.
pub fn standard_error<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    (sample_variance(xs) / real(xs.len() as f64)).sqrt()
}

/// Result of a one-sample Kolmogorov–Smirnov test.
#[derive(Clone, Copy, Debug)]
pub struct KsResult {
    /// Supremum distance between empirical and hypothesized CDF.
    pub statistic: f64,
    /// Asymptotic p-value (Kolmogorov distribution with the usual
    /// small-sample correction of the argument).
    pub p_value: f64,
    pub n: usize,
}

/// One-sample KS test of `sample` against the continuous CDF `cdf`.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    assert!(!sample.is_empty(), "KS test needs a non-empty sample");
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("KS sample contains NaN"));
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let upper = (i + 1) as f64 / n - f;
        let lower = f - i as f64 / n;
        d = d.max(upper).max(lower);
    }
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    KsResult {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
        n: xs.len(),
    }
}

/// Survival function of the Kolmogorov distribution,
/// `Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`.
fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64).powi(2) * x * x).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Result of a chi-square test.
#[derive(Clone, Copy, Debug)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Chi-square goodness-of-fit of observed counts against expected counts.
/// `expected` must be strictly positive and (up to rounding) sum to the same
/// total as `observed`.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> ChiSquareResult {
    assert_eq!(observed.len(), expected.len(), "cell count mismatch");
    assert!(observed.len() >= 2, "chi-square needs at least two cells");
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            assert!(e > 0.0, "expected cell count must be positive");
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let dof = observed.len() - 1;
    ChiSquareResult {
        statistic: stat,
        dof,
        p_value: chi_square_sf(stat, dof),
    }
}

/// Chi-square test of independence on a contingency table (rows x columns of
/// observed counts).
pub fn chi_square_independence(table: &[Vec<u64>]) -> ChiSquareResult {
    let rows = table.len();
    let cols = table.first().map_or(0, |r| r.len());
    assert!(rows >= 2 && cols >= 2, "table must be at least 2x2");
    assert!(table.iter().all(|r| r.len() == cols), "ragged table");
    let row_sums: Vec<f64> = table
        .iter()
        .map(|r| r.iter().map(|&c| c as f64).sum())
        .collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| table.iter().map(|r| r[j] as f64).sum())
        .collect();
    let total: f64 = row_sums.iter().sum();
    assert!(total > 0.0, "empty table");
    let mut stat = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &obs) in row.iter().enumerate() {
            let expected = row_sums[i] * col_sums[j] / total;
            if expected > 0.0 {
                let d = obs as f64 - expected;
                stat += d * d / expected;
            }
        }
    }
    let dof = (rows - 1) * (cols - 1);
    ChiSquareResult {
        statistic: stat,
        dof,
        p_value: chi_square_sf(stat, dof),
    }
}

/// Chi-square survival function `P(X > stat)` via statrs.
fn chi_square_sf(stat: f64, dof: usize) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let dist = ChiSquared::new(dof as f64).expect("dof >= 1");
    (1.0 - dist.cdf(stat)).clamp(0.0, 1.0)
}
