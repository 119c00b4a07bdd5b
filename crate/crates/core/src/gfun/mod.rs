//! Differential equations, functional relations, heights and the divisor
//! function.

mod height;
mod hensel;
mod ode;
mod relations;

pub use height::{weil_height, weil_height_rational, Height, HeightError};
pub use hensel::{hensel_series, BiPoly, EisensteinProfile, HenselError, HenselSeries};
pub use ode::{find_ode, find_ode_with, LinearOde, OdeFit, OdeOptions};
pub use relations::{find_functional_relations, specialize_relation, FoundRelation, RelationSearch};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfunError {
    #[error("need at least {needed} known coefficients, have {available}")]
    InsufficientCoefficients { needed: i64, available: i64 },
    #[error("linear algebra failed: {0}")]
    Linalg(String),
}

impl From<crate::linalg::LinalgError> for GfunError {
    fn from(e: crate::linalg::LinalgError) -> Self {
        GfunError::Linalg(e.to_string())
    }
}

/// Number of positive divisors.
pub fn divisor_count(mut n: u64) -> u64 {
    assert!(n >= 1);
    let mut d = 1;
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        d *= e + 1;
        p += 1;
    }
    if n > 1 {
        d *= 2;
    }
    d
}

/// Positive divisors in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut k = 1;
    while k * k <= n {
        if n % k == 0 {
            small.push(k);
            if k * k != n {
                large.push(n / k);
            }
        }
        k += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// `d(N)` for all `N ≤ n_max` (index 0 unused).
pub fn divisor_table(n_max: usize) -> Vec<u32> {
    let mut t = vec![0u32; n_max + 1];
    for k in 1..=n_max {
        for m in (k..=n_max).step_by(k) {
            t[m] += 1;
        }
    }
    t
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivisorBoundReport {
    pub eps: f64,
    pub n_max: u64,
    pub max_ratio: f64,
    pub argmax: u64,
    pub divisors_at_argmax: u64,
}

/// Scans `d(N)/N^eps` for `N ≤ n_max`.
pub fn check_divisor_bound(eps: f64, n_max: u64) -> DivisorBoundReport {
    let t = divisor_table(n_max as usize);
    let (mut best, mut arg) = (0.0f64, 1u64);
    for (n, &d) in t.iter().enumerate().skip(1) {
        let r = d as f64 / (n as f64).powf(eps);
        if r > best {
            best = r;
            arg = n as u64;
        }
    }
    DivisorBoundReport { eps, n_max, max_ratio: best, argmax: arg, divisors_at_argmax: t[arg as usize] as u64 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisor_function() {
        assert_eq!(divisor_count(1), 1);
        assert_eq!(divisor_count(12), 6);
        assert_eq!(divisor_count(97), 2);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        let t = divisor_table(100);
        assert!((1..=100).all(|n| t[n] as u64 == divisor_count(n as u64)));
    }

    #[test]
    fn divisor_bound_scan() {
        let r = check_divisor_bound(0.5, 10_000);
        assert_eq!(r.argmax, 12);
        assert!((r.max_ratio - 6.0 / 12f64.sqrt()).abs() < 1e-12);
    }
}
