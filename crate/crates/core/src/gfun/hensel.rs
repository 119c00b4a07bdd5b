//! Power-series branches of plane curves `P(X, Y) = 0` by Newton iteration.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::{self, val_int};
use crate::poly::Poly;
use crate::series::QSeries;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HenselError {
    #[error("P(0, y0) is not zero")]
    NotOnCurve,
    #[error("the branch through y0 is singular: dP/dY(0, y0) = 0")]
    SingularBranch,
}

/// `Σ_j c_j(X) Y^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiPoly {
    pub y_coeffs: Vec<Poly>,
}

impl BiPoly {
    pub fn new(y_coeffs: Vec<Poly>) -> Self {
        BiPoly { y_coeffs }
    }

    pub fn dy(&self) -> BiPoly {
        BiPoly {
            y_coeffs: self.y_coeffs.iter().enumerate().skip(1).map(|(j, c)| c.scale(&arith::int(j as i64))).collect(),
        }
    }

    pub fn eval_at_zero(&self, y: &BigRational) -> BigRational {
        self.y_coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * y + c.coeff(0))
    }

    /// `P(X, y(X))` to the order of `y`.
    pub fn eval_series(&self, y: &QSeries) -> QSeries {
        let n = y.order();
        let lift = |c: &Poly| QSeries::new(0, (0..=n).map(|k| c.coeff(k as usize)).collect());
        let mut acc = QSeries::zero(n);
        for c in self.y_coeffs.iter().rev() {
            acc = &(&acc * y) + &lift(c);
        }
        acc
    }
}

/// Smallest `B` with `B^n a_n ∈ ℤ` over the scanned prefix, and the
/// denominators seen at a few checkpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EisensteinProfile {
    pub base: BigInt,
    pub checkpoints: Vec<(i64, BigInt)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HenselSeries {
    pub series: QSeries,
    pub profile: EisensteinProfile,
}

fn eisenstein_profile(y: &QSeries) -> EisensteinProfile {
    let dens: Vec<BigInt> = (1..=y.order()).map(|n| y.coeff(n).denom().clone()).collect();
    let mut primes: Vec<u64> = Vec::new();
    for d in &dens {
        let mut m = d.clone();
        let mut p = 2u64;
        while !m.is_one() && p < 100_000 {
            if val_int(&m, p) > 0 {
                if !primes.contains(&p) {
                    primes.push(p);
                }
                while (&m % p).is_zero() {
                    m /= p;
                }
            }
            p += 1;
        }
    }
    let mut base = BigInt::one();
    for p in primes {
        let e = dens
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let n = i as i64 + 1;
                (val_int(d, p) + n - 1) / n
            })
            .max()
            .unwrap_or(0);
        base *= BigInt::from(p).pow(e as u32);
    }
    let step = (y.order() / 8).max(1);
    let checkpoints = (1..=y.order()).step_by(step as usize).map(|n| (n, dens[(n - 1) as usize].clone())).collect();
    EisensteinProfile { base, checkpoints }
}

/// The unique series `y` with `y(0) = y0` and `P(X, y(X)) = 0`.
pub fn hensel_series(p: &BiPoly, y0: &BigRational, order: i64) -> Result<HenselSeries, HenselError> {
    if !p.eval_at_zero(y0).is_zero() {
        return Err(HenselError::NotOnCurve);
    }
    let dp = p.dy();
    if dp.eval_at_zero(y0).is_zero() {
        return Err(HenselError::SingularBranch);
    }
    let mut y = QSeries::constant(y0.clone(), order);
    let mut good = 1i64;
    while good <= order {
        let f = p.eval_series(&y);
        let d = dp.eval_series(&y).reciprocal().expect("unit constant term");
        y = &y - &(&f * &d);
        good *= 2;
    }
    debug_assert!(p.eval_series(&y).is_zero());
    let profile = eisenstein_profile(&y);
    Ok(HenselSeries { series: y, profile })
}
