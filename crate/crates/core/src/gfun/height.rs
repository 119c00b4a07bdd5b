//! Absolute logarithmic Weil height.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith;
use crate::ball::{Ball, ComplexBall, Dyadic};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeightError {
    #[error("polynomial coefficients have a common factor")]
    NotPrimitive,
    #[error("polynomial must have degree at least 1 and nonzero constant term unless it is X")]
    BadPolynomial,
    #[error("root inclusion discs could not be separated")]
    Unseparated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Height {
    pub value: Ball,
    pub degree: usize,
}

const PREC: u64 = 192;

/// `log max(|p|, |q|)` for `x = p/q` in lowest terms.
pub fn weil_height_rational(x: &BigRational) -> Height {
    let m = x.numer().abs().max(x.denom().abs());
    if m.is_one() {
        return Height { value: Ball::zero(PREC), degree: 1 };
    }
    Height { value: Ball::from_int(&m, PREC).log().expect("positive"), degree: 1 }
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
}

/// Approximate roots by the Aberth–Ehrlich iteration in double precision.
fn aberth(c: &[BigInt]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let cf: Vec<Complex64> = c.iter().map(|x| Complex64::new(x.to_f64().unwrap(), 0.0)).collect();
    let df: Vec<Complex64> = cf.iter().enumerate().skip(1).map(|(i, a)| a * i as f64).collect();
    // Fujiwara-type radius
    let an = cf[n].norm();
    let r = (0..n).map(|i| (cf[i].norm() / an).powf(1.0 / (n - i) as f64)).fold(0.0, f64::max) * 2.0;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(r.max(1e-3), 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let p = horner(&cf, z[i]);
            let dp = horner(&df, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm() / z[i].norm().max(1.0));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

fn cball(z: &ComplexBall) -> ComplexBall {
    ComplexBall::new(z.re_mid().clone(), z.im_mid().clone(), Dyadic::zero(), z.prec())
}

fn eval_c(c: &[BigInt], z: &ComplexBall) -> ComplexBall {
    let p = z.prec();
    c.iter().rev().fold(ComplexBall::zero(p), |acc, a| acc.mul(z).add(&ComplexBall::from_real(&Ball::from_int(a, p))))
}

/// Height of the algebraic number with minimal polynomial `Σ c_i X^i`
/// (integer coefficients, assumed irreducible).
pub fn weil_height(c: &[BigInt]) -> Result<Height, HeightError> {
    let mut c: Vec<BigInt> = c.to_vec();
    while c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    if c.len() < 2 {
        return Err(HeightError::BadPolynomial);
    }
    let g = c.iter().fold(BigInt::zero(), |a, x| arith::gcd(&a, x));
    if !g.is_one() {
        return Err(HeightError::NotPrimitive);
    }
    let n = c.len() - 1;
    if n == 1 {
        if c[0].is_zero() {
            return Ok(Height { value: Ball::zero(PREC), degree: 1 });
        }
        return Ok(weil_height_rational(&BigRational::new(-c[0].clone(), c[1].clone())));
    }
    let dc: Vec<BigInt> = c.iter().enumerate().skip(1).map(|(i, a)| a * BigInt::from(i)).collect();
    // refine by Newton in high precision, keeping exact midpoints
    let mut z: Vec<ComplexBall> = aberth(&c)
        .into_iter()
        .map(|w| ComplexBall::new(Dyadic::from_f64(w.re), Dyadic::from_f64(w.im), Dyadic::zero(), PREC))
        .collect();
    for _ in 0..8 {
        for zi in z.iter_mut() {
            let p = eval_c(&c, zi);
            let dp = eval_c(&dc, zi);
            if let Some(step) = p.div(&dp) {
                let nz = zi.sub(&step);
                *zi = ComplexBall::new(
                    nz.re_mid().floor_to(PREC),
                    nz.im_mid().floor_to(PREC),
                    Dyadic::zero(),
                    PREC,
                );
            }
        }
    }
    // inclusion discs: n|p(z_i)| / (|a_n| ∏|z_i − z_j|)
    let an = Ball::from_int(&c[n].abs(), PREC);
    let mut radii = Vec::with_capacity(n);
    for i in 0..n {
        let num = eval_c(&c, &cball(&z[i])).abs_upper().mul(&Dyadic::from_i64(n as i64));
        let mut den = an.lower();
        for j in 0..n {
            if j != i {
                let d = cball(&z[i]).sub(&cball(&z[j]));
                let lo = abs_lower(&d);
                den = den.mul(&lo).floor_to(64);
            }
        }
        if den.is_zero() || den.is_negative() {
            return Err(HeightError::Unseparated);
        }
        let r = Ball::exact(num, 64).div(&Ball::exact(den, 64)).ok_or(HeightError::Unseparated)?.upper();
        radii.push(r);
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = abs_lower(&cball(&z[i]).sub(&cball(&z[j])));
            if d <= radii[i].add(&radii[j]) {
                return Err(HeightError::Unseparated);
            }
        }
    }
    // log M = log|a_n| + Σ log⁺|z_i|
    let mut sum = if c[n].abs().is_one() { Ball::zero(PREC) } else { an.log().unwrap() };
    let one = Dyadic::from_i64(1);
    for (zi, r) in z.iter().zip(&radii) {
        let m2 = zi.re_mid().mul(zi.re_mid()).add(&zi.im_mid().mul(zi.im_mid()));
        let m = Ball::exact(m2, PREC).sqrt().unwrap();
        let lo = m.lower().sub(r);
        let hi = m.upper().add(r);
        let term = if hi <= one {
            Ball::zero(PREC)
        } else if lo >= one {
            Ball::from_endpoints(&lo, &hi, PREC).log().unwrap()
        } else {
            let top = Ball::exact(hi, PREC).log().unwrap().upper();
            Ball::from_endpoints(&Dyadic::zero(), &top, PREC)
        };
        sum = sum.add(&term);
    }
    let value = sum.mul_rational(&arith::rat(1, n as i64));
    Ok(Height { value, degree: n })
}

fn abs_lower(z: &ComplexBall) -> Dyadic {
    let m2 = z.re_mid().mul(z.re_mid()).add(&z.im_mid().mul(z.im_mid()));
    let m = Ball::exact(m2, 64).sqrt().unwrap().lower();
    let l = m.sub(z.rad());
    if l.is_negative() {
        Dyadic::zero()
    } else {
        l.floor_to(64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn rational_heights() {
        let h = weil_height_rational(&rat(2, 3));
        assert!(h.value.contains_zero() == false);
        assert!((h.value.to_f64() - 3f64.ln()).abs() < 1e-15);
        assert!(weil_height_rational(&rat(1, 1)).value.contains_zero());
        let h2 = weil_height(&ints(&[-2, 3])).unwrap();
        assert!(h2.value.overlaps(&h.value));
    }

    #[test]
    fn golden_ratio() {
        let h = weil_height(&ints(&[-1, -1, 1])).unwrap();
        let want = ((1.0 + 5f64.sqrt()) / 2.0).ln() / 2.0;
        assert!((h.value.to_f64() - want).abs() < 1e-15);
        assert!(h.value.rad().magnitude() < -40);
    }

    #[test]
    fn roots_of_unity_have_height_zero() {
        let h = weil_height(&ints(&[1, 1, 1])).unwrap();
        assert!(h.value.contains_zero());
        assert!(h.value.abs_upper().magnitude() < -40);
    }

    #[test]
    fn not_primitive() {
        assert_eq!(weil_height(&ints(&[2, 4])), Err(HeightError::NotPrimitive));
    }
}
