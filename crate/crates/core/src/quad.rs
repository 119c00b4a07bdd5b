//! Elements `a + b·√D` of a real or imaginary quadratic field, `D` squarefree.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{self, fmt_rational_short};
use crate::ball::{Ball, ComplexBall};
use crate::padic::{PadicError, PadicNum};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadNum {
    a: BigRational,
    b: BigRational,
    d: BigInt,
}

impl QuadNum {
    pub fn rational(a: BigRational) -> Self {
        QuadNum { a, b: BigRational::zero(), d: BigInt::one() }
    }

    /// `a + b√d`; `d` is reduced to its squarefree part.
    pub fn new(a: BigRational, b: BigRational, d: &BigInt) -> Self {
        assert!(!d.is_zero());
        let sign: i32 = if d.is_negative() { -1 } else { 1 };
        let (core, root) = arith::squarefree_part(&d.abs()).expect("nonzero");
        let b = b * BigRational::from_integer(root);
        let d = core * sign;
        if b.is_zero() || d.is_one() {
            let a = if d.is_one() { a + b } else { a };
            return Self::rational(a);
        }
        QuadNum { a, b, d }
    }

    /// `√x` for a rational `x`, as an element of `ℚ(√x)`.
    pub fn sqrt_of(x: &BigRational) -> Self {
        if x.is_zero() {
            return Self::rational(BigRational::zero());
        }
        // √(n/m) = √(n·m)/m
        Self::new(BigRational::zero(), BigRational::new(BigInt::one(), x.denom().clone()), &(x.numer() * x.denom()))
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    /// Squarefree radicand (1 for rationals).
    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn common(&self, o: &Self) -> BigInt {
        if self.is_rational() {
            o.d.clone()
        } else {
            assert!(o.is_rational() || o.d == self.d, "elements of different quadratic fields");
            self.d.clone()
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let d = self.common(o);
        Self::new(&self.a + &o.a, &self.b + &o.b, &d)
    }

    pub fn neg(&self) -> Self {
        QuadNum { a: -&self.a, b: -&self.b, d: self.d.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let d = self.common(o);
        let dr = BigRational::from_integer(d.clone());
        Self::new(&self.a * &o.a + &self.b * &o.b * dr, &self.a * &o.b + &self.b * &o.a, &d)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::new(&self.a * k, &self.b * k, &self.d)
    }

    pub fn conj(&self) -> Self {
        QuadNum { a: self.a.clone(), b: -&self.b, d: self.d.clone() }
    }

    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(self.d.clone())
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        Some(self.conj().scale(&n.recip()))
    }

    /// Real embedding with `√D > 0`; `None` for imaginary fields.
    pub fn to_ball(&self, prec: u64) -> Option<Ball> {
        let a = Ball::from_rational(&self.a, prec);
        if self.is_rational() {
            return Some(a);
        }
        if self.d.is_negative() {
            return None;
        }
        let s = Ball::from_int(&self.d, prec + 8).sqrt()?;
        Some(a.add(&s.mul(&Ball::from_rational(&self.b, prec + 8))).with_prec(prec))
    }

    /// Complex embedding with `√D > 0` or `√D = i√|D|`.
    pub fn to_complex_ball(&self, prec: u64) -> ComplexBall {
        let a = Ball::from_rational(&self.a, prec);
        if self.is_rational() {
            return ComplexBall::from_real(&a);
        }
        let s = Ball::from_int(&self.d.abs(), prec + 8).sqrt().expect("positive").mul(&Ball::from_rational(&self.b, prec + 8));
        if self.d.is_negative() {
            ComplexBall::from_parts(&a, &s.with_prec(prec))
        } else {
            ComplexBall::from_real(&a.add(&s).with_prec(prec))
        }
    }

    /// Machine form `a + b*sqrt(d)` with explicit rationals.
    pub fn exact_string(&self) -> String {
        if self.is_rational() {
            return arith::fmt_rational(&self.a);
        }
        format!("{} + {}*sqrt({})", arith::fmt_rational(&self.a), arith::fmt_rational(&self.b), self.d)
    }

    /// Inverse of [`QuadNum::exact_string`]; also accepts a bare rational.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once(" + ") {
            Some((a, rest)) if rest.contains("sqrt(") => {
                let (b, d) = rest.split_once("*sqrt(")?;
                let d: BigInt = d.strip_suffix(')')?.trim().parse().ok()?;
                Some(Self::new(arith::parse_rational(a)?, arith::parse_rational(b)?, &d))
            }
            _ => arith::parse_rational(s).map(Self::rational),
        }
    }

    /// Embedding into `ℚ_p` sending `√D` to the given square root.
    pub fn to_padic(&self, root: &PadicNum, abs_prec: i64) -> PadicNum {
        let p = root.prime();
        let a = PadicNum::from_rational(&self.a, p, abs_prec);
        if self.is_rational() {
            return a;
        }
        a.add(&PadicNum::from_rational(&self.b, p, abs_prec).mul(root))
    }

    /// A square root of `D` in `ℚ_p` (the one with the smaller residue).
    pub fn padic_sqrt_radicand(&self, p: u64, abs_prec: i64) -> Result<PadicNum, PadicError> {
        PadicNum::from_int(&self.d, p, abs_prec + 2).sqrt()
    }
}

impl fmt::Display for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return f.write_str(&fmt_rational_short(&self.a));
        }
        let b = if self.b.is_one() { String::new() } else if (-&self.b).is_one() { "-".into() } else { format!("{}*", fmt_rational_short(&self.b)) };
        if self.a.is_zero() {
            write!(f, "{b}sqrt({})", self.d)
        } else {
            write!(f, "{} + {b}sqrt({})", fmt_rational_short(&self.a), self.d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    #[test]
    fn field_operations() {
        let s = QuadNum::sqrt_of(&rat(348, 1183));
        assert_eq!(s.radicand(), &BigInt::from(609));
        assert_eq!(s.mul(&s), QuadNum::rational(rat(348, 1183)));
        let x = QuadNum::new(int(1), int(2), &BigInt::from(5));
        let y = x.inv().unwrap();
        assert_eq!(x.mul(&y), QuadNum::rational(int(1)));
        assert_eq!(QuadNum::sqrt_of(&rat(9, 4)), QuadNum::rational(rat(3, 2)));
        let b = x.to_ball(128).unwrap();
        assert!((b.to_f64() - (1.0 + 2.0 * 5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn padic_embedding_is_a_ring_map() {
        let x = QuadNum::new(rat(1, 3), int(2), &BigInt::from(609));
        let r = x.padic_sqrt_radicand(5, 40).unwrap();
        let lhs = x.mul(&x).to_padic(&r, 30);
        let ex = x.to_padic(&r, 30);
        assert_eq!(lhs.congruent(&ex.mul(&ex), 30), Some(true));
    }
}
