//! p-adic numbers with tracked precision.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::arith::{mod_inverse, val_int};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("division by a p-adic number that is zero at its precision")]
    DivisionByZero,
    #[error("not a square in Q_{0}")]
    NotASquare(u64),
    #[error("square roots are implemented for odd primes only")]
    EvenPrime,
}

/// `p^valuation · unit`, the unit known modulo `p^precision`.
///
/// A value that is zero at its precision is stored with `unit = 0`,
/// `precision = 0` and `valuation` equal to the absolute precision.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicNum {
    prime: u64,
    valuation: i64,
    unit: BigInt,
    precision: i64,
}

fn ppow(p: u64, k: i64) -> BigInt {
    BigInt::from(p).pow(k.max(0) as u32)
}

impl PadicNum {
    /// Zero known modulo `p^abs_prec`.
    pub fn zero(prime: u64, abs_prec: i64) -> Self {
        PadicNum { prime, valuation: abs_prec, unit: BigInt::zero(), precision: 0 }
    }

    /// `p^v · u` with `u` reduced modulo `p^rel_prec`; `u` need not be a unit.
    fn build(prime: u64, v: i64, u: BigInt, rel_prec: i64) -> Self {
        let abs = v + rel_prec;
        if rel_prec <= 0 {
            return Self::zero(prime, abs);
        }
        let m = ppow(prime, rel_prec);
        let u = u.mod_floor(&m);
        if u.is_zero() {
            return Self::zero(prime, abs);
        }
        let k = val_int(&u, prime);
        let u = if k == 0 { u } else { u / ppow(prime, k) };
        PadicNum { prime, valuation: v + k, unit: u, precision: rel_prec - k }
    }

    pub fn from_rational(x: &BigRational, prime: u64, abs_prec: i64) -> Self {
        if x.is_zero() {
            return Self::zero(prime, abs_prec);
        }
        let vn = val_int(x.numer(), prime);
        let vd = val_int(x.denom(), prime);
        let v = vn - vd;
        let rel = abs_prec - v;
        if rel <= 0 {
            return Self::zero(prime, abs_prec);
        }
        let m = ppow(prime, rel);
        let n = x.numer() / ppow(prime, vn);
        let d = x.denom() / ppow(prime, vd);
        let u = n * mod_inverse(&d, &m).expect("unit denominator") % &m;
        Self::build(prime, v, u, rel)
    }

    pub fn from_int(n: &BigInt, prime: u64, abs_prec: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(n.clone()), prime, abs_prec)
    }

    pub fn from_i64(n: i64, prime: u64, abs_prec: i64) -> Self {
        Self::from_int(&BigInt::from(n), prime, abs_prec)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// Valuation; for a value that is zero at its precision this is the
    /// absolute precision (a lower bound for the true valuation).
    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    pub fn unit(&self) -> &BigInt {
        &self.unit
    }

    /// Relative precision.
    pub fn precision(&self) -> i64 {
        self.precision
    }

    /// The value is known modulo `p^abs_precision`.
    pub fn abs_precision(&self) -> i64 {
        self.valuation + self.precision
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_zero()
    }

    /// Representative in `[0, p^k)` when the value is integral, as an integer
    /// congruent modulo `p^k` with `k = min(abs_precision, k)`.
    pub fn residue(&self, k: i64) -> Option<BigInt> {
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        if self.valuation < 0 {
            return None;
        }
        let m = ppow(self.prime, k);
        Some((&self.unit * ppow(self.prime, self.valuation)).mod_floor(&m))
    }

    /// Rational representative `p^v·u`.
    pub fn to_rational(&self) -> BigRational {
        if self.valuation >= 0 {
            BigRational::from_integer(&self.unit * ppow(self.prime, self.valuation))
        } else {
            BigRational::new(self.unit.clone(), ppow(self.prime, -self.valuation))
        }
    }

    /// Reduces the absolute precision to at most `k`.
    pub fn reduce(&self, k: i64) -> Self {
        if k >= self.abs_precision() {
            return self.clone();
        }
        if self.is_zero() {
            return Self::zero(self.prime, k);
        }
        Self::build(self.prime, self.valuation, self.unit.clone(), k - self.valuation)
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Self::build(self.prime, self.valuation, -self.unit.clone(), self.precision)
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.prime, o.prime);
        let abs = self.abs_precision().min(o.abs_precision());
        if self.is_zero() {
            return o.reduce(abs);
        }
        if o.is_zero() {
            return self.reduce(abs);
        }
        let v = self.valuation.min(o.valuation);
        let a = &self.unit * ppow(self.prime, self.valuation - v);
        let b = &o.unit * ppow(self.prime, o.valuation - v);
        Self::build(self.prime, v, a + b, abs - v)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.prime, o.prime);
        match (self.is_zero(), o.is_zero()) {
            (true, true) => Self::zero(self.prime, self.valuation + o.valuation),
            (true, false) => Self::zero(self.prime, self.valuation + o.valuation),
            (false, true) => Self::zero(self.prime, self.valuation + o.valuation),
            (false, false) => {
                let rel = self.precision.min(o.precision);
                Self::build(self.prime, self.valuation + o.valuation, &self.unit * &o.unit, rel)
            }
        }
    }

    pub fn inv(&self) -> Result<Self, PadicError> {
        if self.is_zero() {
            return Err(PadicError::DivisionByZero);
        }
        let m = ppow(self.prime, self.precision);
        let u = mod_inverse(&self.unit, &m).expect("unit");
        Ok(Self::build(self.prime, -self.valuation, u, self.precision))
    }

    pub fn div(&self, o: &Self) -> Result<Self, PadicError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, n: u32) -> Self {
        if n == 0 {
            return Self::from_i64(1, self.prime, self.precision.max(1));
        }
        let mut acc: Option<PadicNum> = None;
        let mut b = self.clone();
        let mut e = n;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => b.clone(),
                    Some(a) => a.mul(&b),
                });
            }
            e >>= 1;
            if e == 0 {
                return acc.unwrap();
            }
            b = b.mul(&b);
        }
    }

    /// Square root whose unit part reduces to the smaller residue in
    /// `[1, (p−1)/2]` modulo `p` (odd primes only).
    pub fn sqrt(&self) -> Result<Self, PadicError> {
        if self.prime == 2 {
            return Err(PadicError::EvenPrime);
        }
        if self.is_zero() {
            return Ok(Self::zero(self.prime, Integer::div_floor(&self.valuation, &2)));
        }
        if self.valuation % 2 != 0 {
            return Err(PadicError::NotASquare(self.prime));
        }
        let p = self.prime;
        let pb = BigInt::from(p);
        let u0 = self.unit.mod_floor(&pb);
        let r0 = (1..=(p - 1) / 2)
            .map(BigInt::from)
            .find(|r| (r * r - &u0).mod_floor(&pb).is_zero())
            .ok_or(PadicError::NotASquare(p))?;
        // Newton: r ← (r + u/r)/2, doubling the correct digits each step
        let k = self.precision;
        let m = ppow(p, k);
        let two_inv = mod_inverse(&BigInt::from(2), &m).unwrap();
        let mut r = r0;
        let mut good = 1;
        while good < k {
            let ri = mod_inverse(&r, &m).unwrap();
            r = ((&r + &self.unit * ri) * &two_inv).mod_floor(&m);
            good *= 2;
        }
        Ok(Self::build(p, self.valuation / 2, r, k))
    }

    /// `Some(true)` if the two values agree modulo `p^k`, `Some(false)` if
    /// they certainly differ there, `None` if precision is insufficient.
    pub fn congruent(&self, o: &Self, k: i64) -> Option<bool> {
        let d = self.sub(o);
        if !d.is_zero() && d.valuation < k {
            return Some(false);
        }
        if d.abs_precision() >= k {
            Some(true)
        } else {
            None
        }
    }
}

impl fmt::Display for PadicNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "O({}^{})", self.prime, self.valuation);
        }
        let u = if self.unit.is_negative() { self.unit.clone() + ppow(self.prime, self.precision) } else { self.unit.clone() };
        if self.valuation == 0 {
            write!(f, "{} + O({}^{})", u, self.prime, self.abs_precision())
        } else {
            write!(f, "{}*{}^{} + O({}^{})", u, self.prime, self.valuation, self.prime, self.abs_precision())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn rational_round_trip_mod_p_power() {
        let x = PadicNum::from_rational(&rat(50, 3), 5, 10);
        assert_eq!(x.valuation(), 2);
        assert_eq!(x.abs_precision(), 10);
        let y = PadicNum::from_rational(&rat(50, 3), 5, 10);
        assert_eq!(x.congruent(&y, 10), Some(true));
        let three = PadicNum::from_i64(3, 5, 10);
        let back = x.mul(&three);
        assert_eq!(back.residue(10).unwrap(), BigInt::from(50));
    }

    #[test]
    fn inverse_and_division() {
        let x = PadicNum::from_rational(&rat(7, 25), 5, 20);
        let xi = x.inv().unwrap();
        assert_eq!(xi.valuation(), 2);
        let one = x.mul(&xi);
        assert_eq!(one.congruent(&PadicNum::from_i64(1, 5, 30), one.abs_precision()), Some(true));
        assert!(PadicNum::zero(5, 10).inv().is_err());
    }

    #[test]
    fn addition_tracks_precision() {
        let a = PadicNum::from_i64(1, 3, 5);
        let b = PadicNum::from_i64(-1, 3, 8);
        let s = a.add(&b);
        assert!(s.is_zero());
        assert_eq!(s.abs_precision(), 5);
        let c = PadicNum::from_i64(9, 3, 5).add(&PadicNum::from_i64(18, 3, 7));
        assert_eq!(c.valuation(), 3);
        assert_eq!(c.abs_precision(), 5);
    }

    #[test]
    fn square_roots() {
        // 609 ≡ 4 mod 5
        let d = PadicNum::from_i64(609, 5, 40);
        let r = d.sqrt().unwrap();
        assert_eq!(r.mul(&r).congruent(&d, 40), Some(true));
        assert_eq!(r.unit().mod_floor(&BigInt::from(5)), BigInt::from(2));
        assert!(PadicNum::from_i64(2, 5, 10).sqrt().is_err());
        assert!(PadicNum::from_i64(5, 5, 10).sqrt().is_err());
        let s = PadicNum::from_i64(4 * 49, 7, 30).sqrt().unwrap();
        assert_eq!(s.valuation(), 1);
    }
}
