//! Integer and rational helpers shared by the exact modules.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// gcd that stays fast when one operand is much larger than the other.
///
/// `num-bigint` uses a binary gcd, which costs one pass per bit of the
/// larger operand when the sizes are unbalanced.
pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let mut x = a.abs();
    let mut y = b.abs();
    loop {
        if y.is_zero() {
            return x;
        }
        if x.is_zero() {
            return y;
        }
        let (bx, by) = (x.bits(), y.bits());
        if bx.abs_diff(by) < 64 {
            return x.gcd(&y);
        }
        if bx > by {
            x %= &y;
        } else {
            y %= &x;
        }
    }
}

pub fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::zero();
    }
    (a / gcd(a, b) * b).abs()
}

/// Builds a rational without the generic reduction when the denominator is 1.
pub fn ratio(num: BigInt, den: BigInt) -> BigRational {
    if den.is_one() {
        return BigRational::from_integer(num);
    }
    let g = gcd(&num, &den);
    let (mut n, mut d) = if g.is_one() { (num, den) } else { (num / &g, den / &g) };
    if d.sign() == Sign::Minus {
        n = -n;
        d = -d;
    }
    BigRational::new_raw(n, d)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    ratio(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// p-adic valuation of a nonzero integer.
pub fn val_int(n: &BigInt, p: u64) -> i64 {
    assert!(!n.is_zero(), "valuation of zero");
    let p = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// p-adic valuation of a rational; `None` for zero.
pub fn val_rat(x: &BigRational, p: u64) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(val_int(x.numer(), p) - val_int(x.denom(), p))
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    // deterministic for all 64-bit n
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Parses `a`, `-a`, `a/b`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.parse::<BigInt>().ok()?, BigInt::one()),
    };
    if d.is_zero() {
        return None;
    }
    Some(ratio(n, d))
}

/// `num/den` with the denominator always written.
pub fn fmt_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Short form: integers without `/1`.
pub fn fmt_rational_short(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        fmt_rational(x)
    }
}

/// Convergents of the continued fraction of `x`.
pub fn convergents(x: &BigRational) -> Vec<BigRational> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut n = x.numer().clone();
    let mut d = x.denom().clone();
    while !d.is_zero() {
        let (a, r) = n.div_mod_floor(&d);
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        out.push(BigRational::new(h2.clone(), k2.clone()));
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        n = std::mem::replace(&mut d, r);
    }
    out
}

/// Simplest rational in the closed interval `[lo, hi]` (Stern–Brocot descent).
pub fn simplest_between(lo: &BigRational, hi: &BigRational) -> BigRational {
    assert!(lo <= hi);
    let fl = lo.floor();
    if fl == *lo {
        return fl;
    }
    if fl < hi.floor() || hi.is_integer() {
        return fl + BigRational::one();
    }
    let lo_f = lo - &fl;
    let hi_f = hi - &fl;
    // both fractional parts in (0,1): recurse on reciprocals
    let inner = simplest_between(&hi_f.recip(), &lo_f.recip());
    fl + inner.recip()
}

/// Inverse of `a` modulo `m` (m > 1), if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Squarefree part of a positive integer by trial division; `None` if a cofactor
/// above the search bound remains that is not proved squarefree.
pub fn squarefree_part(n: &BigInt) -> Option<(BigInt, BigInt)> {
    assert!(n.is_positive());
    let mut rest = n.clone();
    let mut core = BigInt::one();
    let mut square_root = BigInt::one();
    let mut d = BigInt::from(2u32);
    let limit = BigInt::from(2_000_000u64);
    while &d * &d <= rest && d < limit {
        let mut e = 0u32;
        while (&rest % &d).is_zero() {
            rest /= &d;
            e += 1;
        }
        if e % 2 == 1 {
            core *= &d;
        }
        square_root *= d.pow(e / 2);
        d += 1u32;
    }
    if &d * &d <= rest {
        let r = rest.sqrt();
        if &r * &r == rest {
            square_root *= r;
        } else if rest > &limit * &limit * &limit {
            return None;
        } else {
            core *= rest;
        }
    } else {
        core *= rest;
    }
    Some((core, square_root))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_matches_library_on_unbalanced_inputs() {
        let big = BigInt::from(3u32).pow(4000) * 14;
        let small = BigInt::from(21u32);
        assert_eq!(gcd(&big, &small), BigInt::from(21));
        assert_eq!(gcd(&small, &big), BigInt::from(21));
        assert_eq!(gcd(&BigInt::zero(), &small), small);
    }

    #[test]
    fn simplest_rational_in_interval() {
        let lo = rat(333, 1000);
        let hi = rat(334, 1000);
        assert_eq!(simplest_between(&lo, &hi), rat(1, 3));
        assert_eq!(simplest_between(&rat(3, 2), &rat(5, 2)), int(2));
        assert_eq!(simplest_between(&rat(-7, 3), &rat(-7, 3)), rat(-7, 3));
        let x = rat(-355, 113);
        assert_eq!(simplest_between(&(x.clone() - rat(1, 10_000_000)), &(x.clone() + rat(1, 10_000_000))), x);
    }

    #[test]
    fn convergents_of_known_fraction() {
        let c = convergents(&rat(415, 93));
        assert_eq!(c.last().unwrap(), &rat(415, 93));
        assert_eq!(c[0], int(4));
        assert_eq!(c[1], rat(9, 2));
    }

    #[test]
    fn squarefree() {
        let (c, r) = squarefree_part(&BigInt::from(1183 * 348)).unwrap();
        assert_eq!(c, BigInt::from(609));
        assert_eq!(r, BigInt::from(26));
    }

    #[test]
    fn valuations() {
        assert_eq!(val_rat(&rat(50, 3), 5), Some(2));
        assert_eq!(val_rat(&rat(3, 250), 5), Some(-3));
        assert_eq!(val_rat(&int(0), 5), None);
    }
}
