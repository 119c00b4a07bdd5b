//! Truncated power and Laurent series with exact rational coefficients.
//!
//! A [`QSeries`] stores `Σ_{n=offset}^{order} c_n X^n` and the promise that the
//! true series agrees with it modulo `X^(order+1)`. Coefficients are kept over
//! a common denominator so the heavy loops run on integers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::{self, gcd, lcm};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("inner series has a nonzero constant term")]
    NonzeroInnerConstant,
    #[error("series is not compositionally invertible")]
    NotInvertible,
    #[error("series has no nonzero known coefficient")]
    ZeroLeadingCoefficient,
    #[error("constant term must be 1")]
    BadConstantTerm,
    #[error("operation needs a power series, got offset {0}")]
    LaurentUnsupported(i64),
    #[error("malformed series cache: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QSeries {
    offset: i64,
    order: i64,
    num: Vec<BigInt>,
    den: BigInt,
}

impl QSeries {
    /// Series from rational coefficients starting at `offset`; the order is the
    /// last supplied exponent.
    pub fn new(offset: i64, coeffs: Vec<BigRational>) -> Self {
        let order = offset + coeffs.len() as i64 - 1;
        let den = coeffs.iter().fold(BigInt::one(), |acc, c| lcm(&acc, c.denom()));
        let num = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        Self::from_scaled(offset, order, num, den)
    }

    pub fn from_ints(offset: i64, coeffs: Vec<BigInt>) -> Self {
        let order = offset + coeffs.len() as i64 - 1;
        Self::from_scaled(offset, order, coeffs, BigInt::one())
    }

    pub fn from_i64(offset: i64, coeffs: &[i64]) -> Self {
        Self::from_ints(offset, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Series `num / den`; `num.len()` must equal `order - offset + 1`.
    pub fn from_scaled(offset: i64, order: i64, num: Vec<BigInt>, den: BigInt) -> Self {
        assert!(!den.is_zero());
        assert_eq!(num.len() as i64, (order - offset + 1).max(0));
        let mut s = QSeries { offset, order, num, den };
        s.normalize();
        s
    }

    pub fn zero(order: i64) -> Self {
        Self::constant(BigRational::zero(), order)
    }

    pub fn one(order: i64) -> Self {
        Self::constant(BigRational::one(), order)
    }

    pub fn constant(c: BigRational, order: i64) -> Self {
        let mut v = vec![BigRational::zero(); (order + 1).max(1) as usize];
        v[0] = c;
        let mut s = Self::new(0, v);
        s.order = order;
        s.num.truncate((order + 1).max(0) as usize);
        s
    }

    /// The series `X`, known to `order`.
    pub fn x(order: i64) -> Self {
        let mut v = vec![BigInt::zero(); (order + 1).max(2) as usize];
        v[1] = BigInt::one();
        Self::from_ints(0, v).truncate(order)
    }

    /// Monomial `c·X^k` known to `order`.
    pub fn monomial(c: BigRational, k: i64, order: i64) -> Self {
        let offset = k.min(order + 1);
        let len = (order - offset + 1).max(0) as usize;
        let mut v = vec![BigRational::zero(); len];
        if k <= order {
            v[0] = c;
        }
        let mut s = Self::new(offset, v);
        s.order = order;
        s
    }

    fn normalize(&mut self) {
        if self.den.is_negative() {
            self.den = -self.den.clone();
            for c in &mut self.num {
                *c = -c.clone();
            }
        }
        if self.den.is_one() {
            return;
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if g.is_one() {
                break;
            }
            g = gcd(&g, c);
        }
        if !g.is_one() {
            self.den /= &g;
            for c in &mut self.num {
                *c /= &g;
            }
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.num.len()
    }

    pub fn is_empty(&self) -> bool {
        self.num.is_empty()
    }

    /// Common denominator of the stored coefficients.
    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    /// Numerators over [`Self::denominator`], indexed from the offset.
    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    /// Coefficient of `X^n`; zero below the offset.
    ///
    /// # Panics
    /// If `n` exceeds the certified order.
    pub fn coeff(&self, n: i64) -> BigRational {
        assert!(n <= self.order, "coefficient {n} beyond order {}", self.order);
        if n < self.offset {
            return BigRational::zero();
        }
        arith::ratio(self.num[(n - self.offset) as usize].clone(), self.den.clone())
    }

    /// Integer coefficient of `X^n` for integral series.
    pub fn coeff_int(&self, n: i64) -> Option<BigInt> {
        if !self.den.is_one() {
            return None;
        }
        if n < self.offset {
            return Some(BigInt::zero());
        }
        self.num.get((n - self.offset) as usize).cloned()
    }

    pub fn coeffs(&self) -> Vec<BigRational> {
        (self.offset..=self.order).map(|n| self.coeff(n)).collect()
    }

    /// All coefficients are integers.
    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    /// Exponent of the first nonzero known coefficient.
    pub fn valuation(&self) -> Option<i64> {
        self.num.iter().position(|c| !c.is_zero()).map(|i| self.offset + i as i64)
    }

    fn val_or_order(&self) -> i64 {
        self.valuation().unwrap_or(self.order + 1)
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    /// Pads a polynomial with exact zeros up to `order`.
    pub fn extend_to(&self, order: i64) -> QSeries {
        if order <= self.order() {
            return self.truncate(order);
        }
        let mut num = self.numerators().to_vec();
        num.resize((order - self.offset() + 1) as usize, BigInt::zero());
        QSeries::from_scaled(self.offset(), order, num, self.denominator().clone())
    }

    pub fn truncate(&self, order: i64) -> Self {
        if order >= self.order {
            return self.clone();
        }
        let keep = (order - self.offset + 1).max(0) as usize;
        let mut s = QSeries {
            offset: self.offset.min(order + 1),
            order,
            num: self.num[..keep].to_vec(),
            den: self.den.clone(),
        };
        s.normalize();
        s
    }

    /// Same series stored from `offset`; dropped coefficients must be zero.
    pub fn with_offset(&self, offset: i64) -> Self {
        if offset <= self.offset {
            let mut num = vec![BigInt::zero(); (self.offset - offset) as usize];
            num.extend(self.num.iter().cloned());
            return QSeries { offset, order: self.order, num, den: self.den.clone() };
        }
        let drop = ((offset - self.offset) as usize).min(self.num.len());
        assert!(self.num[..drop].iter().all(Zero::is_zero), "with_offset would drop nonzero terms");
        QSeries {
            offset: offset.min(self.order + 1),
            order: self.order,
            num: self.num[drop..].to_vec(),
            den: self.den.clone(),
        }
    }

    /// Stored from exponent 0, if no negative powers are present.
    fn as_power_series(&self) -> Result<Self, SeriesError> {
        if self.offset >= 0 {
            return Ok(self.with_offset(0));
        }
        match self.valuation() {
            Some(v) if v < 0 => Err(SeriesError::LaurentUnsupported(self.offset)),
            _ => Ok(self.with_offset(0)),
        }
    }

    /// Integer numerators of the power-series part, indexed from exponent 0,
    /// padded or truncated to `len` entries.
    fn int_vec(&self, len: usize) -> Vec<BigInt> {
        let p = self.with_offset(0);
        let mut v: Vec<BigInt> = p.num.into_iter().take(len).collect();
        v.resize(len, BigInt::zero());
        v
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let num = self.num.iter().map(|x| x * c.numer()).collect();
        Self::from_scaled(self.offset, self.order, num, &self.den * c.denom())
    }

    pub fn scale_int(&self, c: i64) -> Self {
        self.scale(&arith::int(c))
    }

    /// Multiplication by `X^k`.
    pub fn shift(&self, k: i64) -> Self {
        QSeries { offset: self.offset + k, order: self.order + k, num: self.num.clone(), den: self.den.clone() }
    }

    /// Substitution `X ↦ X^k` for `k ≥ 1`.
    pub fn subs_power(&self, k: i64) -> Self {
        assert!(k >= 1);
        let order = (self.order + 1) * k - 1;
        let offset = self.offset * k;
        let mut num = vec![BigInt::zero(); (order - offset + 1).max(0) as usize];
        for (i, c) in self.num.iter().enumerate() {
            num[i * k as usize] = c.clone();
        }
        QSeries { offset, order, num, den: self.den.clone() }
    }

    fn add_impl(&self, other: &Self, negate: bool) -> Self {
        let offset = self.offset.min(other.offset);
        let order = self.order.min(other.order);
        let len = (order - offset + 1).max(0) as usize;
        let den = lcm(&self.den, &other.den);
        let fa = &den / &self.den;
        let fb = &den / &other.den;
        let mut num = vec![BigInt::zero(); len];
        for (i, slot) in num.iter_mut().enumerate() {
            let n = offset + i as i64;
            if n >= self.offset && n <= self.order {
                let c = &self.num[(n - self.offset) as usize];
                *slot += if fa.is_one() { c.clone() } else { c * &fa };
            }
            if n >= other.offset && n <= other.order {
                let c = &other.num[(n - other.offset) as usize];
                let t = if fb.is_one() { c.clone() } else { c * &fb };
                if negate {
                    *slot -= t;
                } else {
                    *slot += t;
                }
            }
        }
        Self::from_scaled(offset, order, num, den)
    }

    fn mul_impl(&self, other: &Self) -> Self {
        let order = (self.order + other.val_or_order()).min(other.order + self.val_or_order());
        let offset = self.offset + other.offset;
        let len = (order - offset + 1).max(0) as usize;
        let num = convolve(&self.num, &other.num, len);
        Self::from_scaled(offset, order, num, &self.den * &other.den)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result: Option<QSeries> = None;
        let mut base = self.clone();
        let mut e = e;
        if e == 0 {
            return Self::one(self.order - self.val_or_order().min(0));
        }
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => &r * &base,
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = &base * &base;
        }
        result.unwrap()
    }

    /// Termwise derivative; the order drops by one.
    pub fn derivative(&self) -> Self {
        let order = self.order - 1;
        let mut offset = self.offset - 1;
        let mut num: Vec<BigInt> = self
            .num
            .iter()
            .enumerate()
            .map(|(i, c)| c * BigInt::from(self.offset + i as i64))
            .collect();
        if self.offset == 0 && !num.is_empty() {
            num.remove(0);
            offset = 0;
        }
        let len = (order - offset + 1).max(0) as usize;
        num.truncate(len);
        num.resize(len, BigInt::zero());
        Self::from_scaled(offset.min(order + 1), order, num, self.den.clone())
    }

    /// `f ∘ g` for power series `f` and `g` with `g(0) = 0`.
    pub fn compose(&self, g: &Self) -> Result<Self, SeriesError> {
        let f = self.as_power_series()?;
        let g = g.as_power_series()?;
        if !g.num.is_empty() && !g.num[0].is_zero() {
            return Err(SeriesError::NonzeroInnerConstant);
        }
        let v = g.val_or_order();
        let order = g.order.min((f.order + 1) * v - 1);
        if order < 0 {
            return Ok(QSeries { offset: 0, order, num: vec![], den: BigInt::one() });
        }
        let len = (order + 1) as usize;
        let kmax = (order / v).min(f.order) as usize;
        let gv = g.int_vec(len);
        let dg = g.den.clone();
        // f_i · dg^(kmax-i) keeps every term integral
        let mut fi: Vec<BigInt> = f.int_vec(kmax + 1);
        if !dg.is_one() {
            let mut p = BigInt::one();
            for i in (0..=kmax).rev() {
                fi[i] *= &p;
                p *= &dg;
            }
        }
        let num = compose_ints(&fi, &gv, len, v as usize);
        let den = &f.den * dg.pow(kmax as u32);
        Ok(Self::from_scaled(0, order, num, den))
    }

    /// Compositional inverse by Newton iteration.
    pub fn comp_inverse(&self) -> Result<Self, SeriesError> {
        let f = self.as_power_series().map_err(|_| SeriesError::NotInvertible)?;
        if f.order < 1 || !f.num[0].is_zero() || f.num[1].is_zero() {
            return Err(SeriesError::NotInvertible);
        }
        let target = f.order;
        let c1 = f.coeff(1);
        let mut theta = QSeries::monomial(c1.recip(), 1, 1);
        let mut n = 1;
        while n < target {
            let n2 = (2 * n).min(target);
            let th = theta.with_offset(0).extend_exact(n2);
            let fth = f.truncate(n2).compose(&th)?;
            let resid = &fth - &QSeries::x(n2);
            let corr = &resid * &th.derivative().extend_exact(n2);
            theta = (&th - &corr).truncate(n2);
            n = n2;
        }
        Ok(theta)
    }

    /// Treats the stored terms as an exact polynomial known to `order`.
    fn extend_exact(&self, order: i64) -> Self {
        if order <= self.order {
            return self.truncate(order);
        }
        let mut num = self.num.clone();
        num.resize((order - self.offset + 1) as usize, BigInt::zero());
        QSeries { offset: self.offset, order, num, den: self.den.clone() }
    }

    /// Multiplicative inverse; Laurent inputs are handled through the valuation.
    pub fn reciprocal(&self) -> Result<Self, SeriesError> {
        let v = self.valuation().ok_or(SeriesError::ZeroLeadingCoefficient)?;
        let start = (v - self.offset) as usize;
        let u = &self.num[start..];
        let l = u.len();
        let c = &u[0];
        // R_n = -Σ_{k=1}^n U_k c^(k-1) R_{n-k};  1/U = Σ R_n X^n / c^(n+1)
        let mut w: Vec<BigInt> = Vec::with_capacity(l);
        let mut cp = BigInt::one();
        for (k, uk) in u.iter().enumerate() {
            if k == 0 {
                w.push(BigInt::zero());
                continue;
            }
            w.push(uk * &cp);
            cp *= c;
        }
        let mut r: Vec<BigInt> = Vec::with_capacity(l);
        r.push(BigInt::one());
        for n in 1..l {
            let mut acc = BigInt::zero();
            for k in 1..=n {
                if !w[k].is_zero() && !r[n - k].is_zero() {
                    acc += &w[k] * &r[n - k];
                }
            }
            r.push(-acc);
        }
        // common denominator c^l
        let mut num = vec![BigInt::zero(); l];
        let mut p = BigInt::one();
        for n in (0..l).rev() {
            num[n] = &r[n] * &p * &self.den;
            p *= c;
        }
        let order = self.order - 2 * v;
        Ok(Self::from_scaled(-v, order, num, p))
    }

    /// Square root with constant term 1.
    pub fn sqrt_one(&self) -> Result<Self, SeriesError> {
        let f = self.as_power_series().map_err(|_| SeriesError::BadConstantTerm)?;
        if f.num.is_empty() || f.num[0] != f.den {
            return Err(SeriesError::BadConstantTerm);
        }
        let l = f.num.len();
        let d = &f.den;
        // G_n = g_n·4^n·D^n satisfies G_n = (4^n D^(n-1) F_n - Σ G_k G_{n-k}) / 2
        let four_d = d * BigInt::from(4);
        let mut g: Vec<BigInt> = vec![BigInt::one()];
        let mut scale = BigInt::from(4); // 4^n D^(n-1)
        for n in 1..l {
            let mut acc = &scale * &f.num[n];
            for k in 1..n {
                acc -= &g[k] * &g[n - k];
            }
            debug_assert!((&acc % 2u32).is_zero());
            g.push(acc >> 1);
            scale *= &four_d;
        }
        let mut num = vec![BigInt::zero(); l];
        let mut p = BigInt::one();
        for n in (0..l).rev() {
            num[n] = &g[n] * &p;
            p *= &four_d;
        }
        let den = p / &four_d;
        Ok(Self::from_scaled(0, f.order, num, den))
    }

    /// Exact value of the truncated polynomial at a rational point.
    pub fn eval_truncated(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.num.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        if self.offset != 0 {
            acc *= x.pow(self.offset as i32);
        }
        acc / BigRational::from_integer(self.den.clone())
    }

    /// Cache text: a header then one `num/den` per line.
    pub fn to_cache_string(&self) -> String {
        let mut s = format!("QSERIES v1 offset={} order={}\n", self.offset, self.order);
        for c in self.coeffs() {
            s.push_str(&arith::fmt_rational(&c));
            s.push('\n');
        }
        s
    }

    pub fn from_cache_str(text: &str) -> Result<Self, SeriesError> {
        let bad = |m: &str| SeriesError::Parse(m.to_string());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty input"))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("QSERIES") || parts.next() != Some("v1") {
            return Err(bad("bad header"));
        }
        let field = |p: Option<&str>, key: &str| -> Result<i64, SeriesError> {
            p.and_then(|t| t.strip_prefix(key))
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad(&format!("missing {key}")))
        };
        let offset = field(parts.next(), "offset=")?;
        let order = field(parts.next(), "order=")?;
        let mut coeffs = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (n, d) = line.split_once('/').ok_or_else(|| bad("coefficient without denominator"))?;
            let n: BigInt = n.trim().parse().map_err(|_| bad("bad numerator"))?;
            let d: BigInt = d.trim().parse().map_err(|_| bad("bad denominator"))?;
            if d.is_zero() {
                return Err(bad("zero denominator"));
            }
            coeffs.push(arith::ratio(n, d));
        }
        if coeffs.len() as i64 != (order - offset + 1).max(0) {
            return Err(bad("coefficient count does not match header"));
        }
        let mut s = Self::new(offset, coeffs);
        s.order = order;
        Ok(s)
    }

    /// Human-readable form in variable `var`.
    pub fn display_in(&self, var: &str) -> String {
        let mut out = String::new();
        for n in self.offset..=self.order {
            let c = self.coeff(n);
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match n {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{n}"),
            };
            if mono.is_empty() {
                out.push_str(&arith::fmt_rational_short(&a));
            } else if a.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{}*{}", arith::fmt_rational_short(&a), mono));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out.push_str(&format!(" + O({var}^{})", self.order + 1));
        out
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in("X"))
    }
}

impl Add for &QSeries {
    type Output = QSeries;
    fn add(self, rhs: &QSeries) -> QSeries {
        self.add_impl(rhs, false)
    }
}

impl Sub for &QSeries {
    type Output = QSeries;
    fn sub(self, rhs: &QSeries) -> QSeries {
        self.add_impl(rhs, true)
    }
}

impl Mul for &QSeries {
    type Output = QSeries;
    fn mul(self, rhs: &QSeries) -> QSeries {
        self.mul_impl(rhs)
    }
}

impl Neg for &QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        self.scale_int(-1)
    }
}

/// Truncated integer convolution: the first `len` coefficients of `a·b`.
pub(crate) fn convolve(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in a.iter().enumerate() {
        if i >= len {
            break;
        }
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// Brent–Kung style evaluation of `Σ f_i g^i` over the integers, truncated to
/// `len` terms; `v` is a lower bound for the valuation of `g`.
fn compose_ints(f: &[BigInt], g: &[BigInt], len: usize, v: usize) -> Vec<BigInt> {
    let k = f.len();
    if k == 0 {
        return vec![BigInt::zero(); len];
    }
    let m = ((k as f64).sqrt().ceil() as usize).max(1);
    let mut pows: Vec<Vec<BigInt>> = Vec::with_capacity(m + 1);
    let mut unit = vec![BigInt::zero(); len];
    unit[0] = BigInt::one();
    pows.push(unit);
    for i in 1..=m {
        let next = convolve(&pows[i - 1], g, len);
        pows.push(next);
    }
    let blocks = (k + m - 1) / m;
    let block = |c: usize, need: usize| -> Vec<BigInt> {
        let mut acc = vec![BigInt::zero(); need];
        for i in 0..m {
            let idx = c * m + i;
            if idx >= k {
                break;
            }
            let fc = &f[idx];
            if fc.is_zero() {
                continue;
            }
            for (slot, p) in acc.iter_mut().zip(pows[i].iter()) {
                if !p.is_zero() {
                    *slot += fc * p;
                }
            }
        }
        acc
    };
    let need = |c: usize| len.saturating_sub(c * m * v).max(1).min(len);
    let mut r = block(blocks - 1, need(blocks - 1));
    for c in (0..blocks - 1).rev() {
        let l = need(c);
        let mut t = convolve(&r, &pows[m], l);
        t.resize(l, BigInt::zero());
        for (slot, b) in t.iter_mut().zip(block(c, l)) {
            *slot += b;
        }
        r = t;
    }
    r.resize(len, BigInt::zero());
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn s(c: &[i64]) -> QSeries {
        QSeries::from_i64(0, c)
    }

    #[test]
    fn add_and_mul_basics() {
        let x = QSeries::x(5);
        assert_eq!(&x + &QSeries::zero(5), x);
        let p = &s(&[1, 1, 0, 0]) * &s(&[1, -1, 0, 0]);
        assert_eq!(p, s(&[1, 0, -1, 0]));
        let s3 = s(&[0, 1, 9, 28]);
        assert_eq!(s3.scale_int(-5), s(&[0, -5, -45, -140]));
    }

    #[test]
    fn product_order_uses_valuations() {
        let a = s(&[0, 0, 1, 2]); // X^2 + 2X^3 + O(X^4)
        let b = s(&[1, 1]); // 1 + X + O(X^2)
        let p = &a * &b;
        assert_eq!(p.order(), 3);
        assert_eq!(p.coeff(3), int(3));
    }

    #[test]
    fn compose_examples() {
        let f = s(&[0, 0, 1, 0, 0]);
        let g = s(&[0, 1, 1, 0, 0]);
        assert_eq!(f.compose(&g).unwrap(), s(&[0, 0, 1, 2, 1]));
        assert_eq!(g.compose(&QSeries::x(4)).unwrap(), g);
        assert_eq!(f.compose(&s(&[1, 1])), Err(SeriesError::NonzeroInnerConstant));
    }

    #[test]
    fn compose_with_rational_inner() {
        let f = s(&[1, 1, 1, 1]);
        let g = QSeries::new(0, vec![int(0), rat(1, 2), rat(1, 3), int(0)]);
        let h = f.compose(&g).unwrap();
        // 1 + g + g^2 + g^3
        let direct = &(&(&QSeries::one(3) + &g) + &(&g * &g)) + &g.pow(3);
        assert_eq!(h, direct);
    }

    #[test]
    fn catalan_inverse() {
        let f = s(&[0, 1, -1, 0, 0, 0, 0]);
        assert_eq!(f.comp_inverse().unwrap(), s(&[0, 1, 1, 2, 5, 14, 42]));
        assert_eq!(QSeries::x(6).comp_inverse().unwrap(), QSeries::x(6));
        assert_eq!(s(&[1, 1]).comp_inverse(), Err(SeriesError::NotInvertible));
        assert_eq!(s(&[0, 0, 1]).comp_inverse(), Err(SeriesError::NotInvertible));
    }

    #[test]
    fn reciprocal_examples() {
        assert_eq!(s(&[1, 1, 0, 0]).reciprocal().unwrap(), s(&[1, -1, 1, -1]));
        let e4 = s(&[1, 240, 2160]);
        assert_eq!(e4.reciprocal().unwrap(), s(&[1, -240, 55440]));
        let two = s(&[2, 1, 0]);
        assert_eq!(two.reciprocal().unwrap(), QSeries::new(0, vec![rat(1, 2), rat(-1, 4), rat(1, 8)]));
        let laurent = QSeries::from_i64(-1, &[1, 744, 196884, 21493760]);
        let inv = laurent.reciprocal().unwrap();
        assert_eq!(inv.offset(), 1);
        assert_eq!(inv.order(), 4);
        assert_eq!(inv.truncate(3), QSeries::from_i64(1, &[1, -744, 356652]));
        assert_eq!(QSeries::zero(3).reciprocal(), Err(SeriesError::ZeroLeadingCoefficient));
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(s(&[1, 4, 0, 0, 0, 0]).sqrt_one().unwrap(), s(&[1, 2, -2, 4, -10, 28]));
        assert_eq!(s(&[1, 2, 1, 0]).sqrt_one().unwrap(), s(&[1, 1, 0, 0]));
        assert_eq!(s(&[1]).sqrt_one().unwrap(), s(&[1]));
        assert_eq!(s(&[2, 1]).sqrt_one(), Err(SeriesError::BadConstantTerm));
        let r = QSeries::new(0, vec![int(1), rat(1, 3), int(0), int(0)]);
        let g = r.sqrt_one().unwrap();
        assert_eq!(&g * &g, r);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(s(&[7, 0, 0]).derivative(), s(&[0, 0]));
        assert_eq!(s(&[0, 1, 744]).derivative(), s(&[1, 1488]));
        let l = QSeries::from_i64(-1, &[1, 744, 196884]);
        assert_eq!(l.derivative(), QSeries::from_i64(-2, &[-1, 0, 196884]));
    }

    #[test]
    fn cache_round_trip() {
        let f = QSeries::new(-1, vec![rat(1, 3), int(0), rat(-7, 2), int(5)]);
        let text = f.to_cache_string();
        assert!(text.starts_with("QSERIES v1 offset=-1 order=2\n1/3\n0/1\n"));
        assert_eq!(QSeries::from_cache_str(&text).unwrap(), f);
        assert!(QSeries::from_cache_str("QSERIES v1 offset=0 order=1\n1/1\n").is_err());
    }

    #[test]
    fn subs_power_and_shift() {
        let f = s(&[1, 2, 3]);
        assert_eq!(f.subs_power(2), s(&[1, 0, 2, 0, 3, 0]));
        assert_eq!(f.shift(-1).offset(), -1);
    }
}
