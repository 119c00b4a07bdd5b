//! Midpoint–radius arithmetic over binary rationals.
//!
//! Every operation returns a ball that contains the exact result for every
//! choice of inputs inside the argument balls. Midpoints are rounded to the
//! working precision and the rounding error is folded into the radius;
//! radii are kept short and always rounded upward.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact binary rational `man · 2^exp`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    man: BigInt,
    exp: i64,
}

const RAD_BITS: u64 = 62;

impl Dyadic {
    pub fn new(man: BigInt, exp: i64) -> Self {
        if man.is_zero() {
            return Dyadic { man, exp: 0 };
        }
        let tz = man.trailing_zeros().unwrap_or(0);
        if tz == 0 {
            Dyadic { man, exp }
        } else {
            Dyadic { man: man >> tz, exp: exp + tz as i64 }
        }
    }

    pub fn zero() -> Self {
        Dyadic { man: BigInt::zero(), exp: 0 }
    }

    pub fn from_i64(n: i64) -> Self {
        Self::new(BigInt::from(n), 0)
    }

    pub fn from_int(n: &BigInt) -> Self {
        Self::new(n.clone(), 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic { man: BigInt::one(), exp: e }
    }

    /// Exact conversion of a finite double.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite());
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let e = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if e == 0 { (frac, -1074) } else { (frac | (1u64 << 52), e - 1075) };
        Self::new(BigInt::from(m) * sign, e)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.man
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn sign(&self) -> Sign {
        self.man.sign()
    }

    pub fn is_negative(&self) -> bool {
        self.man.is_negative()
    }

    pub fn abs(&self) -> Self {
        Dyadic { man: self.man.abs(), exp: self.exp }
    }

    pub fn neg(&self) -> Self {
        Dyadic { man: -self.man.clone(), exp: self.exp }
    }

    /// Bit length of the mantissa.
    pub fn bits(&self) -> u64 {
        self.man.bits()
    }

    /// Exponent of the leading bit plus one: `2^(mag-1) ≤ |x| < 2^mag`.
    pub fn magnitude(&self) -> i64 {
        self.exp + self.man.bits() as i64
    }

    pub fn mul_2exp(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic { man: self.man.clone(), exp: self.exp + k }
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(o.exp);
        let a = &self.man << (self.exp - e) as u64;
        let b = &o.man << (o.exp - e) as u64;
        Self::new(a + b, e)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(&self.man * &o.man, self.exp + o.exp)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.man << self.exp as u64)
        } else {
            BigRational::new(self.man.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    pub fn to_f64(&self) -> f64 {
        let b = self.man.bits() as i64;
        if b <= 60 {
            return self.man.to_f64().unwrap() * 2f64.powi(self.exp.clamp(-2000, 2000) as i32);
        }
        let sh = b - 60;
        let top = (&self.man >> sh as u64).to_f64().unwrap();
        let e = self.exp + sh;
        if e < -1100 {
            0.0
        } else if e > 1100 {
            top.signum() * f64::INFINITY
        } else {
            top * 2f64.powi(e as i32)
        }
    }

    /// Rounds toward −∞ to at most `prec` mantissa bits.
    pub fn floor_to(&self, prec: u64) -> Self {
        let b = self.man.bits();
        if b <= prec {
            return self.clone();
        }
        let sh = b - prec;
        Self::new(&self.man >> sh, self.exp + sh as i64)
    }

    /// Rounds toward +∞ to at most `prec` mantissa bits.
    pub fn ceil_to(&self, prec: u64) -> Self {
        self.neg().floor_to(prec).neg()
    }

    /// Floor of `x · 2^k` as an integer.
    pub fn floor_scaled(&self, k: i64) -> BigInt {
        let e = self.exp + k;
        if e >= 0 {
            &self.man << e as u64
        } else {
            &self.man >> (-e) as u64
        }
    }

    /// Dyadic lower bound of a positive rational with `prec` bits.
    pub fn from_rational_floor(q: &BigRational, prec: u64) -> Self {
        let nb = q.numer().bits() as i64;
        let db = q.denom().bits() as i64;
        let k = prec as i64 - (nb - db) + 2;
        let scaled = if k >= 0 { q.numer() << k as u64 } else { q.numer() >> (-k) as u64 };
        let (m, _) = scaled.div_mod_floor(q.denom());
        Self::new(m, -k)
    }

    /// Dyadic upper bound of a rational with `prec` bits.
    pub fn from_rational_ceil(q: &BigRational, prec: u64) -> Self {
        Self::from_rational_floor(&-q, prec).neg()
    }

    /// Scientific notation with `sig` significant decimal digits (truncated).
    pub fn to_sci(&self, sig: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let neg = self.is_negative();
        let a = self.abs();
        let e10 = ((a.magnitude() - 1) as f64 * std::f64::consts::LOG10_2).floor() as i64;
        // digits = floor(|x| · 10^(sig-1-e10))
        let k = sig as i64 - 1 - e10;
        let q = a.to_rational();
        let scaled = if k >= 0 {
            q * BigRational::from_integer(BigInt::from(10).pow(k as u32))
        } else {
            q / BigRational::from_integer(BigInt::from(10).pow((-k) as u32))
        };
        let mut digits = scaled.floor().to_integer().to_string();
        let mut e = e10;
        if digits.len() > sig {
            digits.truncate(sig);
            e += 1;
        }
        let (head, tail) = digits.split_at(1);
        let tail = tail.trim_end_matches('0');
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        s.push_str(head);
        if !tail.is_empty() {
            s.push('.');
            s.push_str(tail);
        }
        if e != 0 {
            s.push_str(&format!("e{e}"));
        }
        s
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.sub(other);
        match d.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }
}

/// Upper bound with a short mantissa, for radii.
fn up(x: &Dyadic) -> Dyadic {
    debug_assert!(!x.is_negative());
    x.ceil_to(RAD_BITS)
}

fn down(x: &Dyadic) -> Dyadic {
    x.floor_to(RAD_BITS)
}

/// Upper bound for `a / b`, both positive.
fn div_up(a: &Dyadic, b: &Dyadic) -> Dyadic {
    if a.is_zero() {
        return Dyadic::zero();
    }
    let a = up(a);
    let b = down(b);
    let k = RAD_BITS as i64 + b.bits() as i64;
    let n = &a.man << k as u64;
    let (q, r) = n.div_rem(&b.man);
    let q = if r.is_zero() { q } else { q + 1 };
    up(&Dyadic::new(q, a.exp - k - b.exp))
}

/// Lower bound for `sqrt(x)`, `x ≥ 0`.
fn sqrt_down(x: &Dyadic) -> Dyadic {
    if x.is_zero() || x.is_negative() {
        return Dyadic::zero();
    }
    let x = down(x);
    let mut sh = 2 * RAD_BITS as i64;
    if (x.exp - sh) % 2 != 0 {
        sh += 1;
    }
    let m = &x.man << sh as u64;
    Dyadic::new(m.sqrt(), (x.exp - sh) / 2)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    mid: Dyadic,
    rad: Dyadic,
    prec: u64,
}

impl Ball {
    pub fn new(mid: Dyadic, rad: Dyadic, prec: u64) -> Self {
        assert!(!rad.is_negative());
        let (mid, err) = round_mid(mid, prec);
        Ball { mid, rad: up(&rad.add(&err)), prec }
    }

    pub fn exact(x: Dyadic, prec: u64) -> Self {
        Self::new(x, Dyadic::zero(), prec)
    }

    pub fn zero(prec: u64) -> Self {
        Self::exact(Dyadic::zero(), prec)
    }

    pub fn from_i64(n: i64, prec: u64) -> Self {
        Self::exact(Dyadic::from_i64(n), prec)
    }

    pub fn from_int(n: &BigInt, prec: u64) -> Self {
        Self::exact(Dyadic::from_int(n), prec)
    }

    pub fn from_rational(q: &BigRational, prec: u64) -> Self {
        if q.denom().is_one() {
            return Self::from_int(q.numer(), prec);
        }
        let nb = q.numer().bits() as i64;
        let db = q.denom().bits() as i64;
        let k = prec as i64 + 8 - (nb - db);
        let scaled = if k >= 0 { q.numer() << k as u64 } else { q.numer() >> (-k) as u64 };
        let (m, r) = scaled.div_mod_floor(q.denom());
        let rad = if r.is_zero() && k >= 0 { Dyadic::zero() } else { Dyadic::pow2(-k) };
        Self::new(Dyadic::new(m, -k), rad, prec)
    }

    /// Ball whose interval is `[lo, hi]`.
    pub fn from_endpoints(lo: &Dyadic, hi: &Dyadic, prec: u64) -> Self {
        let sum = lo.add(hi);
        let mid = sum.mul_2exp(-1);
        let rad = hi.sub(lo).mul_2exp(-1);
        Self::new(mid, rad.abs(), prec)
    }

    pub fn mid(&self) -> &Dyadic {
        &self.mid
    }

    pub fn rad(&self) -> &Dyadic {
        &self.rad
    }

    pub fn prec(&self) -> u64 {
        self.prec
    }

    pub fn with_prec(&self, prec: u64) -> Self {
        Ball::new(self.mid.clone(), self.rad.clone(), prec)
    }

    pub fn lower(&self) -> Dyadic {
        self.mid.sub(&self.rad)
    }

    pub fn upper(&self) -> Dyadic {
        self.mid.add(&self.rad)
    }

    /// Upper bound for `|x|` over the ball.
    pub fn abs_upper(&self) -> Dyadic {
        up(&self.mid.abs().add(&self.rad))
    }

    /// Lower bound for `|x|` over the ball (zero if it straddles zero).
    pub fn abs_lower(&self) -> Dyadic {
        let l = self.mid.abs().sub(&self.rad);
        if l.is_negative() {
            Dyadic::zero()
        } else {
            down(&l)
        }
    }

    pub fn is_positive(&self) -> bool {
        self.lower().sign() == Sign::Plus
    }

    pub fn is_negative(&self) -> bool {
        self.upper().sign() == Sign::Minus
    }

    pub fn contains_zero(&self) -> bool {
        !self.is_positive() && !self.is_negative()
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        self.lower() <= *x && *x <= self.upper()
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        let lo = self.lower().to_rational();
        let hi = self.upper().to_rational();
        lo <= *q && *q <= hi
    }

    /// Both balls share a point.
    pub fn overlaps(&self, o: &Ball) -> bool {
        self.lower() <= o.upper() && o.lower() <= self.upper()
    }

    /// `o` lies inside `self`.
    pub fn contains_ball(&self, o: &Ball) -> bool {
        self.lower() <= o.lower() && o.upper() <= self.upper()
    }

    pub fn intersect(&self, o: &Ball) -> Option<Ball> {
        let lo = self.lower().max(o.lower());
        let hi = self.upper().min(o.upper());
        (lo <= hi).then(|| Ball::from_endpoints(&lo, &hi, self.prec.max(o.prec)))
    }

    pub fn hull(&self, o: &Ball) -> Ball {
        let lo = self.lower().min(o.lower());
        let hi = self.upper().max(o.upper());
        Ball::from_endpoints(&lo, &hi, self.prec.max(o.prec))
    }

    pub fn neg(&self) -> Ball {
        Ball { mid: self.mid.neg(), rad: self.rad.clone(), prec: self.prec }
    }

    pub fn add(&self, o: &Ball) -> Ball {
        let prec = self.prec.max(o.prec);
        Ball::new(self.mid.add(&o.mid), self.rad.add(&o.rad), prec)
    }

    pub fn sub(&self, o: &Ball) -> Ball {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Ball) -> Ball {
        let prec = self.prec.max(o.prec);
        let r = up(&self.mid.abs()).mul(&o.rad).add(&up(&o.mid.abs()).mul(&self.rad)).add(&self.rad.mul(&o.rad));
        Ball::new(self.mid.mul(&o.mid), r, prec)
    }

    pub fn sqr(&self) -> Ball {
        self.mul(self)
    }

    pub fn mul_2exp(&self, k: i64) -> Ball {
        Ball { mid: self.mid.mul_2exp(k), rad: self.rad.mul_2exp(k), prec: self.prec }
    }

    pub fn mul_i64(&self, n: i64) -> Ball {
        self.mul(&Ball::from_i64(n, self.prec))
    }

    pub fn mul_rational(&self, q: &BigRational) -> Ball {
        self.mul(&Ball::from_rational(q, self.prec))
    }

    /// Reciprocal; `None` if the ball contains zero.
    pub fn inv(&self) -> Option<Ball> {
        let am = self.mid.abs();
        let gap = am.sub(&self.rad);
        if gap.sign() != Sign::Plus {
            return None;
        }
        let m = &self.mid;
        let s = self.prec as i64 + m.man.bits() as i64 + 4;
        let num = BigInt::one() << s as u64;
        let q = num.div_floor(&m.man);
        let q_exp = -s - m.exp;
        let err = Dyadic::pow2(q_exp);
        let rad = if self.rad.is_zero() { Dyadic::zero() } else { div_up(&self.rad, &down(&am).mul(&down(&gap))) };
        Some(Ball::new(Dyadic::new(q, q_exp), rad.add(&err), self.prec))
    }

    pub fn div(&self, o: &Ball) -> Option<Ball> {
        Some(self.mul(&o.inv()?))
    }

    /// Square root of a ball with positive lower endpoint; a ball touching
    /// zero from above is accepted with a one-sided bound.
    pub fn sqrt(&self) -> Option<Ball> {
        if self.upper().is_negative() {
            return None;
        }
        if !self.is_positive() {
            // [0, hi]: use the enclosure [0, sqrt(hi)]
            let hi = self.upper();
            if hi.is_zero() {
                return Some(Ball::zero(self.prec));
            }
            let s = Ball::exact(hi, self.prec).sqrt()?;
            let top = s.upper();
            return Some(Ball::from_endpoints(&Dyadic::zero(), &top, self.prec));
        }
        let m = &self.mid;
        let target = 2 * (self.prec as i64 + 4);
        let mut sh = (target - m.man.bits() as i64).max(0);
        if (m.exp - sh) % 2 != 0 {
            sh += 1;
        }
        let root = (&m.man << sh as u64).sqrt();
        let r_exp = (m.exp - sh) / 2;
        let err = Dyadic::pow2(r_exp);
        let rad = if self.rad.is_zero() { Dyadic::zero() } else { div_up(&self.rad, &sqrt_down(&self.lower())) };
        Some(Ball::new(Dyadic::new(root, r_exp), rad.add(&err), self.prec))
    }

    pub fn pow(&self, n: u32) -> Ball {
        let mut r = Ball::from_i64(1, self.prec);
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    pub fn exp(&self) -> Ball {
        let e = exp_exact(&self.mid, self.prec);
        if self.rad.is_zero() {
            return e;
        }
        // |e^(m+t) - e^m| ≤ e^m (e^r - 1) ≤ e^m · r · e^r
        let r = &self.rad;
        let er = exp_exact(r, 64).upper();
        let extra = up(&e.abs_upper().mul(r).mul(&er));
        Ball::new(e.mid.clone(), e.rad.add(&extra), self.prec)
    }

    /// Natural logarithm; `None` unless the ball is positive.
    pub fn log(&self) -> Option<Ball> {
        if !self.is_positive() {
            return None;
        }
        let l = log_exact(&self.mid, self.prec);
        if self.rad.is_zero() {
            return Some(l);
        }
        let extra = div_up(&self.rad, &down(&self.lower()));
        Some(Ball::new(l.mid.clone(), l.rad.add(&extra), self.prec))
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    /// `mid±rad` with decimal rendering.
    pub fn to_string_digits(&self, sig: usize) -> String {
        format!("{}±{}", self.mid.to_sci(sig), self.rad.to_sci(3))
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = ((self.prec as f64) * std::f64::consts::LOG10_2) as usize;
        f.write_str(&self.to_string_digits(digits.clamp(3, 60)))
    }
}

fn round_mid(x: Dyadic, prec: u64) -> (Dyadic, Dyadic) {
    let b = x.bits();
    if b <= prec {
        return (x, Dyadic::zero());
    }
    let sh = b - prec;
    let err = Dyadic::pow2(x.exp + sh as i64);
    (x.floor_to(prec), err)
}

/// `Σ_{k≥0} s_k / ((2k+1) n^(2k+1))` in fixed point with `w` fraction bits,
/// where `s_k = (−1)^k` if `alternating`. Returns `(value·2^w, error in ulps)`.
fn arctan_like_recip(n: u64, w: u64, alternating: bool) -> (BigInt, u64) {
    let n = BigInt::from(n);
    let n2 = &n * &n;
    let mut p = (BigInt::one() << w) / &n;
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    let mut terms = 0u64;
    while !p.is_zero() {
        let t = &p / BigInt::from(2 * k + 1);
        if alternating && k % 2 == 1 {
            sum -= t;
        } else {
            sum += t;
        }
        p /= &n2;
        k += 1;
        terms += 1;
    }
    // each term is off by < 1 ulp; the omitted tail is < 1 ulp
    (sum, terms + 1)
}

fn constant_cache() -> &'static Mutex<HashMap<(u8, u64), Ball>> {
    static C: OnceLock<Mutex<HashMap<(u8, u64), Ball>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// π by Machin's formula.
pub fn pi(prec: u64) -> Ball {
    if let Some(b) = constant_cache().lock().unwrap().get(&(0, prec)) {
        return b.clone();
    }
    let w = prec + 32;
    let (a, ea) = arctan_like_recip(5, w, true);
    let (b, eb) = arctan_like_recip(239, w, true);
    let v = a * 16 - b * 4;
    let err = BigInt::from(16 * ea + 4 * eb);
    let ball = Ball::new(Dyadic::new(v, -(w as i64)), Dyadic::new(err, -(w as i64)), prec);
    constant_cache().lock().unwrap().insert((0, prec), ball.clone());
    ball
}

/// log 2 = 2·atanh(1/3).
pub fn ln2(prec: u64) -> Ball {
    if let Some(b) = constant_cache().lock().unwrap().get(&(1, prec)) {
        return b.clone();
    }
    let w = prec + 32;
    let (a, ea) = arctan_like_recip(3, w, false);
    let ball = Ball::new(Dyadic::new(a * 2, -(w as i64)), Dyadic::new(BigInt::from(2 * ea), -(w as i64)), prec);
    constant_cache().lock().unwrap().insert((1, prec), ball.clone());
    ball
}

fn exp_exact(x: &Dyadic, prec: u64) -> Ball {
    if x.is_zero() {
        return Ball::from_i64(1, prec);
    }
    // reduce so that |t| < 2^-12, then square back up
    let k = (x.magnitude() + 12).max(0) as u64;
    let wp = prec + k + 16;
    let t = Ball::exact(x.mul_2exp(-(k as i64)), wp);
    let mut sum = Ball::from_i64(1, wp);
    let mut term = Ball::from_i64(1, wp);
    let mut i = 1i64;
    loop {
        term = term.mul(&t).mul(&Ball::from_i64(i, wp).inv().unwrap());
        sum = sum.add(&term);
        if term.abs_upper().magnitude() < -(wp as i64) - 4 {
            break;
        }
        i += 1;
    }
    // tail ≤ 2·|next term| since |t| < 1/2
    let tail = up(&term.abs_upper().mul_2exp(1));
    let mut r = Ball::new(sum.mid.clone(), sum.rad.add(&tail), wp);
    for _ in 0..k {
        r = r.sqr();
    }
    r.with_prec(prec)
}

/// `2·atanh(z)` for a ball `|z| ≤ 1/4`.
fn two_atanh(z: &Ball, wp: u64) -> Ball {
    let z2 = z.sqr();
    let mut pw = z.clone();
    let mut sum = Ball::zero(wp);
    let mut k = 0i64;
    loop {
        let term = pw.mul(&Ball::from_i64(2 * k + 1, wp).inv().unwrap());
        sum = sum.add(&term);
        pw = pw.mul(&z2);
        let bound = pw.abs_upper();
        if bound.is_zero() || bound.magnitude() < -(wp as i64) - 4 {
            break;
        }
        k += 1;
    }
    // remaining terms ≤ |z|^(2k+3) / (1 − z²) ≤ 2|pw|
    let tail = up(&pw.abs_upper().mul_2exp(1));
    Ball::new(sum.mid.clone(), sum.rad.add(&tail), wp).mul_2exp(1)
}

fn log_exact(x: &Dyadic, prec: u64) -> Ball {
    assert!(x.sign() == Sign::Plus);
    let wp = prec + 16;
    // x = y · 2^e with y in [1/√2, √2)
    let mut e = x.magnitude();
    let mut y = x.mul_2exp(-e); // in [1/2, 1)
    if y < Dyadic::new(BigInt::from(181), -8) {
        y = y.mul_2exp(1);
        e -= 1;
    }
    let one = Dyadic::from_i64(1);
    let z = Ball::exact(y.sub(&one), wp).div(&Ball::exact(y.add(&one), wp)).unwrap();
    let ly = two_atanh(&z, wp);
    ly.add(&ln2(wp).mul_i64(e)).with_prec(prec)
}

/// Arithmetic–geometric mean of two positive balls.
pub fn agm(a: &Ball, b: &Ball) -> Option<Ball> {
    agm_with_sum(a, b, &Ball::zero(a.prec())).map(|(m, _)| m)
}

/// AGM together with `Σ_{n≥0} 2^(n−1) c_n²`, where `c_0²` is supplied and
/// `c_(n+1) = (a_n − b_n)/2`.
pub fn agm_with_sum(a0: &Ball, b0: &Ball, c0_sq: &Ball) -> Option<(Ball, Ball)> {
    if !a0.is_positive() || !b0.is_positive() {
        return None;
    }
    let prec = a0.prec().max(b0.prec());
    let mut a = a0.clone();
    let mut b = b0.clone();
    let mut sum = c0_sq.mul_2exp(-1);
    let mut n = 0i64;
    loop {
        let c = a.sub(&b).mul_2exp(-1);
        let na = a.add(&b).mul_2exp(-1);
        let nb = a.mul(&b).sqrt()?;
        n += 1;
        sum = sum.add(&c.sqr().mul_2exp(n - 1));
        a = na;
        b = nb;
        let gap = a.mid().sub(b.mid()).abs();
        let scale = a.mid().magnitude();
        if gap.is_zero() || gap.magnitude() < scale - prec as i64 + 2 || n > 200 {
            // remaining terms: c_(k+1) ≤ c_k²/(4L) with L a lower bound of the mean
            let c_next = a.sub(&b).mul_2exp(-1).abs_upper();
            let l = down(&b.lower().min(a.lower()));
            if l.sign() != Sign::Plus {
                return None;
            }
            let c4 = c_next.mul(&c_next).mul(&c_next).mul(&c_next);
            let tail = div_up(&c4.mul_2exp(n + 2), &l.mul(&l)).add(&c_next.mul(&c_next).mul_2exp(n + 1));
            let m = a.hull(&b);
            let s = Ball::new(sum.mid().clone(), up(&sum.rad().add(&tail)), prec);
            return Some((m, s));
        }
    }
}

/// Complex disc `re + i·im` with radius `rad`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexBall {
    re: Dyadic,
    im: Dyadic,
    rad: Dyadic,
    prec: u64,
}

impl ComplexBall {
    pub fn new(re: Dyadic, im: Dyadic, rad: Dyadic, prec: u64) -> Self {
        let (re, e1) = round_mid(re, prec);
        let (im, e2) = round_mid(im, prec);
        ComplexBall { re, im, rad: up(&rad.add(&e1).add(&e2)), prec }
    }

    pub fn from_real(x: &Ball) -> Self {
        Self::new(x.mid.clone(), Dyadic::zero(), x.rad.clone(), x.prec)
    }

    /// `x + i·y` from two real balls (the disc contains the rectangle).
    pub fn from_parts(x: &Ball, y: &Ball) -> Self {
        Self::new(x.mid.clone(), y.mid.clone(), x.rad.add(&y.rad), x.prec.max(y.prec))
    }

    pub fn from_rational(q: &BigRational, prec: u64) -> Self {
        Self::from_real(&Ball::from_rational(q, prec))
    }

    pub fn zero(prec: u64) -> Self {
        Self::new(Dyadic::zero(), Dyadic::zero(), Dyadic::zero(), prec)
    }

    pub fn re_mid(&self) -> &Dyadic {
        &self.re
    }

    pub fn im_mid(&self) -> &Dyadic {
        &self.im
    }

    pub fn rad(&self) -> &Dyadic {
        &self.rad
    }

    pub fn prec(&self) -> u64 {
        self.prec
    }

    pub fn re(&self) -> Ball {
        Ball::new(self.re.clone(), self.rad.clone(), self.prec)
    }

    pub fn im(&self) -> Ball {
        Ball::new(self.im.clone(), self.rad.clone(), self.prec)
    }

    /// Upper bound for `|z|` over the disc.
    pub fn abs_upper(&self) -> Dyadic {
        let r2 = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        let s = Ball::exact(r2, 64).sqrt().unwrap().upper();
        up(&s.add(&self.rad))
    }

    pub fn contains_zero(&self) -> bool {
        let r2 = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        r2 <= self.rad.mul(&self.rad)
    }

    /// Discs intersect.
    pub fn overlaps(&self, o: &ComplexBall) -> bool {
        self.sub(o).contains_zero_with(&Dyadic::zero())
    }

    fn contains_zero_with(&self, slack: &Dyadic) -> bool {
        let r = self.rad.add(slack);
        let r2 = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        r2 <= r.mul(&r)
    }

    pub fn neg(&self) -> Self {
        ComplexBall { re: self.re.neg(), im: self.im.neg(), rad: self.rad.clone(), prec: self.prec }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.re.add(&o.re), self.im.add(&o.im), self.rad.add(&o.rad), self.prec.max(o.prec))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let re = self.re.mul(&o.re).sub(&self.im.mul(&o.im));
        let im = self.re.mul(&o.im).add(&self.im.mul(&o.re));
        let a = self.mid_abs_upper();
        let b = o.mid_abs_upper();
        let rad = a.mul(&o.rad).add(&b.mul(&self.rad)).add(&self.rad.mul(&o.rad));
        Self::new(re, im, rad, self.prec.max(o.prec))
    }

    pub fn mul_real(&self, x: &Ball) -> Self {
        self.mul(&ComplexBall::from_real(x))
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> Self {
        ComplexBall { re: self.im.neg(), im: self.re.clone(), rad: self.rad.clone(), prec: self.prec }
    }

    fn mid_abs_upper(&self) -> Dyadic {
        let r2 = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        Ball::exact(up(&r2), 64).sqrt().unwrap().abs_upper()
    }

    pub fn inv(&self) -> Option<Self> {
        // 1/z = conj(z)/|z|^2 on the real and imaginary parts, as balls
        let x = self.re();
        let y = self.im();
        let n = x.sqr().add(&y.sqr());
        let ni = n.inv()?;
        Some(ComplexBall::from_parts(&x.mul(&ni), &y.neg().mul(&ni)))
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        Some(self.mul(&o.inv()?))
    }

    pub fn to_string_digits(&self, sig: usize) -> String {
        format!("({} + {}i)±{}", self.re.to_sci(sig), self.im.to_sci(sig), self.rad.to_sci(3))
    }
}

impl fmt::Display for ComplexBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = ((self.prec as f64) * std::f64::consts::LOG10_2) as usize;
        f.write_str(&self.to_string_digits(digits.clamp(3, 60)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    const P: u64 = 256;

    fn near(b: &Ball, x: f64, tol: f64) -> bool {
        (b.to_f64() - x).abs() < tol
    }

    #[test]
    fn rational_conversion_contains_value() {
        for q in [rat(1, 3), rat(-22, 7), rat(1, 1000000), rat(123456789, 1024)] {
            let b = Ball::from_rational(&q, P);
            assert!(b.contains_rational(&q));
            assert!(b.rad().is_zero() || b.rad().magnitude() < b.mid().magnitude() - P as i64 + 8);
        }
    }

    #[test]
    fn log_of_powers_of_two() {
        let l2 = Ball::from_i64(2, P).log().unwrap();
        for k in 0..6 {
            let l = Ball::from_i64(1 << k, P).log().unwrap();
            assert!(l.overlaps(&l2.mul_i64(k)));
        }
    }

    #[test]
    fn field_ops_contain_exact_results() {
        let a = rat(7, 3);
        let b = rat(-5, 11);
        let ba = Ball::from_rational(&a, P);
        let bb = Ball::from_rational(&b, P);
        assert!(ba.add(&bb).contains_rational(&(&a + &b)));
        assert!(ba.mul(&bb).contains_rational(&(&a * &b)));
        assert!(ba.div(&bb).unwrap().contains_rational(&(&a / &b)));
        assert!(bb.inv().unwrap().contains_rational(&b.recip()));
    }

    #[test]
    fn constants() {
        let p = pi(P);
        assert!(near(&p, std::f64::consts::PI, 1e-15));
        assert!(p.rad().magnitude() < -(P as i64) + 10);
        let l = ln2(P);
        assert!(near(&l, std::f64::consts::LN_2, 1e-15));
        // pi at two precisions agree
        assert!(pi(512).overlaps(&p));
    }

    #[test]
    fn exp_log_inverse() {
        let x = Ball::from_rational(&rat(17, 5), P);
        let y = x.exp().log().unwrap();
        assert!(y.overlaps(&x));
        assert!(near(&x.exp(), 3.4f64.exp(), 1e-12));
        let e1 = Ball::from_i64(1, P).exp();
        assert!(near(&e1, std::f64::consts::E, 1e-15));
        let n = Ball::from_rational(&rat(-40, 1), P).exp();
        assert!(near(&n.mul(&Ball::from_rational(&rat(40, 1), P).exp()), 1.0, 1e-30));
    }

    #[test]
    fn sqrt_and_agm() {
        let two = Ball::from_i64(2, P);
        let s = two.sqrt().unwrap();
        assert!(s.sqr().overlaps(&two));
        // AGM(1, √2) = 1.19814023473559220744...
        let m = agm(&Ball::from_i64(1, P), &s).unwrap();
        assert!(near(&m, 1.198_140_234_735_592_2, 1e-15));
        assert!(m.rad().magnitude() < -200);
    }

    #[test]
    fn sci_format() {
        assert_eq!(Dyadic::from_i64(1234).to_sci(3), "1.23e3");
        assert_eq!(Dyadic::new(BigInt::from(1), -1).to_sci(5), "5e-1");
        assert_eq!(Dyadic::from_i64(-3).to_sci(4), "-3");
    }

    #[test]
    fn complex_ops() {
        let z = ComplexBall::new(Dyadic::from_i64(3), Dyadic::from_i64(4), Dyadic::zero(), P);
        let w = z.inv().unwrap().mul(&z);
        let one = ComplexBall::from_real(&Ball::from_i64(1, P));
        assert!(w.overlaps(&one));
        assert!(!z.contains_zero());
        assert_eq!(z.mul_i().re_mid(), &Dyadic::from_i64(-4));
    }
}
