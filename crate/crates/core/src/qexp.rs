//! Named q-expansions: divisor sums, Eisenstein series, the Tate coefficients,
//! `j`, `1/j`, `h`, `α`, `θ` and the G-function `F = α∘θ`.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::rat;
use crate::series::{QSeries, SeriesError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QexpError {
    #[error("divisor sums are provided for k in {{1,3,5}}, got {0}")]
    UnsupportedExponent(u32),
    #[error("{0} has a non-integral coefficient at q^{1}")]
    IntegralityViolation(&'static str, i64),
    #[error("unknown series name {0:?}")]
    UnknownName(String),
    #[error("order must be at least {0}")]
    OrderTooSmall(i64),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("{0}")]
    Other(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Name {
    S1,
    S3,
    S5,
    E2,
    E4,
    E6,
    A4Tate,
    A6Tate,
    J,
    InvJ,
    H,
    Alpha,
    Theta,
    F,
    G,
}

impl Name {
    pub const ALL: [Name; 15] = [
        Name::S1,
        Name::S3,
        Name::S5,
        Name::E2,
        Name::E4,
        Name::E6,
        Name::A4Tate,
        Name::A6Tate,
        Name::J,
        Name::InvJ,
        Name::H,
        Name::Alpha,
        Name::Theta,
        Name::F,
        Name::G,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Name::S1 => "s1",
            Name::S3 => "s3",
            Name::S5 => "s5",
            Name::E2 => "E2",
            Name::E4 => "E4",
            Name::E6 => "E6",
            Name::A4Tate => "a4_tate",
            Name::A6Tate => "a6_tate",
            Name::J => "j",
            Name::InvJ => "inv_j",
            Name::H => "h",
            Name::Alpha => "alpha",
            Name::Theta => "theta",
            Name::F => "F",
            Name::G => "G",
        }
    }

    /// Variable the series is naturally written in.
    pub fn variable(self) -> &'static str {
        match self {
            Name::F | Name::G | Name::Theta => "X",
            _ => "q",
        }
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Name {
    type Err = QexpError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Name::ALL
            .iter()
            .copied()
            .find(|n| n.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| QexpError::UnknownName(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedSeries {
    pub name: Name,
    pub series: QSeries,
    pub order: i64,
}

/// `σ_k(n)` by trial division.
pub fn divisor_sigma(n: u64, k: u32) -> BigInt {
    let mut total = BigInt::zero();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            total += BigInt::from(d).pow(k);
            let e = n / d;
            if e != d {
                total += BigInt::from(e).pow(k);
            }
        }
        d += 1;
    }
    total
}

/// `s_k = Σ σ_k(n) q^n`.
pub fn sigma_series(k: u32, order: i64) -> Result<QSeries, QexpError> {
    if ![1, 3, 5].contains(&k) {
        return Err(QexpError::UnsupportedExponent(k));
    }
    if order < 1 {
        return Err(QexpError::OrderTooSmall(1));
    }
    // sieve: add d^k to every multiple of d
    let n = order as usize;
    let mut c = vec![BigInt::zero(); n + 1];
    for d in 1..=n {
        let dk = BigInt::from(d).pow(k);
        let mut m = d;
        while m <= n {
            c[m] += &dk;
            m += d;
        }
    }
    Ok(QSeries::from_ints(0, c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Eisenstein {
    E2,
    E4,
    E6,
}

pub fn eisenstein(which: Eisenstein, order: i64) -> QSeries {
    let order = order.max(1);
    let (k, c) = match which {
        Eisenstein::E2 => (1, -24),
        Eisenstein::E4 => (3, 240),
        Eisenstein::E6 => (5, -504),
    };
    let s = sigma_series(k, order).expect("supported exponent");
    &QSeries::one(order) + &s.scale_int(c)
}

/// `(ã4, ã6) = (−5 s3, −(5 s3 + 7 s5)/12)`.
pub fn tate_coefficients(order: i64) -> Result<(QSeries, QSeries), QexpError> {
    let s3 = sigma_series(3, order)?;
    let s5 = sigma_series(5, order)?;
    let a4 = s3.scale_int(-5);
    let a6 = (&s3.scale_int(5) + &s5.scale_int(7)).scale(&rat(-1, 12));
    require_integral("a6_tate", &a6)?;
    Ok((a4, a6))
}

fn require_integral(name: &'static str, f: &QSeries) -> Result<(), QexpError> {
    if f.is_integral() {
        return Ok(());
    }
    let bad = (f.offset()..=f.order()).find(|&n| !f.coeff(n).is_integer()).unwrap_or(f.offset());
    Err(QexpError::IntegralityViolation(name, bad))
}

/// `Δ = (E4³ − E6²)/1728`.
pub fn delta(order: i64) -> QSeries {
    let e4 = eisenstein(Eisenstein::E4, order);
    let e6 = eisenstein(Eisenstein::E6, order);
    (&e4.pow(3) - &(&e6 * &e6)).scale(&rat(1, 1728))
}

fn compute(name: Name, order: i64) -> Result<QSeries, QexpError> {
    let s = match name {
        Name::S1 => sigma_series(1, order)?,
        Name::S3 => sigma_series(3, order)?,
        Name::S5 => sigma_series(5, order)?,
        Name::E2 => eisenstein(Eisenstein::E2, order),
        Name::E4 => eisenstein(Eisenstein::E4, order),
        Name::E6 => eisenstein(Eisenstein::E6, order),
        Name::A4Tate => tate_coefficients(order)?.0,
        Name::A6Tate => tate_coefficients(order)?.1,
        Name::J => {
            // Δ has valuation 1, so 1/Δ loses two orders; E4³/Δ loses one more to the pole
            let inv_delta = delta(order + 2).reciprocal()?;
            let e4 = eisenstein(Eisenstein::E4, order + 1);
            let j = &e4.pow(3) * &inv_delta;
            require_integral("j", &j)?;
            j.truncate(order)
        }
        Name::InvJ => {
            let j = get(Name::J, (order - 2).max(1))?;
            let inv = j.reciprocal()?;
            require_integral("inv_j", &inv)?;
            inv.truncate(order)
        }
        Name::H => {
            let e4 = eisenstein(Eisenstein::E4, order);
            let e6 = eisenstein(Eisenstein::E6, order);
            let ratio = &e6 * &e4.reciprocal()?;
            (&ratio - &QSeries::one(order)).scale(&rat(1, 4))
        }
        Name::Alpha => {
            let h = get(Name::H, order)?;
            let root = QSeries::from_i64(0, &[1, 4]).extend_to(order).sqrt_one()?;
            let a = root.compose(&h)?;
            require_integral("alpha", &a)?;
            a
        }
        Name::Theta => {
            let ij = get(Name::InvJ, order)?;
            let t = ij.comp_inverse()?;
            require_integral("theta", &t)?;
            t
        }
        Name::F => {
            let a = get(Name::Alpha, order)?;
            let t = get(Name::Theta, order)?;
            let f = a.compose(&t)?;
            require_integral("F", &f)?;
            f
        }
        Name::G => crate::period::g_series_default(order).map_err(|e| QexpError::Other(e.to_string()))?,
    };
    Ok(s)
}


type Slot = Arc<Mutex<Option<Arc<QSeries>>>>;

/// Process-wide memo of named series. Each name has its own lock so that a
/// computation can request its dependencies without deadlock.
struct Cache {
    slots: Mutex<HashMap<Name, Slot>>,
}

fn cache() -> &'static Cache {
    static C: OnceLock<Cache> = OnceLock::new();
    C.get_or_init(|| Cache { slots: Mutex::new(HashMap::new()) })
}

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("GFLAB_CACHE_DIR").map(PathBuf::from)
}

fn disk_path(name: Name) -> Option<PathBuf> {
    cache_dir().map(|d| d.join(format!("{}.qseries", name.as_str())))
}

fn load_disk(name: Name, order: i64) -> Option<QSeries> {
    let path = disk_path(name)?;
    let text = std::fs::read_to_string(path).ok()?;
    let s = QSeries::from_cache_str(&text).ok()?;
    (s.order() >= order).then_some(s)
}

fn store_disk(name: Name, s: &QSeries) {
    if let Some(path) = disk_path(name) {
        if let Some(dir) = path.parent() {
            let _ = std::fs::create_dir_all(dir);
        }
        let tmp = path.with_extension("tmp");
        if std::fs::write(&tmp, s.to_cache_string()).is_ok() {
            let _ = std::fs::rename(tmp, path);
        }
    }
}

/// Named series to `order`, memoized.
pub fn get(name: Name, order: i64) -> Result<QSeries, QexpError> {
    let slot = {
        let mut map = cache().slots.lock().unwrap();
        map.entry(name).or_default().clone()
    };
    let mut guard = slot.lock().unwrap();
    if let Some(s) = guard.as_ref() {
        if s.order() >= order {
            return Ok(s.truncate(order));
        }
    }
    let s = match load_disk(name, order) {
        Some(s) => s,
        None => {
            let s = compute(name, order)?;
            store_disk(name, &s);
            s
        }
    };
    let out = s.truncate(order);
    *guard = Some(Arc::new(s));
    Ok(out)
}

/// Computes without consulting or filling the memo.
pub fn generate_uncached(name: Name, order: i64) -> Result<QSeries, QexpError> {
    compute(name, order)
}

pub fn named(name: Name, order: i64) -> Result<NamedSeries, QexpError> {
    let series = get(name, order)?;
    Ok(NamedSeries { name, order: series.order(), series })
}

pub fn j_series(order: i64) -> Result<QSeries, QexpError> {
    get(Name::J, order)
}

pub fn inv_j_series(order: i64) -> Result<QSeries, QexpError> {
    get(Name::InvJ, order)
}

pub fn h_series(order: i64) -> Result<QSeries, QexpError> {
    get(Name::H, order)
}

pub fn alpha_series(order: i64) -> Result<QSeries, QexpError> {
    get(Name::Alpha, order)
}

pub fn theta_series(order: i64) -> Result<QSeries, QexpError> {
    get(Name::Theta, order)
}

pub fn f_series(order: i64) -> Result<QSeries, QexpError> {
    get(Name::F, order)
}

/// Natural log of `|n|` for a nonzero integer.
pub fn ln_abs(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        let f: f64 = num_traits::ToPrimitive::to_f64(n).unwrap();
        return f.abs().ln();
    }
    let shift = bits - 64;
    let top: f64 = num_traits::ToPrimitive::to_f64(&(n >> shift)).unwrap();
    top.abs().ln() + shift as f64 * std::f64::consts::LN_2
}

/// One row of a growth profile: the n-th root of the coefficient size.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthPoint {
    pub n: i64,
    pub root: f64,
}

/// `|a_n|^{1/n}` for the nonzero coefficients of an integral series, sampled
/// every `stride` terms, and the running maximum over the whole prefix.
pub fn growth_profile(f: &QSeries, stride: i64) -> (Vec<GrowthPoint>, f64) {
    let mut points = Vec::new();
    let mut max = 0.0f64;
    for n in 1..=f.order() {
        let c = f.coeff(n);
        if c.numer().is_zero() {
            continue;
        }
        let l = ln_abs(c.numer()) - ln_abs(c.denom());
        let root = (l / n as f64).exp();
        max = max.max(root);
        if n % stride == 0 || n == f.order() {
            points.push(GrowthPoint { n, root });
        }
    }
    (points, max)
}

/// Reference Δ from the product `q ∏ (1 − q^n)^24`.
pub fn delta_product(order: i64) -> QSeries {
    let n = order.max(1);
    let mut p = QSeries::one(n);
    for k in 1..=n {
        let mut c = vec![BigInt::zero(); (n + 1) as usize];
        c[0] = BigInt::one();
        c[k as usize] = BigInt::from(-1);
        p = &p * &QSeries::from_ints(0, c);
    }
    let p = p.pow(24);
    p.shift(1).truncate(n)
}

/// Checks one identity coefficientwise; returns the first mismatching exponent.
pub fn first_mismatch(a: &QSeries, b: &QSeries) -> Option<i64> {
    let lo = a.offset().min(b.offset());
    let hi = a.order().min(b.order());
    (lo..=hi).find(|&n| a.coeff(n) != b.coeff(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;

    fn ints(s: &QSeries, upto: i64) -> Vec<i64> {
        (s.offset()..=upto).map(|n| num_traits::ToPrimitive::to_i64(&s.coeff(n).to_integer()).unwrap()).collect()
    }

    #[test]
    fn sigma_oracle() {
        assert_eq!(ints(&sigma_series(3, 3).unwrap(), 3), vec![0, 1, 9, 28]);
        assert_eq!(ints(&sigma_series(5, 2).unwrap(), 2), vec![0, 1, 33]);
        let s1 = sigma_series(1, 60).unwrap();
        for n in 1..=60u64 {
            assert_eq!(s1.coeff(n as i64).to_integer(), divisor_sigma(n, 1));
        }
        assert_eq!(sigma_series(2, 5), Err(QexpError::UnsupportedExponent(2)));
    }

    #[test]
    fn eisenstein_heads() {
        assert_eq!(ints(&eisenstein(Eisenstein::E4, 2), 2), vec![1, 240, 2160]);
        assert_eq!(ints(&eisenstein(Eisenstein::E6, 2), 2), vec![1, -504, -16632]);
        assert_eq!(ints(&eisenstein(Eisenstein::E2, 2), 2), vec![1, -24, -72]);
    }

    #[test]
    fn tate_heads() {
        let (a4, a6) = tate_coefficients(3).unwrap();
        assert_eq!(ints(&a4, 3), vec![0, -5, -45, -140]);
        assert_eq!(ints(&a6, 3), vec![0, -1, -23, -154]);
    }

    #[test]
    fn j_and_inverse() {
        let j = generate_uncached(Name::J, 3).unwrap();
        assert_eq!(j.offset(), -1);
        assert_eq!(ints(&j, 1), vec![1, 744, 196884]);
        let ij = generate_uncached(Name::InvJ, 3).unwrap();
        assert_eq!(ij.offset(), 1);
        assert_eq!(ints(&ij, 3), vec![1, -744, 356652]);
        let prod = &j * &ij;
        assert_eq!(first_mismatch(&prod, &QSeries::one(prod.order())), None);
    }

    #[test]
    fn delta_matches_product() {
        let d = delta(40);
        assert_eq!(first_mismatch(&d, &delta_product(40)), None);
        assert_eq!(d.coeff(2), int(-24));
        assert_eq!(d.coeff(3), int(252));
    }

    #[test]
    fn alpha_theta_f_heads() {
        let a = generate_uncached(Name::Alpha, 4).unwrap();
        assert_eq!(ints(&a, 4), vec![1, -372, 10692, -14456064, -1181102844]);
        let t = generate_uncached(Name::Theta, 3).unwrap();
        assert_eq!(ints(&t, 3), vec![0, 1, 744, 750420]);
        let f = generate_uncached(Name::F, 2).unwrap();
        assert_eq!(ints(&f, 2), vec![1, -372, -266076]);
    }

    #[test]
    fn names_round_trip() {
        for n in Name::ALL {
            assert_eq!(n.as_str().parse::<Name>().unwrap(), n);
        }
        assert!("nope".parse::<Name>().is_err());
    }

    #[test]
    fn memo_extends_without_changing() {
        let a = get(Name::S3, 20).unwrap();
        let b = get(Name::S3, 40).unwrap();
        assert_eq!(b.truncate(20), a);
    }
}
