//! Evaluation of series at archimedean and p-adic places, and the radius
//! quantities `R` and `R†`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{self, mod_inverse, val_rat};
use crate::ball::{Ball, ComplexBall, Dyadic};
use crate::padic::PadicNum;
use crate::series::QSeries;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("point is not inside the disc of convergence")]
    NotInRadius,
    #[error("no certified coefficient bound for a non-integral series")]
    UncertifiedTail,
    #[error("series known to order {available}, certified evaluation needs {needed}")]
    TruncationTooShort { needed: i64, available: i64 },
    #[error("evaluation needs a power series")]
    Laurent,
}

/// `p^exponent` or an infinite radius.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Radius {
    Infinite,
    PowerOfP { prime: u64, exponent: BigRational },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusBasis {
    IntegralCoefficients,
    SuppliedBound,
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadiusBound {
    pub lower: Radius,
    pub certified: bool,
    pub basis: RadiusBasis,
}

fn p_integral(f: &QSeries, p: u64) -> bool {
    !(f.denominator() % BigInt::from(p)).is_zero()
}

/// `min_{n ≥ 1, a_n ≠ 0} v_p(a_n)/n` over the known prefix, or `None` if
/// every known coefficient beyond the constant term vanishes.
pub fn r_dagger_exponent(f: &QSeries, p: u64) -> Option<BigRational> {
    (1.max(f.offset())..=f.order())
        .filter_map(|n| val_rat(&f.coeff(n), p).map(|v| arith::rat(v, n)))
        .min()
}

/// Lower bound for `R†(f)` at `p`.
pub fn r_dagger(f: &QSeries, p: u64) -> RadiusBound {
    let exponent = r_dagger_exponent(f, p);
    match exponent {
        None => RadiusBound { lower: Radius::Infinite, certified: true, basis: RadiusBasis::IntegralCoefficients },
        Some(_) if p_integral(f, p) => RadiusBound {
            lower: Radius::PowerOfP { prime: p, exponent: BigRational::zero() },
            certified: true,
            basis: RadiusBasis::IntegralCoefficients,
        },
        Some(e) => RadiusBound {
            lower: Radius::PowerOfP { prime: p, exponent: e },
            certified: false,
            basis: RadiusBasis::Empirical,
        },
    }
}

/// `v_p(a_n) ≥ −slope·n − offset` for all `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicBound {
    pub slope: BigRational,
    pub offset: BigRational,
}

/// `f(x)` modulo `p^k`, certified.
pub fn eval_padic(f: &QSeries, x: &PadicNum, k: i64, bound: Option<&PadicBound>) -> Result<PadicNum, EvalError> {
    if f.offset() < 0 && f.valuation().is_some_and(|v| v < 0) {
        return Err(EvalError::Laurent);
    }
    let p = x.prime();
    let vx = x.valuation();
    if !x.is_zero() && vx <= 0 {
        return Err(EvalError::NotInRadius);
    }
    if p_integral(f, p) {
        let kk = k.min(x.abs_precision());
        let d = if vx >= kk { 0 } else { (kk + vx - 1) / vx - 1 };
        if d > f.order() {
            return Err(EvalError::TruncationTooShort { needed: d, available: f.order() });
        }
        let m = BigInt::from(p).pow(kk.max(0) as u32);
        let xr = x.residue(kk).expect("integral point");
        let den_inv = mod_inverse(f.denominator(), &m).unwrap_or_else(BigInt::one);
        let mut acc = BigInt::zero();
        let zero = BigInt::zero();
        for n in (0..=d).rev() {
            let c = if n < f.offset() { &zero } else { &f.numerators()[(n - f.offset()) as usize] };
            acc = (acc * &xr + c).mod_floor(&m);
        }
        let acc = (acc * den_inv).mod_floor(&m);
        return Ok(PadicNum::from_int(&acc, p, kk));
    }
    let b = bound.ok_or(EvalError::UncertifiedTail)?;
    let gap = BigRational::from_integer(BigInt::from(vx)) - &b.slope;
    if !gap.is_positive() {
        return Err(EvalError::NotInRadius);
    }
    // smallest D with (D+1)·gap − offset ≥ k
    let need = (BigRational::from_integer(BigInt::from(k)) + &b.offset) / &gap;
    let d = need.ceil().to_integer().to_i64().unwrap() - 1;
    let d = d.max(0);
    if d > f.order() {
        return Err(EvalError::TruncationTooShort { needed: d, available: f.order() });
    }
    let mut sum = PadicNum::zero(p, k);
    let mut xn = PadicNum::from_i64(1, p, k + 1);
    for n in 0..=d {
        let c = f.coeff(n);
        if !c.is_zero() {
            let cp = PadicNum::from_rational(&c, p, k - n * vx + 2);
            sum = sum.add(&cp.mul(&xn));
        }
        xn = xn.mul(x);
    }
    Ok(sum.reduce(k.min(x.abs_precision() - b.slope.ceil().to_integer().to_i64().unwrap_or(0))))
}

/// `|a_n| ≤ c · rho^(−n)` for every `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffBound {
    pub c: BigRational,
    pub rho: BigRational,
}

impl CoeffBound {
    /// Best `c` for a majorant `k·(n+1)^e·r^n` at radius `rho < 1/r`.
    pub fn poly_geometric(k: &BigRational, e: u32, r: &BigRational, rho: &BigRational) -> CoeffBound {
        let t = r * rho;
        assert!(t < BigRational::one() && t.is_positive());
        // (n+1)^e t^n decreases once n+1 ≥ e / ln(1/t)
        let lt = -t.to_f64().unwrap().ln();
        let last = ((e as f64 / lt) * 2.0).ceil() as i64 + 4;
        let mut best = BigRational::zero();
        let mut tn = BigRational::one();
        for n in 0..=last {
            let v = k * BigRational::from_integer(BigInt::from(n + 1).pow(e)) * &tn;
            if v > best {
                best = v;
            }
            tn *= &t;
        }
        CoeffBound { c: best, rho: rho.clone() }
    }
}

/// Coefficient bound used for `F`: `|F_n| ≤ (n+1)·1728^n`.
///
/// `F(s) = (1 − 1728s)^{1/4} · ₂F₁(1/12, 5/12; 1; 1728s)`, a product of two
/// series in `1728s` whose coefficients are bounded by 1 in absolute value.
pub fn f_coefficient_bound(rho: &BigRational) -> CoeffBound {
    CoeffBound::poly_geometric(&BigRational::one(), 1, &arith::int(1728), rho)
}

/// Bound for `F'`: `|(n+1) F_{n+1}| ≤ 1728·(n+2)²·1728^n ≤ 6912 (n+1)² 1728^n`.
pub fn f_prime_coefficient_bound(rho: &BigRational) -> CoeffBound {
    CoeffBound::poly_geometric(&arith::int(6912), 2, &arith::int(1728), rho)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArchValue {
    pub value: ComplexBall,
    pub certified: bool,
    pub terms: i64,
}

fn auto_bound(f: &QSeries) -> Option<CoeffBound> {
    if !f.is_integral() {
        return None;
    }
    let mut g = 1.0f64;
    let mut cmax = BigInt::one();
    for n in 1..=f.order() {
        let c = f.coeff_int(n).unwrap();
        if c.is_zero() {
            continue;
        }
        g = g.max((crate::qexp::ln_abs(&c) / n as f64).exp());
        if c.abs() > cmax {
            cmax = c.abs();
        }
    }
    let rho = arith::ratio(BigInt::from(1000), BigInt::from((g * 1000.0).ceil() as i64 + 1));
    let mut c = BigRational::zero();
    let mut rn = BigRational::one();
    for n in 0..=f.order() {
        let a = f.coeff(n).abs() * &rn;
        if a > c {
            c = a;
        }
        rn *= &rho;
    }
    Some(CoeffBound { c: c * arith::int(2), rho })
}

/// Value of `f` on a complex disc with a tail bound.
pub fn eval_complex(f: &QSeries, x: &ComplexBall, bound: Option<&CoeffBound>) -> Result<ArchValue, EvalError> {
    if f.offset() < 0 && f.valuation().is_some_and(|v| v < 0) {
        return Err(EvalError::Laurent);
    }
    let prec = x.prec();
    if x.re_mid().is_zero() && x.im_mid().is_zero() && x.rad().is_zero() {
        let c = Ball::from_rational(&f.coeff(0.min(f.order())), prec);
        return Ok(ArchValue { value: ComplexBall::from_real(&c), certified: true, terms: 0 });
    }
    let (b, certified) = match bound {
        Some(b) => (b.clone(), true),
        None => (auto_bound(f).ok_or(EvalError::UncertifiedTail)?, false),
    };
    let r = x.abs_upper().to_rational();
    let t = &r / &b.rho;
    if t >= BigRational::one() {
        return Err(EvalError::NotInRadius);
    }
    let tb = Ball::from_rational(&t, 64);
    let tu = tb.upper();
    let one_minus = Dyadic::from_i64(1).sub(&tu);
    if one_minus.is_negative() || one_minus.is_zero() {
        return Err(EvalError::NotInRadius);
    }
    // smallest D with c·t^(D+1)/(1−t) < 2^(−prec−4), capped by the known order
    let cb = Ball::from_rational(&b.c, 64).abs_upper();
    let inv_gap = Ball::exact(one_minus, 64).inv().unwrap().upper();
    let target = -(prec as i64) - 4;
    let mut d = 0i64;
    let mut tail = cb.mul(&tu).mul(&inv_gap);
    while d < f.order() && tail.magnitude() > target {
        d += 1;
        tail = tail.mul(&tu).ceil_to(62);
    }
    let wp = prec + 16;
    let xw = ComplexBall::new(x.re_mid().clone(), x.im_mid().clone(), x.rad().clone(), wp);
    let mut acc = ComplexBall::zero(wp);
    for n in (0..=d).rev() {
        let c = Ball::from_rational(&f.coeff(n), wp);
        acc = acc.mul(&xw).add(&ComplexBall::from_real(&c));
    }
    let value = ComplexBall::new(acc.re_mid().clone(), acc.im_mid().clone(), acc.rad().add(&tail.ceil_to(62)), prec);
    Ok(ArchValue { value, certified, terms: d })
}

/// Real-argument convenience wrapper.
pub fn eval_real(f: &QSeries, x: &Ball, bound: Option<&CoeffBound>) -> Result<(Ball, bool), EvalError> {
    let v = eval_complex(f, &ComplexBall::from_real(x), bound)?;
    Ok((v.value.re(), v.certified))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub prime: u64,
    pub samples: usize,
    pub precision: i64,
    pub inequality_failures: usize,
    pub composition_failures: usize,
    pub messages: Vec<String>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.inequality_failures == 0 && self.composition_failures == 0
    }
}

fn random_integral_series(rng: &mut ChaCha8Rng, order: i64, p: u64, vanish_at_zero: bool) -> QSeries {
    let mut c = Vec::with_capacity(order as usize + 1);
    for n in 0..=order {
        if (n == 0 && vanish_at_zero) || rng.gen_bool(0.15) {
            c.push(BigInt::zero());
            continue;
        }
        let e: u32 = rng.gen_range(0..4);
        let u: i64 = rng.gen_range(-60..=60);
        c.push(BigInt::from(p).pow(e) * u);
    }
    QSeries::from_ints(0, c)
}

fn random_point(rng: &mut ChaCha8Rng, p: u64, k: i64) -> PadicNum {
    let v: u32 = rng.gen_range(1..=3);
    let mut a: i64 = rng.gen_range(1..10_000);
    let mut b: i64 = rng.gen_range(1..10_000);
    while a % p as i64 == 0 {
        a += 1;
    }
    while b % p as i64 == 0 {
        b += 1;
    }
    if rng.gen_bool(0.5) {
        a = -a;
    }
    let x = BigRational::new(BigInt::from(p).pow(v) * a, BigInt::from(b));
    PadicNum::from_rational(&x, p, k + 8)
}

/// Randomized checks of the mean-value inequality
/// `|g(x) − g(0)| ≤ R†(g)^{-1}|x|` and of `f(g(x)) = (f∘g)(x)`.
pub fn check_nonarch_lemmas(p: u64, samples: usize, seed: u64, k: i64) -> LemmaReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (p << 32));
    let order = k + 8;
    let mut rep = LemmaReport { prime: p, samples, precision: k, ..Default::default() };
    for i in 0..samples {
        let f = random_integral_series(&mut rng, order, p, false);
        let g = random_integral_series(&mut rng, order, p, true);
        let x = random_point(&mut rng, p, k);
        let gx = match eval_padic(&g, &x, k, None) {
            Ok(v) => v,
            Err(e) => {
                rep.inequality_failures += 1;
                rep.messages.push(format!("sample {i}: {e}"));
                continue;
            }
        };
        // v(g(x) − g(0)) ≥ v(x) + min v(b_n)/n; g(0) = 0 here
        if let Some(rho) = r_dagger_exponent(&g, p) {
            let lhs = arith::int(gx.valuation());
            let rhs = arith::int(x.valuation()) + rho;
            if lhs < rhs {
                rep.inequality_failures += 1;
                rep.messages.push(format!("sample {i}: v(g(x)) = {lhs} < {rhs}"));
            }
        }
        let fg = f.compose(&g).expect("g(0) = 0");
        let two_path = eval_padic(&fg, &x, k, None).and_then(|l| eval_padic(&f, &gx, k, None).map(|r| (l, r)));
        match two_path {
            Ok((l, r)) => {
                let kk = l.abs_precision().min(r.abs_precision());
                if kk < k || l.congruent(&r, kk) != Some(true) {
                    rep.composition_failures += 1;
                    rep.messages.push(format!("sample {i}: {l} vs {r}"));
                }
            }
            Err(e) => {
                rep.composition_failures += 1;
                rep.messages.push(format!("sample {i}: {e}"));
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    #[test]
    fn r_dagger_cases() {
        let f = QSeries::from_i64(0, &[1, -372, -266076]);
        assert_eq!(r_dagger(&f, 5).basis, RadiusBasis::IntegralCoefficients);
        assert!(r_dagger(&f, 5).certified);
        let g = QSeries::new(0, (0..8).map(|n| rat(1, 3i64.pow(n))).collect());
        let r = r_dagger(&g, 3);
        assert!(!r.certified);
        assert_eq!(r.lower, Radius::PowerOfP { prime: 3, exponent: int(-1) });
        assert_eq!(r_dagger(&QSeries::constant(int(5), 4), 7).lower, Radius::Infinite);
    }

    #[test]
    fn padic_examples() {
        let x = PadicNum::from_i64(10, 5, 30);
        assert_eq!(eval_padic(&QSeries::x(40), &x, 30, None).unwrap().congruent(&x, 30), Some(true));
        let f = QSeries::from_i64(0, &[1, -372, -266076]);
        let z = PadicNum::from_i64(0, 5, 30);
        assert_eq!(eval_padic(&f, &z, 30, None).unwrap().residue(30).unwrap(), BigInt::one());
        let geo = QSeries::from_ints(0, vec![BigInt::one(); 60]);
        let v = eval_padic(&geo, &PadicNum::from_i64(5, 5, 40), 40, None).unwrap();
        let want = PadicNum::from_rational(&rat(1, -4), 5, 40);
        assert_eq!(v.congruent(&want, 40), Some(true));
        assert_eq!(eval_padic(&geo, &PadicNum::from_i64(2, 5, 40), 40, None), Err(EvalError::NotInRadius));
    }

    #[test]
    fn padic_with_supplied_bound() {
        // Σ p^-n X^n at x = p^2 equals 1/(1 − p)
        let f = QSeries::new(0, (0..80).map(|n| rat(1, 5i64.pow(n.min(25)))).collect::<Vec<_>>()[..26].to_vec());
        let x = PadicNum::from_i64(25, 5, 40);
        assert_eq!(eval_padic(&f, &x, 20, None), Err(EvalError::UncertifiedTail));
        let b = PadicBound { slope: int(1), offset: int(0) };
        let v = eval_padic(&f, &x, 20, Some(&b)).unwrap();
        let want = PadicNum::from_rational(&rat(1, -4), 5, 20);
        assert_eq!(v.congruent(&want, 20), Some(true));
    }

    #[test]
    fn complex_examples() {
        let f = QSeries::from_i64(0, &[1, 1]);
        let b = CoeffBound { c: int(1), rho: int(1) };
        let v = eval_complex(&f, &ComplexBall::from_rational(&rat(1, 2), 128), Some(&b)).unwrap();
        assert!(v.value.re().contains_rational(&rat(3, 2)));
        let geo = QSeries::from_ints(0, vec![BigInt::one(); 30]);
        assert_eq!(
            eval_complex(&geo, &ComplexBall::from_rational(&int(1), 128), Some(&b)),
            Err(EvalError::NotInRadius)
        );
    }

    #[test]
    fn lemmas_hold_on_random_instances() {
        for p in [2, 3, 5] {
            let r = check_nonarch_lemmas(p, 20, 7, 40);
            assert!(r.passed(), "{:?}", r.messages);
        }
    }

    #[test]
    fn tate_a4_two_paths_at_two() {
        let (a4, _) = crate::qexp::tate_coefficients(60).unwrap();
        let x = PadicNum::from_i64(2, 2, 50);
        let lhs = eval_padic(&a4.compose(&a4).unwrap(), &x, 40, None).unwrap();
        let gx = eval_padic(&a4, &x, 40, None).unwrap();
        let rhs = eval_padic(&a4, &gx, 40, None).unwrap();
        assert_eq!(lhs.congruent(&rhs, 40), Some(true));
    }
}
