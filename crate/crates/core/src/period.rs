//! Periods and quasi-periods of the family `E_s` with `j(E_s) = 1/s`.
//!
//! The curve is `y² + xy = x³ − 36s/(1−1728s)·x − s/(1−1728s)`. With
//! `X = x + 1/12` and `Y = 2y + x` it becomes `Y² = 4X³ − g2·X − g3`,
//! `g2 = 1/(12u)`, `g3 = −1/(216u)`, `u = 1 − 1728s`, so that
//! `ω = dx/(2y+x) = dX/Y` and `η = (x + 1/12)dx/(2y+x) = X dX/Y`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arith::{self, fmt_rational, int, rat};
use crate::ball::{self, agm_with_sum, Ball, ComplexBall, Dyadic};
use crate::linalg::nullspace_rat;
use crate::place::{self, CoeffBound, EvalError};
use crate::poly::Poly;
use crate::qexp::{self, Name};
use crate::series::QSeries;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PeriodError {
    #[error("s = {0} is not in the disc Δ_S")]
    NotInDeltaS(String),
    #[error("s must be a nonzero rational different from 1/1728")]
    BadParameter,
    #[error("the lattice route needs 0 < s < 1/1728")]
    NotReal,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("reconstruction failed: {0}")]
    ReconstructionFailed(String),
    #[error("series evaluation: {0}")]
    Eval(#[from] EvalError),
    #[error("series: {0}")]
    Series(String),
}

/// A parameter `s ∈ S*` and the invariants of `E_s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvePoint {
    s: BigRational,
}

impl CurvePoint {
    pub fn new(s: BigRational) -> Result<Self, PeriodError> {
        if s.is_zero() || s == rat(1, 1728) {
            return Err(PeriodError::BadParameter);
        }
        Ok(CurvePoint { s })
    }

    pub fn s(&self) -> &BigRational {
        &self.s
    }

    /// `1 − 1728s`.
    pub fn u(&self) -> BigRational {
        int(1) - int(1728) * &self.s
    }

    pub fn j(&self) -> BigRational {
        self.s.recip()
    }

    /// `j/(j − 1728)`.
    pub fn c4(&self) -> BigRational {
        self.u().recip()
    }

    pub fn c6(&self) -> BigRational {
        -self.u().recip()
    }

    /// Coefficients `(a4, a6)` of `y² + xy = x³ + a4·x + a6`.
    pub fn long_form(&self) -> (BigRational, BigRational) {
        let u = self.u();
        (-int(36) * &self.s / &u, -&self.s / &u)
    }

    pub fn g2(&self) -> BigRational {
        (int(12) * self.u()).recip()
    }

    pub fn g3(&self) -> BigRational {
        -(int(216) * self.u()).recip()
    }

    /// `j` recomputed from `g2`, `g3`.
    pub fn j_from_invariants(&self) -> BigRational {
        let g2c = self.g2().pow(3);
        let d = &g2c - int(27) * self.g3().pow(2);
        int(1728) * g2c / d
    }

    /// Real roots `e1 > e2 > e3` of `4X³ − g2X − g3` for `0 < s < 1/1728`.
    pub fn roots(&self, prec: u64) -> Result<[Ball; 3], PeriodError> {
        if !self.s.is_positive() || self.u() <= BigRational::zero() {
            return Err(PeriodError::NotReal);
        }
        Ok(real_roots(&self.u(), prec))
    }
}

/// Sign-exact evaluation of `864n X³ − 18d X + d`, a positive multiple of
/// `4X³ − g2X − g3` for `u = n/d`.
struct Cubic {
    a3: Dyadic,
    a1: Dyadic,
    a0: Dyadic,
}

impl Cubic {
    fn new(u: &BigRational) -> Self {
        let (n, d) = (u.numer(), u.denom());
        Cubic {
            a3: Dyadic::from_int(&(n * BigInt::from(864))),
            a1: Dyadic::from_int(&(d * BigInt::from(-18))),
            a0: Dyadic::from_int(d),
        }
    }

    fn eval(&self, x: &Dyadic) -> Dyadic {
        self.a3.mul(&x.mul(x)).add(&self.a1).mul(x).add(&self.a0)
    }

    fn deriv(&self, x: &Dyadic) -> Dyadic {
        self.a3.mul(&x.mul(x)).mul(&Dyadic::from_i64(3)).add(&self.a1)
    }
}

/// Root in `[lo, hi]` (opposite signs at the ends) to absolute width `2^(−wp)`.
fn refine_root(p: &Cubic, mut lo: Dyadic, mut hi: Dyadic, guess: Option<Dyadic>, wp: u64) -> (Dyadic, Dyadic) {
    let slo = p.eval(&lo).sign();
    let eps = Dyadic::pow2(-(wp as i64));
    let mut x = guess.filter(|g| *g > lo && *g < hi).unwrap_or_else(|| lo.add(&hi).mul_2exp(-1));
    for _ in 0..4 * wp {
        if hi.sub(&lo) <= eps {
            break;
        }
        let fx = p.eval(&x);
        if fx.is_zero() {
            return (x.clone(), x);
        }
        if fx.sign() == slo {
            lo = x.clone();
        } else {
            hi = x.clone();
        }
        let dfx = p.deriv(&x);
        let mut next = None;
        if !dfx.is_zero() {
            let step = Ball::exact(fx, wp + 16).div(&Ball::exact(dfx, wp + 16)).map(|b| b.mid().clone());
            if let Some(step) = step {
                let cand = x.sub(&step).floor_to(wp + 16);
                if cand > lo && cand < hi {
                    // once the step is tiny, bracket the iterate tightly
                    if step.abs() < eps {
                        let (a, b) = (cand.sub(&eps), cand.add(&eps));
                        if a > lo && b < hi && p.eval(&a).sign() == slo && p.eval(&b).sign() != slo {
                            return (a, b);
                        }
                    }
                    next = Some(cand);
                }
            }
        }
        x = next.unwrap_or_else(|| lo.add(&hi).mul_2exp(-1));
    }
    (lo, hi)
}

fn real_roots(u: &BigRational, prec: u64) -> [Ball; 3] {
    let wp = prec + 32;
    let p = Cubic::new(u);
    let uf = u.to_f64().unwrap();
    // critical points ±1/(12√u)
    let xc = Ball::from_rational(u, wp).sqrt().unwrap().mul_i64(12).inv().unwrap().mid().clone();
    let g2 = (12.0 * uf).recip();
    let bound = Dyadic::from_f64((1.0 + g2).ceil() + 1.0);
    // initial guesses from the trigonometric solution of X³ + pX + q
    let (pp, qq) = (-g2 / 4.0, -(-1.0 / (216.0 * uf)) / 4.0);
    let r = 2.0 * (-pp / 3.0).sqrt();
    let phi = ((3.0 * qq / (2.0 * pp)) * (-3.0 / pp).sqrt()).clamp(-1.0, 1.0).acos();
    let g: Vec<Dyadic> = (0..3)
        .map(|k| r * (phi / 3.0 - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
        .filter(|v| v.is_finite())
        .map(Dyadic::from_f64)
        .collect();
    let pick = |lo: &Dyadic, hi: &Dyadic| g.iter().find(|v| *v > lo && *v < hi).cloned();
    let brackets = [(xc.clone(), bound.clone()), (xc.neg(), xc.clone()), (bound.neg(), xc.neg())];
    let mut out = Vec::new();
    for (lo, hi) in brackets {
        let guess = pick(&lo, &hi);
        let (a, b) = refine_root(&p, lo, hi, guess, wp);
        out.push(Ball::from_endpoints(&a, &b, wp));
    }
    [out[0].clone(), out[1].clone(), out[2].clone()]
}

/// Lattice data of `E_s` for `0 < s < 1/1728`, from complete elliptic
/// integrals evaluated by the AGM.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub roots: [Ball; 3],
    /// `(1/2πi)∫_γ ω`.
    pub f_gamma: Ball,
    /// `(1/2πi)∫_δ ω = i·f_delta`.
    pub f_delta: Ball,
    pub g_gamma: Ball,
    pub g_delta: Ball,
    /// `d/ds` of `f_gamma` and `f_delta`.
    pub df_gamma: Ball,
    pub df_delta: Ball,
    /// `q = exp(−2π K/K′)`.
    pub q: Ball,
}

pub fn lattice(s: &BigRational, bits: u64) -> Result<Lattice, PeriodError> {
    let cp = CurvePoint::new(s.clone())?;
    let wp = bits + 64;
    let [e1, e2, e3] = cp.roots(wp)?;
    let pi = ball::pi(wp);
    let c = e1.sub(&e3);
    let sc = c.sqrt().ok_or_else(|| PeriodError::PrecisionExhausted("e1 − e3".into()))?;
    let d12 = e1.sub(&e2);
    let d23 = e2.sub(&e3);
    let fail = |w: &str| PeriodError::PrecisionExhausted(format!("AGM for {w}"));
    let (m_g, s_g) = agm_with_sum(&sc, &d23.sqrt().ok_or_else(|| fail("γ"))?, &d12).ok_or_else(|| fail("γ"))?;
    let (m_d, s_d) = agm_with_sum(&sc, &d12.sqrt().ok_or_else(|| fail("δ"))?, &d23).ok_or_else(|| fail("δ"))?;
    let f_gamma = m_g.mul_i64(2).inv().ok_or_else(|| fail("γ"))?;
    let f_delta = m_d.mul_i64(2).inv().ok_or_else(|| fail("δ"))?;
    let g_gamma = f_gamma.mul(&e1.sub(&s_g));
    let g_delta = f_delta.mul(&e3.add(&s_d));
    // complete integrals of the first and second kind, parameter m = (e2−e3)/c
    let ci = c.inv().unwrap();
    let m = d23.mul(&ci);
    let one = Ball::from_i64(1, wp);
    let m1 = one.sub(&m);
    let k = pi.mul(&sc).mul(&f_delta);
    let kp = pi.mul(&sc).mul(&f_gamma);
    let e = k.mul(&one.sub(&s_d.mul(&ci)));
    let ep = kp.mul(&one.sub(&s_g.mul(&ci)));
    // root derivatives e_i' = (g2' e_i + g3')/(12 e_i² − g2)
    let u = cp.u();
    let g2 = Ball::from_rational(&cp.g2(), wp);
    let dg2 = Ball::from_rational(&(int(144) / (&u * &u)), wp);
    let dg3 = Ball::from_rational(&(int(-8) / (&u * &u)), wp);
    let droot = |x: &Ball| dg2.mul(x).add(&dg3).div(&x.sqr().mul_i64(12).sub(&g2));
    let (de1, de2, de3) = (droot(&e1), droot(&e2), droot(&e3));
    let (de1, de2, de3) = match (de1, de2, de3) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(PeriodError::PrecisionExhausted("root derivatives".into())),
    };
    let dc = de1.sub(&de3);
    let dm = de2.sub(&de3).sub(&m.mul(&dc)).mul(&ci);
    let denom = m.mul(&m1).mul_i64(2).inv().ok_or_else(|| fail("dK/dm"))?;
    let dk_dm = e.sub(&m1.mul(&k)).mul(&denom);
    let dkp_dm = ep.sub(&m.mul(&kp)).mul(&denom).neg();
    let pisc = pi.mul(&sc).inv().unwrap();
    let half_dc_over_c = dc.mul(&ci).mul_2exp(-1);
    let df_delta = dk_dm.mul(&dm).mul(&pisc).sub(&f_delta.mul(&half_dc_over_c));
    let df_gamma = dkp_dm.mul(&dm).mul(&pisc).sub(&f_gamma.mul(&half_dc_over_c));
    let q = pi.mul_i64(-2).mul(&f_delta).div(&f_gamma).unwrap().exp();
    let r = |b: Ball| b.with_prec(bits + 32);
    Ok(Lattice {
        roots: [r(e1), r(e2), r(e3)],
        f_gamma: r(f_gamma),
        f_delta: r(f_delta),
        g_gamma: r(g_gamma),
        g_delta: r(g_delta),
        df_gamma: r(df_gamma),
        df_delta: r(df_delta),
        q: r(q),
    })
}

/// Radius of the disc `Δ_S`: the largest `k/2^24` with `|θ(s)| < e^{−2π}`
/// on `|s| ≤ k/2^24`, checked at the positive real point where `|θ|` is
/// largest (θ has nonnegative coefficients).
pub fn delta_s_radius() -> &'static BigRational {
    static R: OnceLock<BigRational> = OnceLock::new();
    R.get_or_init(|| {
        let bound = ball::pi(128).mul_i64(-2).exp();
        let den = BigInt::one() << 24u32;
        let mut k = (&den / BigInt::from(1728)).to_i64().unwrap();
        while k > 0 {
            let r = BigRational::new(BigInt::from(k), den.clone());
            if let Ok(l) = lattice(&r, 128) {
                if l.q.upper() < bound.lower() {
                    return r;
                }
            }
            k -= 1;
            if BigRational::new(BigInt::from(k), den.clone()) < rat(1, 2000) {
                break;
            }
        }
        rat(1, 2000)
    })
}

/// Certified `|θ_n| ≤ 1800^n`: Cauchy's estimate on `|s| = 1/1800 < radius`
/// where `|θ| < e^{−2π} < 1`.
pub fn theta_coefficient_bound() -> CoeffBound {
    CoeffBound { c: int(1), rho: rat(1, 1800) }
}

fn in_delta_s(s: &BigRational) -> Result<(), PeriodError> {
    if s.abs() > *delta_s_radius() {
        return Err(PeriodError::NotInDeltaS(fmt_rational(s)));
    }
    Ok(())
}

fn series(name: Name, order: i64) -> Result<QSeries, PeriodError> {
    qexp::get(name, order).map_err(|e| PeriodError::Series(e.to_string()))
}

const SERIES_ORDER: i64 = 400;

/// `q = θ(s)` as a ball, with `|q| < e^{−2π}` asserted.
pub fn q_from_s(s: &BigRational, bits: u64) -> Result<ComplexBall, PeriodError> {
    if s.is_zero() {
        return Ok(ComplexBall::zero(bits));
    }
    in_delta_s(s)?;
    let q = if s.abs() <= rat(1, 3456) {
        let th = series(Name::Theta, SERIES_ORDER)?;
        place::eval_complex(&th, &ComplexBall::from_rational(s, bits), Some(&theta_coefficient_bound()))?.value
    } else if s.is_positive() {
        ComplexBall::from_real(&lattice(s, bits)?.q)
    } else {
        return Err(PeriodError::NotReal);
    };
    let bound = ball::pi(bits).mul_i64(-2).exp();
    if !(q.abs_upper() < bound.lower()) {
        return Err(PeriodError::NotInDeltaS(fmt_rational(s)));
    }
    Ok(q)
}

/// Full matrix `(1/2πi)(∫_γ ω, ∫_δ ω; ∫_γ η, ∫_δ η)`.
#[derive(Clone, Debug)]
pub struct PeriodMatrix {
    pub f_val: ComplexBall,
    pub fstar: ComplexBall,
    pub g_val: ComplexBall,
    pub gstar: ComplexBall,
}

impl PeriodMatrix {
    pub fn det(&self) -> ComplexBall {
        self.f_val.mul(&self.gstar).sub(&self.fstar.mul(&self.g_val))
    }

    /// `1/(2πi) = −i/(2π)`.
    pub fn legendre_target(bits: u64) -> ComplexBall {
        let v = ball::pi(bits + 16).mul_i64(2).inv().unwrap().neg();
        ComplexBall::from_parts(&Ball::zero(bits), &v)
    }

    pub fn legendre_holds(&self) -> bool {
        let d = self.det();
        d.sub(&Self::legendre_target(d.prec())).contains_zero()
    }

    /// `Im(F*/F) > 0`: the δ-column is oriented with `γ·δ = +1`.
    pub fn oriented(&self) -> bool {
        self.fstar.div(&self.f_val).is_some_and(|t| t.im().is_positive())
    }
}

/// Period matrix with the γ-column computed on two routes.
#[derive(Clone, Debug)]
pub struct PeriodReport {
    pub s: BigRational,
    pub matrix: PeriodMatrix,
    pub lattice: Lattice,
    /// `F(s)` from the series, with a certified tail.
    pub f_series: Option<Ball>,
    /// `G(s)` from the reconstructed series.
    pub g_series: Option<Ball>,
    /// `E2(q)/(12F)`, an independent value of the γ quasi-period.
    pub g_from_e2: Option<Ball>,
}

impl PeriodReport {
    pub fn f_agrees(&self) -> Option<bool> {
        self.f_series.as_ref().map(|f| f.overlaps(&self.lattice.f_gamma))
    }

    pub fn g_agrees(&self) -> Option<bool> {
        self.g_series.as_ref().map(|g| g.overlaps(&self.lattice.g_gamma))
    }

    pub fn combined_f_radius(&self) -> Option<Dyadic> {
        self.f_series.as_ref().map(|f| f.rad().add(self.lattice.f_gamma.rad()))
    }
}

/// `|F_n| ≤ (n+1)·1728^n` at radius `1/1800`.
fn f_bound() -> CoeffBound {
    place::f_coefficient_bound(&rat(1, 1800))
}

pub fn period_matrix(cp: &CurvePoint, bits: u64, with_g_series: bool) -> Result<PeriodReport, PeriodError> {
    let s = cp.s().clone();
    in_delta_s(&s)?;
    let l = lattice(&s, bits)?;
    let z = Ball::zero(bits + 32);
    let matrix = PeriodMatrix {
        f_val: ComplexBall::from_real(&l.f_gamma),
        fstar: ComplexBall::from_parts(&z, &l.f_delta),
        g_val: ComplexBall::from_real(&l.g_gamma),
        gstar: ComplexBall::from_parts(&z, &l.g_delta),
    };
    let near = s.abs() <= rat(1, 3456);
    let x = Ball::from_rational(&s, bits + 32);
    let f_series = if near {
        let f = series(Name::F, SERIES_ORDER)?;
        Some(place::eval_real(&f, &x, Some(&f_bound()))?.0)
    } else {
        None
    };
    let g_series = if near && with_g_series {
        let g = series(Name::G, SERIES_ORDER)?;
        Some(place::eval_real(&g, &x, Some(&g_coefficient_bound()))?.0)
    } else {
        None
    };
    let g_from_e2 = if near {
        let e2 = qexp::eisenstein(qexp::Eisenstein::E2, 200);
        // |E2_n| ≤ 24(n+1)²; on |q| ≤ 1/500 the tail is tiny
        let b = CoeffBound::poly_geometric(&int(24), 2, &int(1), &rat(1, 2));
        let e2q = place::eval_real(&e2, &l.q, Some(&b))?.0;
        e2q.div(&l.f_gamma.mul_i64(12))
    } else {
        None
    };
    Ok(PeriodReport { s, matrix, lattice: l, f_series, g_series, g_from_e2 })
}

/// `P/Q` with `Q(0) ≠ 0` after reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    pub num: Poly,
    pub den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Self {
        let g = num.gcd(&den);
        let (mut n, mut d) = if g.is_zero() || g.degree() == Some(0) {
            (num, den)
        } else {
            (num.div_rem(&g).0, den.div_rem(&g).0)
        };
        // normalize: den has constant term 1 when possible, else monic
        let k = if !d.coeff(0).is_zero() { d.coeff(0) } else { d.leading().cloned().unwrap() };
        n = n.scale(&k.recip());
        d = d.scale(&k.recip());
        RationalFunction { num: n, den: d }
    }

    pub fn eval(&self, x: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(x) / d)
        }
    }

    pub fn eval_ball(&self, x: &Ball) -> Option<Ball> {
        self.num.eval_ball(x).div(&self.den.eval_ball(x))
    }

    pub fn to_series(&self, order: i64) -> Result<QSeries, PeriodError> {
        let lift = |p: &Poly| QSeries::new(0, (0..=order).map(|k| p.coeff(k as usize)).collect());
        let inv = lift(&self.den).reciprocal().map_err(|e| PeriodError::Series(e.to_string()))?;
        Ok(&lift(&self.num) * &inv)
    }

    pub fn degree(&self) -> usize {
        self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0))
    }
}

impl std::fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == Poly::one() {
            write!(f, "{}", self.num.display_in("s"))
        } else {
            write!(f, "({})/({})", self.num.display_in("s"), self.den.display_in("s"))
        }
    }
}

/// Exact `P/Q` with `deg ≤ d` through all points, if one exists.
fn fit_rational(points: &[(BigRational, BigRational)], d: usize) -> Option<RationalFunction> {
    if points.len() < 2 * d + 2 {
        return None;
    }
    let rows: Vec<Vec<BigRational>> = points
        .iter()
        .map(|(x, y)| {
            let mut r = Vec::with_capacity(2 * d + 2);
            let mut xp = BigRational::one();
            let mut pw = Vec::new();
            for _ in 0..=d {
                pw.push(xp.clone());
                xp *= x;
            }
            r.extend(pw.iter().cloned());
            r.extend(pw.iter().map(|p| -(p * y)));
            r
        })
        .collect();
    let ns = nullspace_rat(&rows, 2 * d + 2).ok()?;
    let v = ns.basis.first()?;
    let num = Poly::new(v[..=d].to_vec());
    let den = Poly::new(v[d + 1..].to_vec());
    if den.is_zero() {
        return None;
    }
    let rf = RationalFunction::new(num, den);
    points.iter().all(|(x, y)| rf.eval(x).as_ref() == Some(y)).then_some(rf)
}

/// Pointwise values `(a(s), b(s))` with `G = aF + bF'` on both cycles.
pub fn pointwise_ab(s: &BigRational, bits: u64) -> Result<(Ball, Ball), PeriodError> {
    let l = lattice(s, bits)?;
    let det = l.f_gamma.mul(&l.df_delta).sub(&l.f_delta.mul(&l.df_gamma));
    let di = det.inv().ok_or_else(|| PeriodError::PrecisionExhausted("singular 2×2 system".into()))?;
    let a = l.g_gamma.mul(&l.df_delta).sub(&l.g_delta.mul(&l.df_gamma)).mul(&di);
    let b = l.f_gamma.mul(&l.g_delta).sub(&l.f_delta.mul(&l.g_gamma)).mul(&di);
    Ok((a, b))
}

const DENOMINATOR_BOUND: i64 = 1_000_000_000_000;

/// The simplest rational inside the ball, if its denominator is at most `10^12`.
pub fn recognize_rational(b: &Ball) -> Option<BigRational> {
    let x = arith::simplest_between(&b.lower().to_rational(), &b.upper().to_rational());
    (x.denom() <= &BigInt::from(DENOMINATOR_BOUND)).then_some(x)
}

#[derive(Clone, Debug)]
pub struct HeldOutCheck {
    pub s: BigRational,
    pub residual_gamma: Ball,
    pub residual_delta: Ball,
}

impl HeldOutCheck {
    pub fn passed(&self) -> bool {
        self.residual_gamma.contains_zero() && self.residual_delta.contains_zero()
    }
}

#[derive(Clone, Debug)]
pub struct GReconstruction {
    pub a: RationalFunction,
    pub b: RationalFunction,
    pub series: QSeries,
    pub samples: Vec<BigRational>,
    pub held_out: Vec<HeldOutCheck>,
    pub degree_budget: usize,
}

impl GReconstruction {
    pub fn validated(&self) -> bool {
        !self.held_out.is_empty() && self.held_out.iter().all(HeldOutCheck::passed)
    }
}

fn sample_point(i: usize) -> BigRational {
    rat(1, 2000 + 250 * i as i64)
}

/// Recovers `a, b ∈ ℚ(s)` with `G = aF + s·dF/ds`-type structure from
/// period values, then builds the series of `G` to `order`.
pub fn reconstruct_g(order: i64, sample_count: usize, bits: u64) -> Result<GReconstruction, PeriodError> {
    let mut budget = 8usize;
    let samples: Vec<BigRational> = (0..sample_count).map(sample_point).collect();
    let mut a_pts = Vec::new();
    let mut b_pts = Vec::new();
    for s in &samples {
        let (a, b) = pointwise_ab(s, bits)?;
        let ra = recognize_rational(&a).ok_or_else(|| PeriodError::ReconstructionFailed(format!("a({}) = {a}", s)))?;
        let rb = recognize_rational(&b).ok_or_else(|| PeriodError::ReconstructionFailed(format!("b({}) = {b}", s)))?;
        a_pts.push((s.clone(), ra));
        b_pts.push((s.clone(), rb));
    }
    let (a, b) = loop {
        let fa = (0..=budget).find_map(|d| fit_rational(&a_pts, d));
        let fb = (0..=budget).find_map(|d| fit_rational(&b_pts, d));
        match (fa, fb) {
            (Some(a), Some(b)) => break (a, b),
            _ if 2 * (2 * budget) + 2 <= sample_count => budget *= 2,
            _ => {
                return Err(PeriodError::ReconstructionFailed(format!(
                    "no rational functions of degree ≤ {budget} through {sample_count} samples"
                )))
            }
        }
    };
    let mut held_out = Vec::new();
    for i in 0..3 {
        let s = rat(1, 2100 + 500 * i as i64 + 37);
        let l = lattice(&s, bits)?;
        let x = Ball::from_rational(&s, bits + 32);
        let (av, bv) = match (a.eval_ball(&x), b.eval_ball(&x)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(PeriodError::ReconstructionFailed("pole at a held-out point".into())),
        };
        let rg = l.g_gamma.sub(&av.mul(&l.f_gamma).add(&bv.mul(&l.df_gamma)));
        let rd = l.g_delta.sub(&av.mul(&l.f_delta).add(&bv.mul(&l.df_delta)));
        held_out.push(HeldOutCheck { s, residual_gamma: rg, residual_delta: rd });
    }
    let f = series(Name::F, order + 1)?;
    let series = (&(&a.to_series(order)? * &f.truncate(order)) + &(&b.to_series(order)? * &f.derivative())).truncate(order);
    Ok(GReconstruction { a, b, series, samples, held_out, degree_budget: budget })
}

/// Bound `|G_n| ≤ (5/4)(n+1)²·1728^n` at radius `1/1800`, valid for
/// `G = (1+3456s)/(12(1−1728s))·F + s·F'` and `|F_n| ≤ (n+1)·1728^n`.
pub fn g_coefficient_bound() -> CoeffBound {
    CoeffBound::poly_geometric(&rat(5, 4), 2, &int(1728), &rat(1, 1800))
}

/// The closed form that [`reconstruct_g`] recovers.
pub fn expected_ab() -> (RationalFunction, RationalFunction) {
    (
        RationalFunction::new(Poly::from_i64(&[1, 3456]), Poly::from_i64(&[12, -20736])),
        RationalFunction::new(Poly::from_i64(&[0, 1]), Poly::one()),
    )
}

/// Series of `G` from the reconstruction at default settings.
pub fn g_series_default(order: i64) -> Result<QSeries, PeriodError> {
    let r = reconstruct_g(order, 18, 256)?;
    if !r.validated() {
        return Err(PeriodError::ReconstructionFailed("held-out check failed".into()));
    }
    Ok(r.series)
}

/// One row of the JSON periods report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodSample {
    pub s: String,
    #[serde(rename = "F_series")]
    pub f_series: Option<String>,
    #[serde(rename = "F_lattice")]
    pub f_lattice: String,
    pub det_err: String,
    pub legendre: bool,
    pub f_agree: Option<bool>,
}

impl PeriodReport {
    pub fn sample(&self) -> PeriodSample {
        let d = self.matrix.det().sub(&PeriodMatrix::legendre_target(self.matrix.f_val.prec()));
        PeriodSample {
            s: fmt_rational(&self.s),
            f_series: self.f_series.as_ref().map(|b| b.to_string_digits(30)),
            f_lattice: self.lattice.f_gamma.to_string_digits(30),
            det_err: d.to_string_digits(5),
            legendre: self.matrix.legendre_holds(),
            f_agree: self.f_agrees(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants_of_the_family() {
        let cp = CurvePoint::new(rat(1, 5000)).unwrap();
        assert_eq!(cp.j_from_invariants(), int(5000));
        assert_eq!(cp.c4(), cp.u().recip());
        assert!(CurvePoint::new(rat(1, 1728)).is_err());
    }

    #[test]
    fn roots_are_ordered_and_sum_to_zero() {
        let cp = CurvePoint::new(rat(1, 100000)).unwrap();
        let [a, b, c] = cp.roots(200).unwrap();
        assert!(a.lower() > b.upper() && b.lower() > c.upper());
        assert!(a.add(&b).add(&c).contains_zero());
        assert!(a.rad().magnitude() < -200);
        // close to the degenerate configuration (1/12, 1/12, −1/6)
        let cp = CurvePoint::new(rat(1, 10i64.pow(15))).unwrap();
        let [a, b, _] = cp.roots(128).unwrap();
        assert!(a.lower() > b.upper());
    }

    #[test]
    fn legendre_relation_and_orientation() {
        let l = lattice(&rat(1, 100000), 256).unwrap();
        let z = Ball::zero(288);
        let m = PeriodMatrix {
            f_val: ComplexBall::from_real(&l.f_gamma),
            fstar: ComplexBall::from_parts(&z, &l.f_delta),
            g_val: ComplexBall::from_real(&l.g_gamma),
            gstar: ComplexBall::from_parts(&z, &l.g_delta),
        };
        assert!(m.legendre_holds());
        assert!(m.oriented());
        assert!(m.det().rad().magnitude() < -200);
    }

    #[test]
    fn lattice_matches_series_and_e2() {
        let cp = CurvePoint::new(rat(1, 100000)).unwrap();
        let r = period_matrix(&cp, 256, false).unwrap();
        assert_eq!(r.f_agrees(), Some(true));
        assert!(r.combined_f_radius().unwrap().magnitude() < -70);
        assert!(r.g_from_e2.as_ref().unwrap().overlaps(&r.lattice.g_gamma));
        let th = q_from_s(&rat(1, 100000), 256).unwrap();
        assert!(th.re().overlaps(&r.lattice.q));
    }

    #[test]
    fn derivative_matches_series() {
        let s = rat(1, 20000);
        let l = lattice(&s, 256).unwrap();
        let f = qexp::get(Name::F, 300).unwrap().derivative();
        let b = place::f_prime_coefficient_bound(&rat(1, 1800));
        let v = place::eval_real(&f, &Ball::from_rational(&s, 288), Some(&b)).unwrap().0;
        assert!(v.overlaps(&l.df_gamma), "{v} vs {}", l.df_gamma);
    }

    #[test]
    fn pointwise_coefficients_are_rational() {
        let s = rat(1, 3000);
        let (a, b) = pointwise_ab(&s, 256).unwrap();
        assert_eq!(recognize_rational(&b), Some(s.clone()));
        let (ea, _) = expected_ab();
        assert_eq!(recognize_rational(&a), ea.eval(&s));
    }

    #[test]
    fn q_parameter() {
        assert!(q_from_s(&int(0), 128).unwrap().contains_zero());
        let q = q_from_s(&rat(1, 1_000_000), 256).unwrap();
        // s + 744s² + 750420s³ + O(s⁴)
        let want = rat(1, 1_000_000) + rat(744, 1_000_000_000_000) + rat(750420, 1_000_000_000_000_000_000);
        assert!((q.re().to_f64() - want.to_f64().unwrap()).abs() < 1e-14);
        assert!(matches!(q_from_s(&rat(1, 1000), 128), Err(PeriodError::NotInDeltaS(_))));
    }

    #[test]
    fn radius_is_just_below_the_elliptic_point() {
        let r = delta_s_radius();
        assert!(*r < rat(1, 1728));
        assert_eq!(*r, BigRational::new(BigInt::from(9709), BigInt::one() << 24u32));
    }

    #[test]
    fn g_reconstruction_matches_e2_oracle() {
        let r = reconstruct_g(60, 18, 256).unwrap();
        assert!(r.validated());
        let (ea, eb) = expected_ab();
        assert_eq!((r.a.clone(), r.b.clone()), (ea, eb));
        // independent route: G(s) = E2(θ(s)) / (12 F(s))
        let th = qexp::get(Name::Theta, 60).unwrap();
        let e2 = qexp::eisenstein(qexp::Eisenstein::E2, 60).compose(&th).unwrap();
        let f12 = qexp::get(Name::F, 60).unwrap().scale_int(12);
        let oracle = &e2 * &f12.reciprocal().unwrap();
        assert_eq!(r.series, oracle);
        assert_eq!(r.series.coeff(0), rat(1, 12));
    }
}
