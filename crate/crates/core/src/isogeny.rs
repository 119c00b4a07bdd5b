//! Modular polynomials, isogenous pairs in the `1/j` family, and the
//! polynomial relations their periods satisfy at every place.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::arith::{self, fmt_rational, int, val_rat};
use crate::ball::{self, Ball, ComplexBall};
use crate::gfun::divisors;
use crate::padic::PadicNum;
use crate::period::{self, recognize_rational, Lattice, PeriodError};
use crate::place::{self, EvalError};
use crate::qexp::{self, Name};
use crate::quad::QuadNum;
use crate::relation::RelationPoly;
use crate::series::QSeries;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsogenyError {
    #[error("modular polynomials are available for levels 2, 3, 5, 7 (got {0})")]
    UnsupportedLevel(u64),
    #[error("order {given} is too small, need at least {needed}")]
    InsufficientOrder { needed: i64, given: i64 },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("integral j-invariant {0}: possible CM point")]
    CmPoint(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("two integer matrices fit the lattices; more bits needed")]
    AmbiguousLattice,
    #[error("no integer matrix of determinant {0} relates the lattices")]
    NotIsogenous(u64),
    #[error("both pairs have r = 0; use the linear branch")]
    DegenerateInput,
    #[error("r ≠ 0 needs a second pair")]
    MissingSecondPair,
    #[error("scalars are not populated")]
    MissingScalars,
    #[error("no admissible place")]
    NoAdmissiblePlace,
    #[error("internal: {0}")]
    Internal(String),
    #[error(transparent)]
    Period(#[from] PeriodError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `ψ(M) = M·∏_{p|M}(1 + 1/p)`.
pub fn psi(m: u64) -> u64 {
    let mut n = m;
    let mut r = m;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            r = r / p * (p + 1);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        r = r / n * (n + 1);
    }
    r
}

/// `Φ_M(X, Y) = Σ c[i][k] X^i Y^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularPolynomial {
    level: u64,
    coeffs: Vec<Vec<BigInt>>,
}

impl ModularPolynomial {
    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn coeff(&self, i: usize, k: usize) -> BigInt {
        self.coeffs.get(i).and_then(|r| r.get(k)).cloned().unwrap_or_default()
    }

    pub fn degree_x(&self) -> usize {
        self.coeffs.iter().rposition(|r| r.iter().any(|c| !c.is_zero())).unwrap_or(0)
    }

    pub fn degree_y(&self) -> usize {
        self.coeffs.iter().filter_map(|r| r.iter().rposition(|c| !c.is_zero())).max().unwrap_or(0)
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.coeffs.len();
        (0..n).all(|i| (0..n).all(|k| self.coeff(i, k) == self.coeff(k, i)))
    }

    pub fn eval(&self, x: &BigRational, y: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for row in self.coeffs.iter().rev() {
            let inner = row.iter().rev().fold(BigRational::zero(), |a, c| a * y + BigRational::from_integer(c.clone()));
            acc = acc * x + inner;
        }
        acc
    }

    /// `Φ(x(q), y(q))`.
    pub fn eval_series(&self, x: &QSeries, y: &QSeries) -> QSeries {
        let n = self.coeffs.len();
        let xp: Vec<QSeries> = powers(x, n - 1);
        let yp: Vec<QSeries> = powers(y, n - 1);
        let mut acc: Option<QSeries> = None;
        for (i, row) in self.coeffs.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let t = (&xp[i] * &yp[k]).scale(&BigRational::from_integer(c.clone()));
                acc = Some(match acc {
                    None => t,
                    Some(a) => &a + &t,
                });
            }
        }
        acc.expect("nonzero polynomial")
    }

    pub fn to_relation(&self) -> RelationPoly<BigRational> {
        let mut r = RelationPoly::with_names(&["X", "Y"]);
        for (i, row) in self.coeffs.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    r.add_term(vec![i as u32, k as u32], BigRational::from_integer(c.clone()));
                }
            }
        }
        r
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut terms = Vec::new();
        for (i, row) in self.coeffs.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    terms.push(json!({"x": i.to_string(), "y": k.to_string(), "coefficient": c.to_string()}));
                }
            }
        }
        json!({"level": self.level.to_string(), "degree": self.degree_x().to_string(), "terms": terms})
    }
}

impl std::fmt::Display for ModularPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.to_relation().fmt(f)
    }
}

fn powers(x: &QSeries, n: usize) -> Vec<QSeries> {
    let mut out = vec![QSeries::one(x.order() - x.offset().min(0) * n as i64 + 1)];
    for k in 1..=n {
        let next = if k == 1 { x.clone() } else { &out[k - 1] * x };
        out.push(next);
    }
    out
}

/// `Σ_n a_{pn} q^n`.
fn u_operator(f: &QSeries, p: i64) -> QSeries {
    let lo = -((-f.offset()).div_euclid(p));
    let hi = f.order().div_euclid(p);
    QSeries::new(lo, (lo..=hi).map(|m| f.coeff(m * p)).collect())
}

/// Writes a Laurent series with integer coefficients as a polynomial in `j`,
/// eliminating poles from the top.
fn polynomial_in_j(e: &QSeries, jp: &[QSeries]) -> Option<Vec<BigInt>> {
    let m = (-e.valuation().unwrap_or(0)).max(0) as usize;
    if m >= jp.len() {
        return None;
    }
    let mut rem = e.clone();
    let mut c = vec![BigInt::zero(); m + 1];
    for k in (1..=m).rev() {
        let a = rem.coeff(-(k as i64));
        if !a.is_integer() {
            return None;
        }
        rem = &rem - &jp[k].scale(&a);
        c[k] = a.to_integer();
    }
    let a0 = rem.coeff(0);
    if !a0.is_integer() {
        return None;
    }
    c[0] = a0.to_integer();
    rem = &rem - &QSeries::constant(a0, rem.order());
    if rem.order() < 1 || !rem.is_zero() {
        return None;
    }
    Some(c)
}

/// `Φ_M` from power sums of `j` over the `M + 1` sublattices of index `M`,
/// checked to vanish on `(j(q), j(q^M))` modulo `q^order`.
pub fn modular_polynomial(level: u64, order: i64) -> Result<ModularPolynomial, IsogenyError> {
    if ![2, 3, 5, 7].contains(&level) {
        return Err(IsogenyError::UnsupportedLevel(level));
    }
    let deg = psi(level) as usize;
    let needed = deg as i64 + 1;
    if order < needed {
        return Err(IsogenyError::InsufficientOrder { needed, given: order });
    }
    let p = level as i64;
    let n_int = 2 * p * (p + 1) + 10;
    let big = p * (n_int + 1) + p + 2;
    let j = qexp::get(Name::J, big).map_err(|e| IsogenyError::Internal(e.to_string()))?;
    let jp = powers(&j, deg);
    // S_e = Σ over the M+1 roots of their e-th powers
    let sums: Vec<QSeries> = (1..=deg)
        .map(|e| {
            let up = u_operator(&jp[e], p).scale_int(p);
            let sub = jp[e].truncate(n_int + 1).subs_power(p);
            (&up + &sub).truncate(n_int)
        })
        .collect();
    // Newton: k e_k = Σ_{i=1}^{k} (−1)^{i−1} e_{k−i} S_i
    let mut el: Vec<QSeries> = vec![QSeries::one(n_int)];
    for k in 1..=deg {
        let mut acc = QSeries::zero(n_int);
        for i in 1..=k {
            let t = &el[k - i] * &sums[i - 1];
            acc = if i % 2 == 1 { &acc + &t } else { &acc - &t };
        }
        el.push(acc.scale(&arith::rat(1, k as i64)));
    }
    let mut coeffs = vec![vec![BigInt::zero(); deg + 1]; deg + 1];
    coeffs[deg][0] = BigInt::one();
    for (k, e) in el.iter().enumerate().skip(1) {
        let c = polynomial_in_j(e, &jp).ok_or_else(|| IsogenyError::Internal(format!("e_{k} is not a polynomial in j")))?;
        if c.len() > deg + 1 {
            return Err(IsogenyError::Internal(format!("e_{k} has degree {} in j", c.len() - 1)));
        }
        let sign = if k % 2 == 1 { -1 } else { 1 };
        for (y, v) in c.into_iter().enumerate() {
            coeffs[deg - k][y] = v * sign;
        }
    }
    let phi = ModularPolynomial { level, coeffs };
    if !phi.is_symmetric() || phi.degree_x() != deg || phi.degree_y() != deg {
        return Err(IsogenyError::Internal("symmetry or degree check failed".into()));
    }
    if !annihilates_j_pair(&phi, order) {
        return Err(IsogenyError::Internal("q-expansion check failed".into()));
    }
    Ok(phi)
}

/// `Φ_M(j(q), j(q^M)) ≡ 0 mod q^order`.
pub fn annihilates_j_pair(phi: &ModularPolynomial, order: i64) -> bool {
    let p = phi.level as i64;
    let deg = psi(phi.level) as i64;
    let margin = deg * (p + 1) + 4;
    let Ok(j) = qexp::get(Name::J, order + margin) else {
        return false;
    };
    let jm = j.truncate(order / p + margin).subs_power(p);
    let v = phi.eval_series(&j, &jm);
    v.order() >= order - 1 && v.truncate(order - 1).is_zero()
}

pub fn phi2() -> &'static ModularPolynomial {
    static P: OnceLock<ModularPolynomial> = OnceLock::new();
    P.get_or_init(|| modular_polynomial(2, 60).expect("Φ2"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    TatePower,
    X0Param,
    Synthetic,
}

impl Provenance {
    fn as_str(self) -> &'static str {
        match self {
            Provenance::TatePower => "tate_power",
            Provenance::X0Param => "x0_param",
            Provenance::Synthetic => "synthetic",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "tate_power" => Some(Provenance::TatePower),
            "x0_param" => Some(Provenance::X0Param),
            "synthetic" => Some(Provenance::Synthetic),
            _ => None,
        }
    }
}

/// `f_*(γ₁) = pγ₂ + rδ₂`, `f_*(δ₁) = qγ₂ + sδ₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HomologyMatrix {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub s: i64,
}

impl HomologyMatrix {
    pub fn det(&self) -> i64 {
        self.p * self.s - self.q * self.r
    }

    pub fn neg(&self) -> Self {
        HomologyMatrix { p: -self.p, q: -self.q, r: -self.r, s: -self.s }
    }

    fn first_nonzero_positive(&self) -> bool {
        [self.p, self.q, self.r, self.s].into_iter().find(|x| *x != 0).is_some_and(|x| x > 0)
    }
}

/// `f*(ω₂) = aω₁` and `[f*(η₂)] = b[ω₁] + d[η₁]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scalars {
    pub a: QuadNum,
    pub b: QuadNum,
    pub d: QuadNum,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsogenyPair {
    pub s1: BigRational,
    pub s2: BigRational,
    pub degree: u64,
    pub scalars: Option<Scalars>,
    pub matrix: Option<HomologyMatrix>,
    pub provenance: Provenance,
    /// Hauptmodul value for `x0` pairs.
    pub parameter: Option<BigRational>,
}

impl IsogenyPair {
    pub fn new(s1: BigRational, s2: BigRational, degree: u64, provenance: Provenance) -> Self {
        IsogenyPair { s1, s2, degree, scalars: None, matrix: None, provenance, parameter: None }
    }

    pub fn identity(s: BigRational) -> Self {
        Self::new(s.clone(), s, 1, Provenance::Synthetic)
    }

    /// `a·d = M` and `det = M`, where populated.
    pub fn invariants_hold(&self) -> bool {
        let m = int(self.degree as i64);
        let sc = self.scalars.as_ref().is_none_or(|s| s.a.mul(&s.d) == QuadNum::rational(m.clone()));
        let mx = self.matrix.is_none_or(|x| x.det() == self.degree as i64);
        sc && mx
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "s1": fmt_rational(&self.s1),
            "s2": fmt_rational(&self.s2),
            "degree": self.degree.to_string(),
            "provenance": self.provenance.as_str(),
            "parameter": self.parameter.as_ref().map(fmt_rational),
            "scalars": self.scalars.as_ref().map(|s| json!({
                "a": s.a.exact_string(), "b": s.b.exact_string(), "d": s.d.exact_string()
            })),
            "matrix": self.matrix.map(|m| vec![m.p.to_string(), m.q.to_string(), m.r.to_string(), m.s.to_string()]),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, String> {
        let rat = |k: &str| v[k].as_str().and_then(arith::parse_rational).ok_or(format!("bad {k}"));
        let degree = v["degree"].as_str().and_then(|s| s.parse().ok()).ok_or("bad degree")?;
        let provenance = v["provenance"].as_str().and_then(Provenance::parse).ok_or("bad provenance")?;
        let parameter = v["parameter"].as_str().and_then(arith::parse_rational);
        let scalars = if v["scalars"].is_object() {
            let q = |k: &str| v["scalars"][k].as_str().and_then(QuadNum::parse).ok_or(format!("bad scalar {k}"));
            Some(Scalars { a: q("a")?, b: q("b")?, d: q("d")? })
        } else {
            None
        };
        let matrix = match v["matrix"].as_array() {
            Some(a) if a.len() == 4 => {
                let e: Vec<i64> =
                    a.iter().map(|x| x.as_str().and_then(|s| s.parse().ok()).ok_or("bad matrix")).collect::<Result<_, _>>()?;
                Some(HomologyMatrix { p: e[0], q: e[1], r: e[2], s: e[3] })
            }
            _ => None,
        };
        Ok(IsogenyPair { s1: rat("s1")?, s2: rat("s2")?, degree, scalars, matrix, provenance, parameter })
    }
}

/// `j(τ) = (t+256)³/t²` and `j(2τ) = (t+16)³/t` on `X₀(2)`.
pub fn x0_j_invariants(t: &BigRational) -> Option<(BigRational, BigRational)> {
    if t.is_zero() {
        return None;
    }
    Some(((t + int(256)).pow(3) / (t * t), (t + int(16)).pow(3) / t))
}

/// A degree-2 pair `s_i = 1/j_i` from the `X₀(2)` parametrization, admissible
/// at `∞` and at `p`.
pub fn x0_pair(t: &BigRational, p: u64) -> Result<IsogenyPair, IsogenyError> {
    let bad = |m: &str| IsogenyError::BadParameter(m.to_string());
    if !arith::is_prime(p) {
        return Err(bad("p must be prime"));
    }
    let (j1, j2) = x0_j_invariants(t).ok_or_else(|| bad("t = 0"))?;
    if !phi2().eval(&j1, &j2).is_zero() {
        return Err(bad("Φ2(j1, j2) ≠ 0"));
    }
    for j in [&j1, &j2] {
        if j.is_zero() || *j == int(1728) {
            return Err(bad("j ∈ {0, 1728}"));
        }
        if j.is_integer() {
            return Err(IsogenyError::CmPoint(fmt_rational(j)));
        }
    }
    let (s1, s2) = (j1.recip(), j2.recip());
    let r = period::delta_s_radius();
    for s in [&s1, &s2] {
        if s.abs() >= *r {
            return Err(bad(&format!("|{}| is outside Δ_S", fmt_rational(s))));
        }
        if val_rat(s, p).is_none_or(|v| v < 1) {
            return Err(bad(&format!("v_{p}({}) < 1", fmt_rational(s))));
        }
    }
    let mut pair = IsogenyPair::new(s1, s2, 2, Provenance::X0Param);
    pair.parameter = Some(t.clone());
    Ok(pair)
}

/// Tate isogeny `u ↦ u^m` from `𝔾_m/q₁^ℤ` to `𝔾_m/q₂^ℤ` with
/// `q₁ = q^n`, `q₂ = q^m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TatePair {
    pub m: u64,
    pub n: u64,
    pub degree: u64,
    pub q1_exponent: u64,
    pub q2_exponent: u64,
    pub matrix: HomologyMatrix,
}

pub fn tate_isogeny_data(m: u64, n: u64) -> Result<TatePair, IsogenyError> {
    if m == 0 || n == 0 {
        return Err(IsogenyError::BadParameter("m, n ≥ 1".into()));
    }
    Ok(TatePair {
        m,
        n,
        degree: m * n,
        q1_exponent: n,
        q2_exponent: m,
        matrix: HomologyMatrix { p: m as i64, q: 0, r: 0, s: n as i64 },
    })
}

impl TatePair {
    /// `q₁^m = q₂^n` as exponents of `q`.
    pub fn consistent(&self) -> bool {
        self.q1_exponent * self.m == self.q2_exponent * self.n && self.matrix.det() == self.degree as i64
    }
}

struct Columns {
    f: ComplexBall,
    fs: ComplexBall,
    g: ComplexBall,
    gs: ComplexBall,
}

fn columns(l: &Lattice) -> Columns {
    let z = Ball::zero(l.f_gamma.prec());
    Columns {
        f: ComplexBall::from_real(&l.f_gamma),
        fs: ComplexBall::from_parts(&z, &l.f_delta),
        g: ComplexBall::from_real(&l.g_gamma),
        gs: ComplexBall::from_parts(&z, &l.g_delta),
    }
}

fn cint(n: i64, prec: u64) -> ComplexBall {
    ComplexBall::from_rational(&int(n), prec)
}

fn lin(x: i64, u: &ComplexBall, y: i64, v: &ComplexBall) -> ComplexBall {
    cint(x, u.prec()).mul(u).add(&cint(y, v.prec()).mul(v))
}

struct RawScalars {
    a: ComplexBall,
    b: ComplexBall,
    d: ComplexBall,
    matrix: HomologyMatrix,
}

fn raw_scalars(pair: &IsogenyPair, bits: u64) -> Result<RawScalars, IsogenyError> {
    let c1 = columns(&period::lattice(&pair.s1, bits)?);
    let c2 = columns(&period::lattice(&pair.s2, bits)?);
    let m = pair.degree as i64;
    let bound = 2 * m;
    let mut found: Vec<HomologyMatrix> = Vec::new();
    for p in -bound..=bound {
        for q in -bound..=bound {
            for r in -bound..=bound {
                for s in -bound..=bound {
                    let mx = HomologyMatrix { p, q, r, s };
                    if mx.det() != m || !mx.first_nonzero_positive() {
                        continue;
                    }
                    // F₁*(pF₂ + rF₂*) = F₁(qF₂ + sF₂*)
                    let lhs = c1.fs.mul(&lin(p, &c2.f, r, &c2.fs));
                    let rhs = c1.f.mul(&lin(q, &c2.f, s, &c2.fs));
                    if lhs.sub(&rhs).contains_zero() {
                        found.push(mx);
                    }
                }
            }
        }
    }
    let matrix = match found.len() {
        0 => return Err(IsogenyError::NotIsogenous(pair.degree)),
        1 => found[0],
        _ => return Err(IsogenyError::AmbiguousLattice),
    };
    let HomologyMatrix { p, q, r, s } = matrix;
    let fail = || IsogenyError::PrecisionExhausted("period division".into());
    let a = lin(p, &c2.f, r, &c2.fs).div(&c1.f).ok_or_else(fail)?;
    let r1 = lin(p, &c2.g, r, &c2.gs);
    let r2 = lin(q, &c2.g, s, &c2.gs);
    let det = c1.f.mul(&c1.gs).sub(&c1.g.mul(&c1.fs));
    let b = r1.mul(&c1.gs).sub(&c1.g.mul(&r2)).div(&det).ok_or_else(fail)?;
    let d = c1.f.mul(&r2).sub(&c1.fs.mul(&r1)).div(&det).ok_or_else(fail)?;
    Ok(RawScalars { a, b, d, matrix })
}

fn real_rational(z: &ComplexBall) -> Option<BigRational> {
    if !z.im().contains_zero() {
        return None;
    }
    recognize_rational(&z.re())
}

fn exact_scalars(raw: &RawScalars, m: u64) -> Option<Scalars> {
    let a2 = real_rational(&raw.a.mul(&raw.a))?;
    if a2.is_zero() {
        return None;
    }
    let mut a = QuadNum::sqrt_of(&a2);
    let sign_neg = if a2.is_positive() { raw.a.re().is_negative() } else { raw.a.im().is_negative() };
    if sign_neg {
        a = a.neg();
    }
    let ratio = real_rational(&raw.b.div(&raw.a)?)?;
    let b = a.scale(&ratio);
    let d = a.inv()?.scale(&int(m as i64));
    Some(Scalars { a, b, d })
}

fn scalars_fit(raw: &RawScalars, sc: &Scalars) -> bool {
    let prec = raw.a.prec();
    raw.a.overlaps(&sc.a.to_complex_ball(prec))
        && raw.b.overlaps(&sc.b.to_complex_ball(prec))
        && raw.d.overlaps(&sc.d.to_complex_ball(prec))
}

/// Finds the homology matrix and the scalars `a, b, d ∈ ℚ(√D)` of the
/// isogeny `E_{s1} → E_{s2}` from the period lattices.
pub fn extract_isogeny_scalars(pair: &IsogenyPair, bits: u64) -> Result<IsogenyPair, IsogenyError> {
    let mut bits = bits;
    let mut last = IsogenyError::PrecisionExhausted("no attempt".into());
    for _ in 0..4 {
        let raw = match raw_scalars(pair, bits) {
            Ok(r) => r,
            Err(e @ (IsogenyError::AmbiguousLattice | IsogenyError::PrecisionExhausted(_))) => {
                last = e;
                bits *= 2;
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some(sc) = exact_scalars(&raw, pair.degree) {
            let check = raw_scalars(pair, 2 * bits)?;
            if check.matrix == raw.matrix && scalars_fit(&check, &sc) && scalars_fit(&raw, &sc) {
                let mut out = pair.clone();
                out.scalars = Some(sc);
                out.matrix = Some(raw.matrix);
                if !out.invariants_hold() {
                    return Err(IsogenyError::Internal("a·d or det differs from M".into()));
                }
                return Ok(out);
            }
        }
        last = IsogenyError::PrecisionExhausted(format!("scalars not recognized at {bits} bits"));
        bits *= 2;
    }
    Err(last)
}

fn names(vs: &[&str]) -> Vec<String> {
    vs.iter().map(|s| s.to_string()).collect()
}

/// `∏_{m ∈ ±divisors(M)} (aY₁ − mY₂)`, homogeneous of degree `2·d(M)`.
pub fn build_p_fin(a: &QuadNum, m: u64) -> RelationPoly<QuadNum> {
    let vars = names(&["Y1", "Y2"]);
    let mut acc = RelationPoly::monomial(vars.clone(), vec![0, 0], QuadNum::rational(int(1)));
    for k in divisors(m) {
        for sign in [1i64, -1] {
            let mut f = RelationPoly::monomial(vars.clone(), vec![1, 0], a.clone());
            f.add_term(vec![0, 1], QuadNum::rational(int(-(k as i64) * sign)));
            acc = acc.mul(&f);
        }
    }
    acc
}

pub const P_INF_VARIABLES: [&str; 8] = ["Y1", "Z1", "Y2", "Z2", "Y3", "Z3", "Y4", "Z4"];

/// Scalars of one pair as used by the archimedean relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArchData {
    pub a: QuadNum,
    pub b: QuadNum,
    pub d: QuadNum,
    pub p: i64,
    pub r: i64,
}

impl ArchData {
    pub fn from_pair(pair: &IsogenyPair) -> Result<Self, IsogenyError> {
        let (Some(sc), Some(mx)) = (&pair.scalars, &pair.matrix) else {
            return Err(IsogenyError::MissingScalars);
        };
        Ok(ArchData { a: sc.a.clone(), b: sc.b.clone(), d: sc.d.clone(), p: mx.p, r: mx.r })
    }

    pub fn synthetic(a: i64, b: i64, d: i64, r: i64) -> Self {
        let q = |x: i64| QuadNum::rational(int(x));
        ArchData { a: q(a), b: q(b), d: q(d), p: 1, r }
    }
}

fn mono(e: [u32; 8], c: QuadNum) -> RelationPoly<QuadNum> {
    RelationPoly::monomial(names(&P_INF_VARIABLES), e.to_vec(), c)
}

/// `−aZ_jY_i + bY_jY_i + dY_jZ_i` for the pair occupying slots `(i, j)`.
fn relation_pi(x: &ArchData, i: usize, j: usize) -> RelationPoly<QuadNum> {
    let e = |pairs: &[(usize, u32)]| {
        let mut v = [0u32; 8];
        for &(k, n) in pairs {
            v[k] += n;
        }
        v
    };
    let (yi, zi, yj, zj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
    mono(e(&[(zj, 1), (yi, 1)]), x.a.neg()).add(&mono(e(&[(yj, 1), (yi, 1)]), x.b.clone())).add(&mono(e(&[(yj, 1), (zi, 1)]), x.d.clone()))
}

/// The archimedean relation: `aY₁ − pY₂` when `r = 0` and no second pair is
/// given, otherwise `r′·Π₁₂ − r·Π₃₄`.
pub fn build_p_inf(first: &ArchData, second: Option<&ArchData>) -> Result<RelationPoly<QuadNum>, IsogenyError> {
    match second {
        None => {
            if first.r != 0 {
                return Err(IsogenyError::MissingSecondPair);
            }
            let mut e1 = [0u32; 8];
            e1[0] = 1;
            let mut e2 = [0u32; 8];
            e2[2] = 1;
            Ok(mono(e1, first.a.clone()).add(&mono(e2, QuadNum::rational(int(-first.p)))))
        }
        Some(sec) => {
            if first.r == 0 && sec.r == 0 {
                return Err(IsogenyError::DegenerateInput);
            }
            let p12 = relation_pi(first, 0, 1).scale(&QuadNum::rational(int(sec.r)));
            let p34 = relation_pi(sec, 2, 3).scale(&QuadNum::rational(int(first.r)));
            Ok(p12.sub(&p34))
        }
    }
}

/// `P(Y₁ ↦ Y₃, Z₁ ↦ Z₃) ≠ 0`, i.e. `P ∉ ⟨Y₁ − Y₃, Z₁ − Z₃⟩`.
pub fn outside_diagonal_ideal(p: &RelationPoly<QuadNum>) -> bool {
    if p.nvars() != 8 {
        return !p.is_zero();
    }
    let vars = p.variables().to_vec();
    let images: Vec<RelationPoly<QuadNum>> =
        (0..8).map(|k| RelationPoly::var(vars.clone(), if k == 0 { 4 } else if k == 1 { 5 } else { k })).collect();
    !p.substitute(&images).is_zero()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationBundle {
    pub degree: u64,
    pub p_inf: Option<RelationPoly<QuadNum>>,
    pub p_fin: RelationPoly<QuadNum>,
    /// `2·d(M)·T²`-type bound with `T = 1`.
    pub p_fin_bound: u32,
    /// `2·[K̂:ℚ]` with `[K̂:ℚ] = 1`.
    pub p_inf_bound: u32,
}

impl RelationBundle {
    pub fn build(pair: &IsogenyPair, second: Option<&IsogenyPair>) -> Result<Self, IsogenyError> {
        let sc = pair.scalars.as_ref().ok_or(IsogenyError::MissingScalars)?;
        let first = ArchData::from_pair(pair)?;
        let p_inf = match second {
            Some(s) => Some(build_p_inf(&first, Some(&ArchData::from_pair(s)?))?),
            None if first.r == 0 => Some(build_p_inf(&first, None)?),
            None => None,
        };
        let d = divisors(pair.degree).len() as u32;
        Ok(RelationBundle { degree: pair.degree, p_inf, p_fin: build_p_fin(&sc.a, pair.degree), p_fin_bound: 2 * d, p_inf_bound: 2 })
    }

    pub fn bounds_hold(&self) -> bool {
        let fin = self.p_fin.total_degree().is_some_and(|d| d <= self.p_fin_bound) && self.p_fin.is_homogeneous();
        let inf = self.p_inf.as_ref().is_none_or(|p| {
            p.is_homogeneous() && !p.is_zero() && p.total_degree().is_some_and(|d| d <= self.p_inf_bound)
        });
        fin && inf
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "degree": self.degree.to_string(),
            "p_fin": self.p_fin.to_json(),
            "p_inf": self.p_inf.as_ref().map(RelationPoly::to_json),
            "bounds": {"p_fin": self.p_fin_bound.to_string(), "p_inf": self.p_inf_bound.to_string()},
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, String> {
        let p_fin = RelationPoly::from_json(&v["p_fin"])?;
        let p_inf = if v["p_inf"].is_null() { None } else { Some(RelationPoly::from_json(&v["p_inf"])?) };
        let num = |x: &serde_json::Value| x.as_str().and_then(|s| s.parse().ok()).ok_or("bad number".to_string());
        Ok(RelationBundle {
            degree: num(&v["degree"])?,
            p_inf,
            p_fin,
            p_fin_bound: num(&v["bounds"]["p_fin"])? as u32,
            p_inf_bound: num(&v["bounds"]["p_inf"])? as u32,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Place {
    Infinite,
    Finite(u64),
}

impl Place {
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if s == "inf" {
            return Some(Place::Infinite);
        }
        let p: u64 = s.strip_prefix("p=")?.parse().ok()?;
        arith::is_prime(p).then_some(Place::Finite(p))
    }
}

impl std::fmt::Display for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Place::Infinite => f.write_str("inf"),
            Place::Finite(p) => write!(f, "p={p}"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PlaceResult {
    pub place: String,
    pub admissible: bool,
    pub reason: Option<String>,
    /// `m` with `a·F(s₁) − m·F(s₂)` vanishing (to `p^K`, or containing 0).
    pub vanishing_factors: Vec<String>,
    pub p_fin_vanishes: Option<bool>,
    pub p_inf_vanishes: Option<bool>,
    /// `−aG(s₂)F(s₁) + bF(s₂)F(s₁) + dF(s₂)G(s₁) − r/(2πi)` contains 0.
    pub relation_pi: Option<bool>,
    pub precision: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub places: Vec<PlaceResult>,
    pub passed: bool,
}

fn signed_divisors(m: u64) -> Vec<i64> {
    divisors(m).into_iter().flat_map(|d| [d as i64, -(d as i64)]).collect()
}

fn quad_fields(pairs: &[IsogenyPair]) -> Vec<BigInt> {
    let mut out: Vec<BigInt> = Vec::new();
    for p in pairs {
        if let Some(sc) = &p.scalars {
            for x in [&sc.a, &sc.b, &sc.d] {
                if !x.is_rational() && !out.contains(x.radicand()) {
                    out.push(x.radicand().clone());
                }
            }
        }
    }
    out
}

fn arch_verify(pairs: &[IsogenyPair], bundle: &RelationBundle, bits: u64) -> Result<PlaceResult, IsogenyError> {
    let r = period::delta_s_radius();
    let ok = pairs.iter().all(|p| {
        [&p.s1, &p.s2].into_iter().all(|s| s.is_positive() && *s < *r)
    });
    let mut res = PlaceResult {
        place: "inf".into(),
        admissible: ok,
        reason: None,
        vanishing_factors: vec![],
        p_fin_vanishes: None,
        p_inf_vanishes: None,
        relation_pi: None,
        precision: format!("{bits} bits"),
        passed: false,
    };
    if !ok {
        res.reason = Some("s outside (0, radius of Δ_S)".into());
        return Ok(res);
    }
    let mut vals = Vec::new();
    let mut pi_ok = true;
    let two_pi_i_inv = ComplexBall::from_parts(&Ball::zero(bits), &ball::pi(bits + 16).mul_i64(2).inv().unwrap().neg());
    for pair in pairs {
        let sc = pair.scalars.as_ref().ok_or(IsogenyError::MissingScalars)?;
        let mx = pair.matrix.ok_or(IsogenyError::MissingScalars)?;
        let c1 = columns(&period::lattice(&pair.s1, bits)?);
        let c2 = columns(&period::lattice(&pair.s2, bits)?);
        let (a, b, d) = (sc.a.to_complex_ball(bits), sc.b.to_complex_ball(bits), sc.d.to_complex_ball(bits));
        let lhs = a.neg().mul(&c2.g).mul(&c1.f).add(&b.mul(&c2.f).mul(&c1.f)).add(&d.mul(&c2.f).mul(&c1.g));
        let rhs = cint(mx.r, bits).mul(&two_pi_i_inv);
        pi_ok &= lhs.sub(&rhs).contains_zero();
        if std::ptr::eq(pair, &pairs[0]) {
            for m in signed_divisors(pair.degree) {
                if a.mul(&c1.f).sub(&cint(m, bits).mul(&c2.f)).contains_zero() {
                    res.vanishing_factors.push(m.to_string());
                }
            }
        }
        vals.extend([c1.f, c1.g, c2.f, c2.g]);
    }
    res.relation_pi = Some(pi_ok);
    if let Some(p) = &bundle.p_inf {
        if vals.len() == 4 {
            let z = ComplexBall::zero(bits);
            vals.extend([z.clone(), z.clone(), z.clone(), z]);
        }
        let v = p.eval_with(&vals, |c| c.to_complex_ball(bits), |x, y| x.add(y), |x, y| x.mul(y));
        res.p_inf_vanishes = v.map(|b| b.contains_zero());
    }
    res.passed = pi_ok && res.p_inf_vanishes != Some(false);
    Ok(res)
}

fn padic_verify(pairs: &[IsogenyPair], bundle: &RelationBundle, p: u64, k: i64) -> Result<PlaceResult, IsogenyError> {
    let mut res = PlaceResult {
        place: format!("p={p}"),
        admissible: false,
        reason: None,
        vanishing_factors: vec![],
        p_fin_vanishes: None,
        p_inf_vanishes: None,
        relation_pi: None,
        precision: format!("{p}^{k}"),
        passed: false,
    };
    let pair = &pairs[0];
    for s in [&pair.s1, &pair.s2] {
        if val_rat(s, p).is_none_or(|v| v < 1) {
            res.reason = Some(format!("v_{p}({}) < 1", fmt_rational(s)));
            return Ok(res);
        }
    }
    let fields = quad_fields(&pairs[..1]);
    if fields.len() > 1 {
        res.reason = Some("scalars in different quadratic fields".into());
        return Ok(res);
    }
    let work = k + 4;
    let root = match fields.first() {
        None => None,
        Some(dd) => {
            if p == 2 || (dd % BigInt::from(p)).is_zero() {
                res.reason = Some(format!("√{dd} is not in ℚ_{p}"));
                return Ok(res);
            }
            match PadicNum::from_int(dd, p, work + 2).sqrt() {
                Ok(r) => Some(r),
                Err(_) => {
                    res.reason = Some(format!("{dd} is not a square in ℚ_{p}"));
                    return Ok(res);
                }
            }
        }
    };
    res.admissible = true;
    let sc = pair.scalars.as_ref().ok_or(IsogenyError::MissingScalars)?;
    let embed = |x: &QuadNum| match &root {
        Some(r) => x.to_padic(r, work),
        None => PadicNum::from_rational(x.a(), p, work),
    };
    let f_at = |s: &BigRational| -> Result<PadicNum, IsogenyError> {
        let x = PadicNum::from_rational(s, p, work);
        let v = x.valuation().max(1);
        let f = qexp::get(Name::F, work / v + 2).map_err(|e| IsogenyError::Internal(e.to_string()))?;
        Ok(place::eval_padic(&f, &x, work, None)?)
    };
    let (f1, f2) = (f_at(&pair.s1)?, f_at(&pair.s2)?);
    let a = embed(&sc.a);
    for m in signed_divisors(pair.degree) {
        let diff = a.mul(&f1).sub(&PadicNum::from_i64(m, p, work).mul(&f2));
        if diff.congruent(&PadicNum::zero(p, work), k) == Some(true) {
            res.vanishing_factors.push(m.to_string());
        }
    }
    let val = bundle.p_fin.eval_with(&[f1, f2], |c| embed(c), |x, y| x.add(y), |x, y| x.mul(y));
    let fin = val.is_some_and(|v| v.congruent(&PadicNum::zero(p, work), k) == Some(true));
    res.p_fin_vanishes = Some(fin);
    res.passed = fin && res.vanishing_factors.len() == 1;
    Ok(res)
}

/// Evaluates the bundle's relations at every admissible place in `places`.
/// `pairs[0]` is the pair the bundle was built from; `pairs[1]`, if given,
/// fills the slots `(Y₃, Z₃, Y₄, Z₄)` of the quadratic archimedean relation.
pub fn multi_place_verify(
    pairs: &[IsogenyPair],
    bundle: &RelationBundle,
    places: &[Place],
    precision: i64,
    bits: u64,
) -> Result<VerifyReport, IsogenyError> {
    if pairs.is_empty() {
        return Err(IsogenyError::MissingScalars);
    }
    let mut out = Vec::new();
    for place in places {
        out.push(match place {
            Place::Infinite => arch_verify(pairs, bundle, bits)?,
            Place::Finite(p) => padic_verify(pairs, bundle, *p, precision)?,
        });
    }
    if !out.iter().any(|r| r.admissible) {
        return Err(IsogenyError::NoAdmissiblePlace);
    }
    let passed = out.iter().filter(|r| r.admissible).all(|r| r.passed);
    Ok(VerifyReport { places: out, passed })
}

/// Primes `p < bound` at which `x0_pair(t, p)` is admissible.
pub fn admissible_primes(t: &BigRational, bound: u64) -> Vec<u64> {
    (2..bound).filter(|&p| arith::is_prime(p) && x0_pair(t, p).is_ok()).collect()
}

/// Digits of `a` reported in text form.
pub fn describe_scalar(x: &QuadNum) -> String {
    match x.to_ball(64) {
        Some(b) => format!("{x} ≈ {}", b.to_f64()),
        None => x.to_string(),
    }
}
