//! Homogeneous polynomials in named variables with exact coefficients.

use std::collections::BTreeMap;
use std::fmt::{self, Debug, Display};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{self, fmt_rational};
use crate::poly::Poly;
use crate::quad::QuadNum;

/// Coefficient ring of a [`RelationPoly`].
pub trait Coefficient: Clone + PartialEq + Debug + Display {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_rational(x: &BigRational) -> Self;
    /// Exact machine-readable form used in JSON.
    fn exact_string(&self) -> String {
        self.to_string()
    }
    /// Inverse of `exact_string`, where supported.
    fn parse_exact(_s: &str) -> Option<Self> {
        None
    }
}

impl Coefficient for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rational(x: &BigRational) -> Self {
        x.clone()
    }
    fn exact_string(&self) -> String {
        fmt_rational(self)
    }
    fn parse_exact(s: &str) -> Option<Self> {
        arith::parse_rational(s)
    }
}

impl Coefficient for Poly {
    fn zero() -> Self {
        Poly::zero()
    }
    fn one() -> Self {
        Poly::one()
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        Poly::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Poly::mul(self, o)
    }
    fn neg(&self) -> Self {
        Poly::neg(self)
    }
    fn from_rational(x: &BigRational) -> Self {
        Poly::constant(x.clone())
    }
}

impl Coefficient for QuadNum {
    fn zero() -> Self {
        QuadNum::rational(<BigRational as Zero>::zero())
    }
    fn one() -> Self {
        QuadNum::rational(<BigRational as One>::one())
    }
    fn is_zero(&self) -> bool {
        QuadNum::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        QuadNum::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        QuadNum::mul(self, o)
    }
    fn neg(&self) -> Self {
        QuadNum::neg(self)
    }
    fn from_rational(x: &BigRational) -> Self {
        QuadNum::rational(x.clone())
    }
    fn exact_string(&self) -> String {
        QuadNum::exact_string(self)
    }
    fn parse_exact(s: &str) -> Option<Self> {
        QuadNum::parse(s)
    }
}

/// Polynomial in `variables`; terms are keyed by exponent vectors and kept
/// in lexicographic order with the first variable largest.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationPoly<C: Coefficient> {
    variables: Vec<String>,
    terms: BTreeMap<Vec<u32>, C>,
}

#[derive(Serialize)]
struct TermJson {
    exponents: Vec<u32>,
    coefficient: String,
}

#[derive(Serialize)]
struct RelJson {
    variables: Vec<String>,
    degree: Option<u32>,
    homogeneous: bool,
    terms: Vec<TermJson>,
}

impl<C: Coefficient> RelationPoly<C> {
    pub fn zero(variables: Vec<String>) -> Self {
        RelationPoly { variables, terms: BTreeMap::new() }
    }

    pub fn with_names(names: &[&str]) -> Self {
        Self::zero(names.iter().map(|s| s.to_string()).collect())
    }

    /// `c · ∏ v_i^{e_i}`.
    pub fn monomial(variables: Vec<String>, exps: Vec<u32>, c: C) -> Self {
        let mut r = Self::zero(variables);
        r.add_term(exps, c);
        r
    }

    /// The `i`-th variable as a polynomial.
    pub fn var(variables: Vec<String>, i: usize) -> Self {
        let mut e = vec![0; variables.len()];
        e[i] = 1;
        Self::monomial(variables, e, C::one())
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn nvars(&self) -> usize {
        self.variables.len()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: C) {
        assert_eq!(exps.len(), self.variables.len());
        if c.is_zero() {
            return;
        }
        let s = match self.terms.remove(&exps) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !s.is_zero() {
            self.terms.insert(exps, s);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &C)> {
        // descending: first variable's exponent largest first
        self.terms.iter().rev()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> C {
        self.terms.get(exps).cloned().unwrap_or_else(C::zero)
    }

    /// Leading term in lexicographic order with the first variable largest.
    pub fn leading(&self) -> Option<(&Vec<u32>, &C)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut it = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match it.next() {
            None => true,
            Some(d) => it.all(|x| x == d),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.variables, o.variables);
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        let mut r = Self::zero(self.variables.clone());
        for (e, c) in &self.terms {
            r.terms.insert(e.clone(), c.neg());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &C) -> Self {
        let mut r = Self::zero(self.variables.clone());
        for (e, c) in &self.terms {
            r.add_term(e.clone(), c.mul(k));
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.variables, o.variables);
        let mut r = Self::zero(self.variables.clone());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1.mul(c2));
            }
        }
        r
    }

    /// Replaces each variable `i` by `images[i]`.
    pub fn substitute(&self, images: &[RelationPoly<C>]) -> Self {
        assert_eq!(images.len(), self.variables.len());
        let vars = images[0].variables.clone();
        let mut r = Self::zero(vars.clone());
        for (e, c) in &self.terms {
            let mut t = Self::monomial(vars.clone(), vec![0; vars.len()], c.clone());
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t = t.mul(&images[i]);
                }
            }
            r = r.add(&t);
        }
        r
    }

    pub fn map_coeffs<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> RelationPoly<D> {
        let mut r = RelationPoly::zero(self.variables.clone());
        for (e, c) in &self.terms {
            r.add_term(e.clone(), f(c));
        }
        r
    }

    /// Evaluates at `vals` in a ring described by closures; `None` for the
    /// zero polynomial.
    pub fn eval_with<V: Clone>(
        &self,
        vals: &[V],
        embed: impl Fn(&C) -> V,
        add: impl Fn(&V, &V) -> V,
        mul: impl Fn(&V, &V) -> V,
    ) -> Option<V> {
        let mut acc: Option<V> = None;
        for (e, c) in &self.terms {
            let mut t = embed(c);
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t = mul(&t, &vals[i]);
                }
            }
            acc = Some(match acc {
                None => t,
                Some(a) => add(&a, &t),
            });
        }
        acc
    }

    pub fn to_json(&self) -> serde_json::Value {
        let j = RelJson {
            variables: self.variables.clone(),
            degree: self.total_degree(),
            homogeneous: self.is_homogeneous(),
            terms: self.terms().map(|(e, c)| TermJson { exponents: e.clone(), coefficient: c.exact_string() }).collect(),
        };
        serde_json::to_value(j).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, String> {
        let vars: Vec<String> = v["variables"]
            .as_array()
            .ok_or("missing variables")?
            .iter()
            .map(|x| x.as_str().map(str::to_string).ok_or("bad variable"))
            .collect::<Result<_, _>>()?;
        let mut r = Self::zero(vars);
        for t in v["terms"].as_array().ok_or("missing terms")? {
            let exps: Vec<u32> = t["exponents"]
                .as_array()
                .ok_or("missing exponents")?
                .iter()
                .map(|x| x.as_u64().map(|k| k as u32).ok_or("bad exponent"))
                .collect::<Result<_, _>>()?;
            let c = t["coefficient"].as_str().and_then(C::parse_exact).ok_or("bad coefficient")?;
            if exps.len() != r.nvars() {
                return Err("exponent vector length mismatch".into());
            }
            r.add_term(exps, c);
        }
        Ok(r)
    }

    fn monomial_string(&self, e: &[u32]) -> String {
        let parts: Vec<String> = e
            .iter()
            .zip(&self.variables)
            .filter(|(k, _)| **k > 0)
            .map(|(k, v)| if *k == 1 { v.clone() } else { format!("{v}^{k}") })
            .collect();
        parts.join("*")
    }
}

impl RelationPoly<BigRational> {
    /// Primitive integer multiple with positive leading coefficient.
    pub fn normalized(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let cs: Vec<BigRational> = self.terms().map(|(_, c)| c.clone()).collect();
        let ints = crate::linalg::primitive(&cs);
        let sign = if ints[0].is_negative() { -1 } else { 1 };
        let mut r = Self::zero(self.variables.clone());
        for ((e, _), k) in self.terms().zip(ints) {
            r.add_term(e.clone(), BigRational::from_integer(k * sign));
        }
        r
    }

}

fn write_terms<C: Coefficient>(p: &RelationPoly<C>, f: &mut fmt::Formatter<'_>, coeff: impl Fn(&C) -> (bool, String, bool)) -> fmt::Result {
    if p.is_zero() {
        return f.write_str("0");
    }
    let mut first = true;
    for (e, c) in p.terms() {
        // (negative, magnitude text, magnitude is one)
        let (neg, text, unit) = coeff(c);
        if first {
            if neg {
                f.write_str("-")?;
            }
        } else {
            f.write_str(if neg { " - " } else { " + " })?;
        }
        first = false;
        let m = p.monomial_string(e);
        match (m.is_empty(), unit) {
            (true, _) => f.write_str(&text)?,
            (false, true) => f.write_str(&m)?,
            (false, false) => write!(f, "{text}*{m}")?,
        }
    }
    Ok(())
}

impl fmt::Display for RelationPoly<BigRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(self, f, |c| (c.is_negative(), arith::fmt_rational_short(&c.abs()), c.abs().is_one()))
    }
}

impl fmt::Display for RelationPoly<Poly> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(self, f, |c| {
            if c.coeffs().iter().filter(|x| !Zero::is_zero(*x)).count() == 1 {
                let l = c.coeffs().iter().find(|x| !Zero::is_zero(*x)).unwrap();
                let abs = if l.is_negative() { c.neg() } else { c.clone() };
                (l.is_negative(), abs.to_string(), Poly::is_one(&abs))
            } else {
                (false, format!("({c})"), false)
            }
        })
    }
}

impl fmt::Display for RelationPoly<QuadNum> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(self, f, |c| {
            if c.is_rational() {
                (c.a().is_negative(), arith::fmt_rational_short(&c.a().abs()), c.a().abs().is_one())
            } else {
                (false, format!("({c})"), false)
            }
        })
    }
}

impl Poly {
    fn is_one(&self) -> bool {
        *self == Poly::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;

    fn vars2() -> Vec<String> {
        vec!["Y1".into(), "Y2".into()]
    }

    #[test]
    fn arithmetic_and_display() {
        let y1 = RelationPoly::<BigRational>::var(vars2(), 0);
        let y2 = RelationPoly::<BigRational>::var(vars2(), 1);
        let p = y1.scale(&int(2)).sub(&y2);
        assert_eq!(p.to_string(), "2*Y1 - Y2");
        let q = p.mul(&y1.add(&y2));
        assert_eq!(q.to_string(), "2*Y1^2 + Y1*Y2 - Y2^2");
        assert!(q.is_homogeneous());
        assert_eq!(q.total_degree(), Some(2));
        let back = RelationPoly::from_json(&q.to_json()).unwrap();
        assert_eq!(back, q);
        assert_eq!(q.neg().normalized(), q);
    }

    #[test]
    fn substitution() {
        let y1 = RelationPoly::<BigRational>::var(vars2(), 0);
        let y2 = RelationPoly::<BigRational>::var(vars2(), 1);
        let p = y1.sub(&y2);
        assert!(p.substitute(&[y2.clone(), y2.clone()]).is_zero());
        let v = p.eval_with(&[int(3), int(5)], |c| c.clone(), |a, b| a + b, |a, b| a * b);
        assert_eq!(v, Some(int(-2)));
    }

    #[test]
    fn polynomial_coefficients_display() {
        let mut r = RelationPoly::<Poly>::zero(vars2());
        r.add_term(vec![1, 0], Poly::from_i64(&[1, 1]));
        r.add_term(vec![0, 1], Poly::from_i64(&[-1]));
        assert_eq!(r.to_string(), "(1 + X)*Y1 - Y2");
    }
}
