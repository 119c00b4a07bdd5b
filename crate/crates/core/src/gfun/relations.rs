//! Homogeneous polynomial relations among power series, and their
//! specializations at a point.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::GfunError;
use crate::linalg::{self, nullspace_rat};
use crate::poly::Poly;
use crate::relation::RelationPoly;
use crate::series::QSeries;

/// Exponent vectors of total degree `delta` in `n` variables, first
/// variable's exponent descending.
pub(crate) fn monomials(n: usize, delta: u32) -> Vec<Vec<u32>> {
    if n == 1 {
        return vec![vec![delta]];
    }
    let mut out = Vec::new();
    for e in (0..=delta).rev() {
        for mut rest in monomials(n - 1, delta - e) {
            rest.insert(0, e);
            out.push(rest);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoundRelation {
    pub poly: RelationPoly<Poly>,
    /// Also annihilates the held-out coefficient equations.
    pub confirmed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationSearch {
    pub relations: Vec<FoundRelation>,
    pub unknowns: usize,
    pub rows_used: i64,
    pub held_out: i64,
}

impl RelationSearch {
    /// The system has full column rank: no relation within the bounds.
    pub fn certified_empty(&self) -> bool {
        self.relations.is_empty()
    }
}

const MARGIN: i64 = 10;

fn var_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("Y{i}")).collect()
}

/// Basis of the homogeneous degree-`delta` relations with coefficients in
/// `ℚ[X]` of degree at most `xdeg`.
pub fn find_functional_relations(series: &[QSeries], delta: u32, xdeg: usize) -> Result<RelationSearch, GfunError> {
    let n = series.len();
    assert!(n >= 1 && delta >= 1);
    let order = series.iter().map(QSeries::order).min().unwrap();
    let mons = monomials(n, delta);
    let unknowns = mons.len() * (xdeg + 1);
    let total = order + 1;
    if total < unknowns as i64 + MARGIN {
        return Err(GfunError::InsufficientCoefficients { needed: unknowns as i64 + MARGIN, available: total });
    }
    let held = ((total - unknowns as i64) / 2).min(100);
    let used = total - held;
    let prods: Vec<Vec<BigRational>> = mons
        .iter()
        .map(|e| {
            let mut p = QSeries::one(order);
            for (s, &k) in series.iter().zip(e) {
                for _ in 0..k {
                    p = &p * &s.truncate(order);
                }
            }
            (0..=order).map(|k| p.coeff(k)).collect()
        })
        .collect();
    let row = |r: i64| -> Vec<BigRational> {
        let mut v = Vec::with_capacity(unknowns);
        for p in &prods {
            for k in 0..=xdeg as i64 {
                v.push(if r >= k { p[(r - k) as usize].clone() } else { BigRational::zero() });
            }
        }
        v
    };
    let rows: Vec<Vec<BigRational>> = (0..used).map(row).collect();
    let ns = nullspace_rat(&rows, unknowns)?;
    let vars = var_names(n);
    let relations = ns
        .basis
        .iter()
        .map(|v| {
            let ints: Vec<BigRational> =
                linalg::primitive(v).into_iter().map(BigRational::from_integer).collect();
            let confirmed =
                (used..total).all(|r| row(r).iter().zip(&ints).map(|(a, b)| a * b).sum::<BigRational>().is_zero());
            let mut poly = RelationPoly::<Poly>::zero(vars.clone());
            for (e, c) in mons.iter().zip(ints.chunks(xdeg + 1)) {
                poly.add_term(e.clone(), Poly::new(c.to_vec()));
            }
            if poly.leading().and_then(|(_, c)| c.leading()).is_some_and(|l| l.is_negative()) {
                poly = poly.neg();
            }
            FoundRelation { poly, confirmed }
        })
        .collect();
    Ok(RelationSearch { relations, unknowns, rows_used: used, held_out: held })
}

/// Evaluates the `X`-coefficients at `xi`.  The flag is `false` when the
/// leading coefficient vanishes at `xi` (or everything does).
pub fn specialize_relation(rel: &RelationPoly<Poly>, xi: &BigRational) -> (RelationPoly<BigRational>, bool) {
    let out = rel.map_coeffs(|c| c.eval(xi));
    let lead_ok = rel.leading().is_some_and(|(_, c)| !c.eval(xi).is_zero());
    let safe = lead_ok && !out.is_zero();
    (out, safe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use num_bigint::BigInt;

    fn sample(order: i64) -> QSeries {
        // a non-rational integral series
        QSeries::from_ints(0, (0..=order).map(|n| BigInt::from(n * n + 1) * BigInt::from(3).pow(n as u32 % 7)).collect())
    }

    #[test]
    fn monomial_enumeration() {
        assert_eq!(monomials(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(monomials(3, 1).len(), 3);
    }

    #[test]
    fn planted_linear_relation() {
        let f = sample(60);
        let g = &QSeries::from_i64(0, &[1, 1]).extend_to(60) * &f;
        let r = find_functional_relations(&[f, g], 1, 1).unwrap();
        assert_eq!(r.relations.len(), 1);
        assert!(r.relations[0].confirmed);
        assert_eq!(r.relations[0].poly.to_string(), "(1 + X)*Y1 - Y2");
    }

    #[test]
    fn duplicated_series() {
        let f = sample(40);
        let r = find_functional_relations(&[f.clone(), f], 1, 0).unwrap();
        assert_eq!(r.relations.len(), 1);
        assert_eq!(r.relations[0].poly.to_string(), "Y1 - Y2");
    }

    #[test]
    fn specialization() {
        let mut rel = RelationPoly::<Poly>::with_names(&["Y1", "Y2"]);
        rel.add_term(vec![1, 0], Poly::from_i64(&[1, 1]));
        rel.add_term(vec![0, 1], Poly::from_i64(&[-1]));
        let (p, safe) = specialize_relation(&rel, &int(1));
        assert!(safe);
        assert_eq!(p.to_string(), "2*Y1 - Y2");
        let mut deg = RelationPoly::<Poly>::with_names(&["Y1", "Y2"]);
        deg.add_term(vec![1, 0], Poly::from_i64(&[0, 1]));
        deg.add_term(vec![0, 1], Poly::from_i64(&[0, -1]));
        let (z, safe) = specialize_relation(&deg, &int(0));
        assert!(z.is_zero() && !safe);
        let (_, safe) = specialize_relation(&rel, &rat(-1, 1));
        assert!(!safe);
    }
}
