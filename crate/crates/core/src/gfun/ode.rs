//! Guessing linear differential equations with polynomial coefficients.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::GfunError;
use crate::linalg::{self, nullspace_rat};
use crate::poly::Poly;
use crate::series::QSeries;

/// `Σ γ_i(X) (d/dX)^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearOde {
    coeffs: Vec<Poly>,
}

impl LinearOde {
    pub fn new(coeffs: Vec<Poly>) -> Self {
        LinearOde { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().filter_map(Poly::degree).max().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    /// `L(f)`, known to order `order(f) − order(L)`.
    pub fn apply(&self, f: &QSeries) -> QSeries {
        let n = f.order() - self.order() as i64;
        let mut acc = QSeries::zero(n);
        let mut d = f.clone();
        for g in &self.coeffs {
            let gs = QSeries::new(0, (0..=n).map(|k| g.coeff(k as usize)).collect());
            acc = &acc + &(&gs * &d.truncate(n));
            d = d.derivative();
        }
        acc.truncate(n)
    }

    /// Scales to a primitive integer operator whose top coefficient has a
    /// positive leading coefficient.
    fn normalized(self) -> Self {
        let flat: Vec<BigRational> = self.coeffs.iter().flat_map(|p| p.coeffs().iter().cloned()).collect();
        let ints = linalg::primitive(&flat);
        let mut it = ints.into_iter();
        let mut coeffs: Vec<Poly> =
            self.coeffs.iter().map(|p| Poly::from_ints(&it.by_ref().take(p.coeffs().len()).collect::<Vec<_>>())).collect();
        if coeffs.last().and_then(|p| p.leading()).is_some_and(|l| l.is_negative()) {
            coeffs = coeffs.iter().map(Poly::neg).collect();
        }
        LinearOde { coeffs }
    }
}

impl fmt::Display for LinearOde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, g) in self.coeffs.iter().enumerate().rev() {
            if g.is_zero() {
                continue;
            }
            let d = match i {
                0 => "f".to_string(),
                1 => "f'".to_string(),
                _ => format!("f^({i})"),
            };
            parts.push(format!("({g})*{d}"));
        }
        write!(f, "{} = 0", parts.join(" + "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OdeFit {
    pub ode: LinearOde,
    /// Coefficient equations used to determine the operator.
    pub rows_used: i64,
    /// Further equations checked exactly afterwards.
    pub held_out: i64,
}

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub max_order: usize,
    pub max_degree: usize,
    /// Preferred number of held-out equations (at least 50 are required).
    pub held_out: i64,
}

const MIN_HELD_OUT: i64 = 50;
const MARGIN: i64 = 10;

/// `(m+1)(m+2)…(m+i)`.
fn rising(m: i64, i: usize) -> BigInt {
    (1..=i as i64).map(|t| BigInt::from(m + t)).product()
}

fn row(f: &[BigRational], n: i64, mu: usize, d: usize) -> Vec<BigRational> {
    let mut r = Vec::with_capacity((mu + 1) * (d + 1));
    for i in 0..=mu {
        for k in 0..=d as i64 {
            let m = n - k;
            if m < 0 {
                r.push(BigRational::zero());
            } else {
                r.push(&f[(m + i as i64) as usize] * BigRational::from_integer(rising(m, i)));
            }
        }
    }
    r
}

/// Smallest operator (order first, then degree) annihilating `f`.
pub fn find_ode(f: &QSeries, max_order: usize, max_degree: usize) -> Result<Option<OdeFit>, GfunError> {
    find_ode_with(f, OdeOptions { max_order, max_degree, held_out: 100 })
}

pub fn find_ode_with(f: &QSeries, opt: OdeOptions) -> Result<Option<OdeFit>, GfunError> {
    let n = f.order();
    let (mu, d) = (opt.max_order as i64, opt.max_degree as i64);
    let needed = (mu + 1) * (d + 1) + mu + MARGIN + MIN_HELD_OUT;
    if n + 1 < needed || f.offset() < 0 {
        return Err(GfunError::InsufficientCoefficients { needed, available: n + 1 });
    }
    let coeffs: Vec<BigRational> = (0..=n).map(|k| f.coeff(k)).collect();
    for mu in 1..=opt.max_order {
        for d in 0..=opt.max_degree {
            let unknowns = ((mu + 1) * (d + 1)) as i64;
            let total = n - mu as i64 + 1;
            let held = opt.held_out.min(total - unknowns - MARGIN).max(MIN_HELD_OUT);
            let used = total - held;
            let rows: Vec<Vec<BigRational>> = (0..used).map(|k| row(&coeffs, k, mu, d)).collect();
            let ns = nullspace_rat(&rows, unknowns as usize)?;
            for v in &ns.basis {
                let ode = LinearOde::new(v.chunks(d + 1).map(|c| Poly::new(c.to_vec())).collect()).normalized();
                let flat: Vec<BigRational> =
                    ode.coeffs.iter().flat_map(|p| (0..=d).map(|k| p.coeff(k))).collect();
                let ok = (used..total).all(|k| {
                    row(&coeffs, k, mu, d).iter().zip(&flat).map(|(a, b)| a * b).sum::<BigRational>().is_zero()
                });
                if ok {
                    return Ok(Some(OdeFit { ode, rows_used: used, held_out: held }));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use num_bigint::BigInt;
    use num_traits::One;

    #[test]
    fn geometric_series() {
        let f = QSeries::from_ints(0, vec![BigInt::one(); 101]);
        let fit = find_ode(&f, 1, 1).unwrap().unwrap();
        // (X − 1) f' + f = 0, i.e. (1 − X) f' − f = 0 with the sign fixed
        assert_eq!(fit.ode.coeffs(), &[Poly::from_i64(&[1]), Poly::from_i64(&[-1, 1])]);
        assert!(fit.held_out >= 50);
        assert!(fit.ode.apply(&f).is_zero());
    }

    #[test]
    fn exponential() {
        let mut fact = BigInt::one();
        let mut c = vec![];
        for k in 0..=100i64 {
            if k > 0 {
                fact *= k;
            }
            c.push(BigRational::new(BigInt::one(), fact.clone()));
        }
        let f = QSeries::new(0, c);
        let fit = find_ode(&f, 2, 2).unwrap().unwrap();
        assert_eq!(fit.ode.coeffs(), &[Poly::from_i64(&[-1]), Poly::from_i64(&[1])]);
    }

    #[test]
    fn too_short() {
        let f = QSeries::from_ints(0, vec![BigInt::one(); 20]);
        assert!(matches!(find_ode(&f, 2, 3), Err(GfunError::InsufficientCoefficients { .. })));
    }

    #[test]
    fn no_operator_within_bounds() {
        // no first-order operator with constant coefficients fits this mixture
        let f = QSeries::new(0, (0..=100).map(|n| rat(1, (n + 1) * (n + 1) * (n + 1)) + rat(1 << (n % 30), 1)).collect());
        assert_eq!(find_ode(&f, 1, 0).unwrap(), None);
    }
}
