//! Exact nullspaces of rational matrices by multi-modular elimination,
//! Chinese remaindering and rational reconstruction.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, is_prime};

/// Primes just below `2^61`, descending.
pub fn large_primes() -> impl Iterator<Item = u64> {
    let mut n = (1u64 << 61) - 1;
    std::iter::from_fn(move || {
        while !is_prime(n) {
            n -= 2;
        }
        let p = n;
        n -= 2;
        Some(p)
    })
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    r
}

fn invmod(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

pub fn residue(x: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(p));
    r.to_u64().unwrap()
}

/// Row echelon data mod `p`: pivot columns and, per free column, the
/// nullspace vector with a 1 in that column.
struct ModNull {
    pivots: Vec<usize>,
    free: Vec<usize>,
    basis: Vec<Vec<u64>>,
}

fn nullspace_mod(rows: &[Vec<u64>], ncols: usize, p: u64) -> ModNull {
    let mut a: Vec<Vec<u64>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(k) = (r..a.len()).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, k);
        let inv = invmod(a[r][c], p);
        for x in a[r].iter_mut() {
            *x = mulmod(*x, inv, p);
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = row[c];
            for j in c..ncols {
                if pivot_row[j] != 0 {
                    row[j] = (row[j] + p - mulmod(f, pivot_row[j], p)) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == a.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = vec![0u64; ncols];
            v[f] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - a[i][f]) % p;
            }
            v
        })
        .collect();
    ModNull { pivots, free, basis }
}

/// `x` with `|num|, den ≤ sqrt(m/2)` and `x ≡ a mod m`, if one exists.
pub fn rational_reconstruct(a: &BigInt, m: &BigInt) -> Option<BigRational> {
    let a = a.mod_floor(m);
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), a);
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || !arith::gcd(&r1, &t1).is_one() {
        return None;
    }
    Some(BigRational::new(r1, t1))
}

/// Result of an exact nullspace computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nullspace {
    /// Reduced basis: vector `i` has a 1 at free column `free[i]` and zeros
    /// at the other free columns.
    pub basis: Vec<Vec<BigRational>>,
    pub free: Vec<usize>,
    pub rank: usize,
    pub primes_used: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("rational reconstruction did not stabilize after {0} primes")]
    NoConvergence(usize),
}

fn scale_rows(rows: &[Vec<BigRational>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| {
            let l = r.iter().fold(BigInt::one(), |acc, x| arith::lcm(&acc, x.denom()));
            r.iter().map(|x| x.numer() * (&l / x.denom())).collect()
        })
        .collect()
}

/// Primitive integer multiple of a rational vector.
pub fn primitive(v: &[BigRational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, x| arith::lcm(&acc, x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| arith::gcd(&acc, x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

pub fn annihilates(rows: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    rows.iter().all(|r| r.iter().zip(v).filter(|(_, b)| !b.is_zero()).map(|(a, b)| a * b).sum::<BigInt>().is_zero())
}

/// Exact nullspace of an integer matrix.
pub fn nullspace_int(rows: &[Vec<BigInt>], ncols: usize) -> Result<Nullspace, LinalgError> {
    const MAX_PRIMES: usize = 400;
    let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
    let mut modulus = BigInt::one();
    let mut acc: Vec<Vec<BigInt>> = Vec::new();
    let mut last: Option<Vec<Vec<BigRational>>> = None;
    for (used, p) in large_primes().take(MAX_PRIMES).enumerate() {
        let red: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|x| residue(x, p)).collect()).collect();
        let mn = nullspace_mod(&red, ncols, p);
        if mn.free.is_empty() {
            // full column rank mod p implies full rank over Q
            return Ok(Nullspace { basis: vec![], free: vec![], rank: ncols, primes_used: used + 1 });
        }
        match &best {
            Some((piv, _)) if mn.pivots.len() < piv.len() || (mn.pivots.len() == piv.len() && mn.pivots > *piv) => {
                continue;
            }
            Some((piv, _)) if *piv == mn.pivots => {}
            _ => {
                // new, better pivot pattern: restart accumulation
                best = Some((mn.pivots.clone(), mn.free.clone()));
                modulus = BigInt::one();
                acc = vec![vec![BigInt::zero(); ncols]; mn.free.len()];
                last = None;
            }
        }
        let pb = BigInt::from(p);
        let inv = arith::mod_inverse(&(&modulus % &pb), &pb).unwrap();
        for (a, v) in acc.iter_mut().zip(&mn.basis) {
            for (x, &r) in a.iter_mut().zip(v) {
                // x ← x + m·((r − x)·m⁻¹ mod p)
                let t = ((BigInt::from(r) - &*x) * &inv).mod_floor(&pb);
                *x += &modulus * t;
            }
        }
        modulus *= &pb;
        let rec: Option<Vec<Vec<BigRational>>> = acc
            .iter()
            .map(|a| a.iter().map(|x| rational_reconstruct(x, &modulus)).collect::<Option<Vec<_>>>())
            .collect();
        let Some(rec) = rec else { continue };
        if last.as_ref() == Some(&rec) {
            let ok = rec.iter().all(|v| annihilates(rows, &primitive(v)));
            if ok {
                let (piv, free) = best.unwrap();
                return Ok(Nullspace { basis: rec, free, rank: piv.len(), primes_used: used + 1 });
            }
        }
        last = Some(rec);
    }
    Err(LinalgError::NoConvergence(MAX_PRIMES))
}

pub fn nullspace_rat(rows: &[Vec<BigRational>], ncols: usize) -> Result<Nullspace, LinalgError> {
    nullspace_int(&scale_rows(rows), ncols)
}

/// Unique solution of a square nonsingular rational system, if it is one.
pub fn solve_rat(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = a.len();
    let rows: Vec<Vec<BigRational>> =
        a.iter().zip(b).map(|(r, y)| r.iter().cloned().chain(std::iter::once(-y.clone())).collect()).collect();
    let ns = nullspace_rat(&rows, n + 1).ok()?;
    if ns.basis.len() != 1 || ns.free != vec![n] {
        return None;
    }
    Some(ns.basis[0][..n].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    #[test]
    fn reconstruct_small_fractions() {
        let m: BigInt = large_primes().take(2).map(BigInt::from).product();
        for x in [rat(3, 7), rat(-22, 9), rat(1, 1), rat(0, 1)] {
            let a = (x.numer() * arith::mod_inverse(x.denom(), &m).unwrap()).mod_floor(&m);
            assert_eq!(rational_reconstruct(&a, &m), Some(x));
        }
    }

    #[test]
    fn nullspace_of_dependent_rows() {
        let rows = vec![vec![int(1), int(2), int(3)], vec![int(2), int(4), int(6)], vec![int(1), int(0), rat(1, 2)]];
        let ns = nullspace_rat(&rows, 3).unwrap();
        assert_eq!(ns.rank, 2);
        assert_eq!(ns.basis, vec![vec![rat(-1, 2), rat(-5, 4), int(1)]]);
        let full = vec![vec![int(1), int(0)], vec![int(0), int(1)]];
        assert!(nullspace_rat(&full, 2).unwrap().basis.is_empty());
    }

    #[test]
    fn large_entries_need_several_primes() {
        let big: BigInt = BigInt::from(10).pow(60) + 7;
        let rows = vec![vec![BigInt::from(1), big.clone()], vec![BigInt::from(2), &big * 2]];
        let ns = nullspace_int(&rows, 2).unwrap();
        assert!(ns.primes_used >= 3);
        assert_eq!(ns.basis[0][0], BigRational::from_integer(-big));
    }

    #[test]
    fn square_solve() {
        let a = vec![vec![int(2), int(1)], vec![int(1), int(3)]];
        assert_eq!(solve_rat(&a, &[int(3), int(5)]), Some(vec![rat(4, 5), rat(7, 5)]));
    }

    #[test]
    fn primes_are_prime() {
        let ps: Vec<u64> = large_primes().take(3).collect();
        assert_eq!(ps[0], (1u64 << 61) - 1);
        assert!(ps.iter().all(|&p| is_prime(p)));
    }
}
