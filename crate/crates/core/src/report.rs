//! Verification suites and their machine-readable reports.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{fmt_rational, int, rat};
use crate::ball::{Ball, ComplexBall};
use crate::gfun::{self, find_functional_relations, find_ode, specialize_relation, weil_height, weil_height_rational};
use crate::isogeny::{self, ArchData, Place, RelationBundle};
use crate::period::{self, CurvePoint, PeriodMatrix, PeriodSample};
use crate::place;
use crate::poly::Poly;
use crate::qexp::{self, Eisenstein, Name};
use crate::relation::RelationPoly;
use crate::series::QSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub lhs: Option<String>,
    pub rhs: Option<String>,
    pub tolerance: Option<String>,
    #[serde(serialize_with = "as_string")]
    pub elapsed_ms: u64,
}

fn as_string<S: serde::Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Toolchain {
    pub version: String,
    pub seed: String,
    pub order: Option<String>,
    pub bits: Option<String>,
    pub precision: Option<String>,
    pub samples: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
    pub toolchain: Toolchain,
    /// Per-sample period data, filled by the `periods` suite.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<PeriodSample>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }

    /// The report with timings zeroed, for reproducibility comparisons.
    pub fn without_timings(&self) -> Report {
        let mut r = self.clone();
        for c in &mut r.checks {
            c.elapsed_ms = 0;
        }
        r
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("suite {}\n", self.suite);
        for c in &self.checks {
            s.push_str(&format!("{:<4} {}", c.status, c.name));
            if let Some(l) = &c.lhs {
                s.push_str(&format!("  lhs={l}"));
            }
            if let Some(r) = &c.rhs {
                s.push_str(&format!("  rhs={r}"));
            }
            if let Some(t) = &c.tolerance {
                s.push_str(&format!("  tol={t}"));
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Growth,
    NonarchLemmas,
    Periods,
    PadicRelations,
    Relations,
    Modpoly,
    Heights,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Identities,
        Suite::Growth,
        Suite::NonarchLemmas,
        Suite::Periods,
        Suite::PadicRelations,
        Suite::Relations,
        Suite::Modpoly,
        Suite::Heights,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Growth => "growth",
            Suite::NonarchLemmas => "nonarch-lemmas",
            Suite::Periods => "periods",
            Suite::PadicRelations => "padic-relations",
            Suite::Relations => "relations",
            Suite::Modpoly => "modpoly",
            Suite::Heights => "heights",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SuiteError {
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
    #[error("invalid option: {0}")]
    InvalidOption(String),
}

impl FromStr for Suite {
    type Err = SuiteError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL.iter().copied().find(|x| x.as_str() == s).ok_or_else(|| SuiteError::UnknownSuite(s.to_string()))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SuiteOptions {
    pub order: Option<i64>,
    pub bits: Option<u64>,
    pub prime: Option<u64>,
    pub precision: Option<i64>,
    pub samples: Option<usize>,
    pub seed: u64,
}

impl SuiteOptions {
    pub fn validate(&self) -> Result<(), SuiteError> {
        let bad = |m: &str| Err(SuiteError::InvalidOption(m.to_string()));
        if self.order.is_some_and(|o| !(1..=5000).contains(&o)) {
            return bad("--order must be in 1..=5000");
        }
        if self.bits.is_some_and(|b| !(64..=8192).contains(&b)) {
            return bad("--bits must be in 64..=8192");
        }
        if self.prime.is_some_and(|p| !crate::arith::is_prime(p)) {
            return bad("--prime must be prime");
        }
        if self.precision.is_some_and(|k| !(1..=2000).contains(&k)) {
            return bad("--precision must be in 1..=2000");
        }
        if self.samples.is_some_and(|s| s == 0 || s > 10_000) {
            return bad("--samples must be in 1..=10000");
        }
        Ok(())
    }
}

struct Builder {
    checks: Vec<Check>,
    samples: Vec<PeriodSample>,
}

/// Result of one check body: status plus descriptors.
struct Outcome {
    ok: bool,
    lhs: Option<String>,
    rhs: Option<String>,
    tolerance: Option<String>,
}

fn outcome(ok: bool, lhs: impl Into<Option<String>>, rhs: impl Into<Option<String>>) -> Outcome {
    Outcome { ok, lhs: lhs.into(), rhs: rhs.into(), tolerance: None }
}

impl Outcome {
    fn tol(mut self, t: impl Into<String>) -> Self {
        self.tolerance = Some(t.into());
        self
    }
}

impl Builder {
    fn new() -> Self {
        Builder { checks: Vec::new(), samples: Vec::new() }
    }

    fn run(&mut self, name: impl Into<String>, body: impl FnOnce() -> Result<Outcome, String>) {
        let start = Instant::now();
        let name = name.into();
        let (status, lhs, rhs, tolerance) = match body() {
            Ok(o) => (if o.ok { Status::Pass } else { Status::Fail }, o.lhs, o.rhs, o.tolerance),
            Err(e) => (Status::Fail, Some(format!("error: {e}")), None, None),
        };
        self.checks.push(Check { name, status, lhs, rhs, tolerance, elapsed_ms: start.elapsed().as_millis() as u64 });
    }

    fn skip(&mut self, name: impl Into<String>, why: &str) {
        self.checks.push(Check {
            name: name.into(),
            status: Status::Skip,
            lhs: Some(why.to_string()),
            rhs: None,
            tolerance: None,
            elapsed_ms: 0,
        });
    }

    fn finish(mut self, suite: Suite, t: Toolchain) -> Report {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        Report { suite: suite.as_str().to_string(), checks: self.checks, toolchain: t, samples: self.samples }
    }
}

fn series(name: Name, order: i64) -> Result<QSeries, String> {
    qexp::get(name, order).map_err(|e| e.to_string())
}

fn identity(name: &str, lhs: &QSeries, rhs: &QSeries, order: i64) -> Outcome {
    let reached = lhs.order().min(rhs.order());
    let mism = qexp::first_mismatch(lhs, rhs);
    let ok = mism.is_none() && reached >= order;
    let l = match mism {
        Some(n) => format!("{name}: mismatch at exponent {n}"),
        None => format!("{name}: equal through exponent {reached}"),
    };
    outcome(ok, l, format!("order {order}")).tol("exact")
}

fn first_coeffs(f: &QSeries, from: i64, n: i64) -> String {
    (from..from + n).map(|k| fmt_rational(&f.coeff(k))).collect::<Vec<_>>().join(", ")
}

fn golden(f: &QSeries, from: i64, want: &[i64]) -> Outcome {
    let got: Vec<BigRational> = (from..from + want.len() as i64).map(|k| f.coeff(k)).collect();
    let ok = got.iter().zip(want).all(|(g, w)| *g == int(*w));
    outcome(ok, first_coeffs(f, from, want.len() as i64), want.iter().map(|w| format!("{w}/1")).collect::<Vec<_>>().join(", "))
        .tol("exact")
}

fn suite_identities(b: &mut Builder, order: i64) {
    let n = order;
    b.run("alpha_sq_e4_equals_e6", || {
        let a = series(Name::Alpha, n)?;
        let e4 = qexp::eisenstein(Eisenstein::E4, n);
        let e6 = qexp::eisenstein(Eisenstein::E6, n);
        Ok(identity("α²E4 − E6", &(&(&a * &a) * &e4), &e6, n))
    });
    b.run("theta_after_inv_j_is_x", || {
        let t = series(Name::Theta, n)?;
        let ij = series(Name::InvJ, n)?;
        let c = t.compose(&ij).map_err(|e| e.to_string())?;
        Ok(identity("θ∘(1/j)", &c, &QSeries::x(n), n))
    });
    b.run("inv_j_after_theta_is_x", || {
        let t = series(Name::Theta, n)?;
        let ij = series(Name::InvJ, n)?;
        let c = ij.compose(&t).map_err(|e| e.to_string())?;
        Ok(identity("(1/j)∘θ", &c, &QSeries::x(n), n))
    });
    b.run("f_is_alpha_after_theta", || {
        let a = qexp::generate_uncached(Name::Alpha, n).map_err(|e| e.to_string())?;
        let t = series(Name::Theta, n)?;
        let f = series(Name::F, n)?;
        Ok(identity("α∘θ", &a.compose(&t).map_err(|e| e.to_string())?, &f, n))
    });
    b.run("delta_from_eisenstein_equals_eta_product", || {
        let e4 = qexp::eisenstein(Eisenstein::E4, n);
        let e6 = qexp::eisenstein(Eisenstein::E6, n);
        let lhs = &e4.pow(3) - &(&e6 * &e6);
        let rhs = qexp::delta_product(n).scale_int(1728);
        Ok(identity("E4³ − E6² vs 1728Δ", &lhs, &rhs, n))
    });
    b.run("a4_tate_is_minus_5_s3", || {
        let (a4, _) = qexp::tate_coefficients(n).map_err(|e| e.to_string())?;
        let s3 = qexp::sigma_series(3, n).map_err(|e| e.to_string())?;
        Ok(identity("ã4 + 5s3", &a4, &s3.scale_int(-5), n))
    });
    b.run("a6_tate_relation", || {
        let (_, a6) = qexp::tate_coefficients(n).map_err(|e| e.to_string())?;
        let s3 = qexp::sigma_series(3, n).map_err(|e| e.to_string())?;
        let s5 = qexp::sigma_series(5, n).map_err(|e| e.to_string())?;
        let rhs = (&s3.scale_int(5) + &s5.scale_int(7)).scale_int(-1);
        Ok(identity("12ã6 + 5s3 + 7s5", &a6.scale_int(12), &rhs, n))
    });
    b.run("golden_theta", || Ok(golden(&series(Name::Theta, 5)?, 1, &[1, 744, 750420])));
    b.run("golden_a4_tate", || Ok(golden(&series(Name::A4Tate, 5)?, 1, &[-5, -45, -140])));
    b.run("golden_a6_tate", || Ok(golden(&series(Name::A6Tate, 5)?, 1, &[-1, -23, -154])));
    b.run("golden_j", || Ok(golden(&series(Name::J, 5)?, -1, &[1, 744, 196884])));
    b.run("golden_inv_j", || Ok(golden(&series(Name::InvJ, 5)?, 1, &[1, -744, 356652])));
    b.run("golden_f", || Ok(golden(&series(Name::F, 5)?, 0, &[1, -372, -266076])));
    b.run("golden_alpha_oracle", || {
        // oracle: E6/E4 by long division, then the binomial series of √(1+4h)
        let e4 = qexp::eisenstein(Eisenstein::E4, 4);
        let e6 = qexp::eisenstein(Eisenstein::E6, 4);
        let ratio = &e6 * &e4.reciprocal().map_err(|e| e.to_string())?;
        let h1 = (ratio.coeff(1) - int(0)) / int(4);
        let h2 = ratio.coeff(2) / int(4);
        // √(1+4h) = 1 + 2h − 2h² + …
        let c1 = int(2) * &h1;
        let c2 = int(2) * &h2 - int(2) * &h1 * &h1;
        let a = series(Name::Alpha, 4)?;
        let ok = a.coeff(0) == int(1) && a.coeff(1) == c1 && a.coeff(2) == c2 && c1 == int(-372) && c2 == int(10692);
        Ok(outcome(ok, first_coeffs(&a, 0, 3), format!("1/1, {}, {}", fmt_rational(&c1), fmt_rational(&c2))).tol("exact"))
    });
    b.run("alpha_paper_display_is_a_typo", || {
        // the displayed 1 + 372q + 127692q² fails α²E4 = E6 already at q¹
        let shown = QSeries::from_i64(0, &[1, 372, 127692]);
        let e4 = qexp::eisenstein(Eisenstein::E4, 2);
        let e6 = qexp::eisenstein(Eisenstein::E6, 2);
        let bad = qexp::first_mismatch(&(&(&shown * &shown) * &e4), &e6);
        let a = series(Name::Alpha, 2)?;
        let ok = bad == Some(1) && a != shown;
        Ok(outcome(ok, format!("displayed series fails α²E4 = E6 at q^{}", bad.unwrap_or(-1)), first_coeffs(&a, 0, 3)))
    });
}

fn suite_growth(b: &mut Builder, order: i64) {
    for name in [Name::F, Name::Theta, Name::Alpha, Name::A4Tate, Name::A6Tate] {
        b.run(format!("integral_{}", name.as_str()), || {
            let s = series(name, order)?;
            let bad = (s.offset()..=s.order()).find(|&k| !s.coeff(k).is_integer());
            Ok(outcome(bad.is_none() && s.order() >= order, format!("order {}", s.order()), bad.map(|k| format!("non-integral at {k}"))))
        });
    }
    b.run("growth_f", || {
        let f = series(Name::F, order)?;
        let (points, max) = qexp::growth_profile(&f, 50);
        let last = points.last().map(|p| p.root).unwrap_or(0.0);
        // |a_n|^{1/n} stays below 1728 times a slowly decaying factor
        let ok = max.is_finite() && max < 1728.0 * 2.0;
        Ok(outcome(ok, format!("max |a_n|^(1/n) = {max:.3}"), format!("at n = {}: {last:.3}", f.order())))
    });
    b.run("f_prefix_bound", || {
        let f = series(Name::F, order)?;
        // |F_n| ≤ (n+1)·1728^n
        let bad = (0..=f.order()).find(|&n| {
            let c = f.coeff(n);
            c.numer().magnitude() > &(BigInt::from(n + 1) * BigInt::from(1728).pow(n as u32)).magnitude().clone()
        });
        Ok(outcome(bad.is_none(), format!("checked through {}", f.order()), bad.map(|n| format!("exceeded at {n}"))))
    });
}

fn suite_nonarch(b: &mut Builder, opts: &SuiteOptions) {
    let samples = opts.samples.unwrap_or(200);
    let k = opts.precision.unwrap_or(40);
    let primes = match opts.prime {
        Some(p) => vec![p],
        None => vec![2, 3, 5],
    };
    for p in primes {
        b.run(format!("lemmas_p{p}"), || {
            let r = place::check_nonarch_lemmas(p, samples, opts.seed, k);
            Ok(outcome(
                r.passed(),
                format!("{} samples, {} inequality and {} composition failures", r.samples, r.inequality_failures, r.composition_failures),
                format!("0 failures mod {p}^{k}"),
            ))
        });
    }
    b.run("tate_a4_two_path_p2", || {
        let (a4, _) = qexp::tate_coefficients(60).map_err(|e| e.to_string())?;
        let x = crate::padic::PadicNum::from_i64(2, 2, 48);
        let inner = place::eval_padic(&a4, &x, 48, None).map_err(|e| e.to_string())?;
        let two = place::eval_padic(&a4, &inner, 40, None).map_err(|e| e.to_string())?;
        let comp = a4.compose(&a4).map_err(|e| e.to_string())?;
        let one = place::eval_padic(&comp, &x, 40, None).map_err(|e| e.to_string())?;
        Ok(outcome(one.congruent(&two, 40) == Some(true), one.to_string(), two.to_string()).tol("2^40"))
    });
}

/// Sample points in `(0, 10^{-4}]`, deterministic in the seed.
pub fn period_samples(n: usize, seed: u64) -> Vec<BigRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<BigRational> = vec![rat(1, 10_000)];
    while out.len() < n {
        let d: i64 = rng.gen_range(10_001..=2_000_000);
        let s = rat(1, d);
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out.truncate(n);
    out
}

fn ball_str(b: &Ball) -> String {
    b.to_string_digits(30)
}

fn suite_periods(b: &mut Builder, opts: &SuiteOptions) {
    let bits = opts.bits.unwrap_or(256);
    let n = opts.samples.unwrap_or(5);
    let recon = period::reconstruct_g(400, 18, bits);
    for s in period_samples(n, opts.seed) {
        let tag = fmt_rational(&s).replace('/', "_");
        let rep = CurvePoint::new(s.clone()).and_then(|cp| period::period_matrix(&cp, bits, false));
        let rep = match rep {
            Ok(r) => r,
            Err(e) => {
                b.run(format!("s_{tag}_period_matrix"), || Err(e.to_string()));
                continue;
            }
        };
        b.samples.push(rep.sample());
        b.run(format!("s_{tag}_f_series_vs_lattice"), || {
            let f = rep.f_series.clone().ok_or("no series value")?;
            let rad = rep.combined_f_radius().unwrap();
            let tight = rad < crate::ball::Dyadic::from_f64(1e-20);
            Ok(outcome(rep.f_agrees() == Some(true) && tight, ball_str(&f), ball_str(&rep.lattice.f_gamma))
                .tol(format!("combined radius {} < 1e-20", rad.to_sci(3))))
        });
        b.run(format!("s_{tag}_legendre"), || {
            let d = rep.matrix.det();
            Ok(outcome(rep.matrix.legendre_holds(), d.to_string(), "1/(2πi)".to_string()).tol("ball"))
        });
        b.run(format!("s_{tag}_orientation"), || Ok(outcome(rep.matrix.oriented(), "Im(F*/F) > 0".to_string(), None)));
        b.run(format!("s_{tag}_g_from_e2"), || {
            let g = rep.g_from_e2.clone().ok_or("no E2 value")?;
            Ok(outcome(g.overlaps(&rep.lattice.g_gamma), ball_str(&g), ball_str(&rep.lattice.g_gamma)).tol("ball"))
        });
        if let Ok(r) = &recon {
            b.run(format!("s_{tag}_legendre_with_g_series"), || {
                let x = Ball::from_rational(&s, bits + 32);
                let g = place::eval_real(&r.series, &x, Some(&period::g_coefficient_bound())).map_err(|e| e.to_string())?.0;
                let m = PeriodMatrix { g_val: ComplexBall::from_real(&g), ..rep.matrix.clone() };
                Ok(outcome(m.legendre_holds() && g.overlaps(&rep.lattice.g_gamma), ball_str(&g), ball_str(&rep.lattice.g_gamma)))
            });
        }
    }
    b.run("g_series_denominators", || {
        let r = recon.as_ref().map_err(|e| e.to_string())?;
        let mut primes: Vec<u64> = Vec::new();
        for n in 0..=r.series.order() {
            let mut d = r.series.coeff(n).denom().clone();
            for p in 2..1000u64 {
                while (&d % p).is_zero() {
                    d /= p;
                    if !primes.contains(&p) {
                        primes.push(p);
                    }
                }
            }
            if !d.is_one() {
                return Ok(outcome(false, format!("large prime factor at {n}"), None));
            }
        }
        primes.sort();
        Ok(outcome(true, format!("primes {primes:?} through order {}", r.series.order()), None).tol("observed"))
    });
    b.run("g_reconstruction", || {
        let r = recon.as_ref().map_err(|e| e.to_string())?;
        let (ea, eb) = period::expected_ab();
        // agreement at a few rationals with the closed form derived from E2
        let same = [rat(1, 5000), rat(-1, 7000), rat(3, 10_000)].iter().all(|x| r.a.eval(x) == ea.eval(x) && r.b.eval(x) == eb.eval(x));
        let ok = r.validated() && same;
        let detail = r
            .held_out
            .iter()
            .map(|h| format!("{}: γ {} δ {}", fmt_rational(&h.s), h.residual_gamma.to_string_digits(3), h.residual_delta.to_string_digits(3)))
            .collect::<Vec<_>>()
            .join("; ");
        Ok(outcome(ok, format!("a = {}, b = {}", r.a, r.b), detail).tol("held-out residual balls contain 0"))
    });
}

/// The pairs used by the `padic-relations` suite: `(t, primes)`.
pub fn standard_pairs() -> Vec<(i64, Vec<u64>)> {
    vec![(5, vec![5]), (15, vec![3, 5]), (3, vec![3]), (7, vec![7])]
}

fn suite_padic(b: &mut Builder, opts: &SuiteOptions) {
    let k = opts.precision.unwrap_or(50);
    let bits = opts.bits.unwrap_or(256);
    let pairs = match opts.prime {
        Some(p) => standard_pairs().into_iter().filter(|(_, ps)| ps.contains(&p)).map(|(t, _)| (t, vec![p])).collect(),
        None => standard_pairs(),
    };
    for (t, primes) in pairs {
        let pair = isogeny::x0_pair(&int(t), primes[0]).and_then(|p| isogeny::extract_isogeny_scalars(&p, bits));
        let pair = match pair {
            Ok(p) => p,
            Err(e) => {
                b.run(format!("t{t}_scalars"), || Err(e.to_string()));
                continue;
            }
        };
        b.run(format!("t{t}_scalars"), || {
            let sc = pair.scalars.as_ref().unwrap();
            Ok(outcome(pair.invariants_hold(), format!("a = {}, b = {}, d = {}", sc.a, sc.b, sc.d), format!("{:?}", pair.matrix.unwrap()))
                .tol("a·d = M, det = M"))
        });
        let bundle = match RelationBundle::build(&pair, None) {
            Ok(x) => x,
            Err(e) => {
                b.run(format!("t{t}_bundle"), || Err(e.to_string()));
                continue;
            }
        };
        let mut places = vec![Place::Infinite];
        places.extend(primes.iter().map(|&p| Place::Finite(p)));
        let lo = isogeny::multi_place_verify(std::slice::from_ref(&pair), &bundle, &places, k, bits);
        let hi = isogeny::multi_place_verify(std::slice::from_ref(&pair), &bundle, &places, 2 * k, 2 * bits);
        for (i, place) in places.iter().enumerate() {
            b.run(format!("t{t}_{}", place.to_string().replace('=', "")), || {
                let lo = lo.as_ref().map_err(|e| e.to_string())?;
                let hi = hi.as_ref().map_err(|e| e.to_string())?;
                let (l, h) = (&lo.places[i], &hi.places[i]);
                let stable = l.passed == h.passed && l.vanishing_factors == h.vanishing_factors;
                Ok(outcome(
                    l.admissible && l.passed && stable,
                    format!("m = [{}] at {}", l.vanishing_factors.join(","), l.precision),
                    format!("m = [{}] at {}", h.vanishing_factors.join(","), h.precision),
                ))
            });
        }
    }
}

fn suite_relations(b: &mut Builder, opts: &SuiteOptions) {
    let order = opts.order.unwrap_or(400);
    for (m, want) in [(1u64, 2u32), (2, 4), (6, 8), (12, 12)] {
        b.run(format!("p_fin_degree_m{m}"), || {
            let p = isogeny::build_p_fin(&crate::quad::QuadNum::rational(rat(3, 2)), m);
            Ok(outcome(p.total_degree() == Some(want) && p.is_homogeneous(), format!("{:?}", p.total_degree()), format!("{want}")))
        });
    }
    b.run("p_inf_quadratic_synthetic", || {
        let p = isogeny::build_p_inf(&ArchData::synthetic(1, 0, 2, 1), Some(&ArchData::synthetic(3, 0, 1, 2))).map_err(|e| e.to_string())?;
        let ok = !p.is_zero() && p.is_homogeneous() && p.total_degree() == Some(2) && isogeny::outside_diagonal_ideal(&p);
        Ok(outcome(ok, p.to_string(), "nonzero after Y1→Y3, Z1→Z3".to_string()))
    });
    b.run("ode_for_f", || {
        let f = series(Name::F, order)?;
        let fit = find_ode(&f, 3, 12).map_err(|e| e.to_string())?.ok_or("no operator found")?;
        let ok = fit.ode.order() <= 3 && fit.held_out >= 100 && fit.ode.apply(&f).is_zero();
        Ok(outcome(ok, fit.ode.to_string(), format!("{} rows, {} held out", fit.rows_used, fit.held_out)))
    });
    b.run("planted_relations", || {
        let f = series(Name::F, 120)?;
        let g = &QSeries::from_i64(0, &[1, 1]).extend_to(120) * &f;
        let r1 = find_functional_relations(&[f.clone(), g], 1, 1).map_err(|e| e.to_string())?;
        let r2 = find_functional_relations(&[f.clone(), f.clone()], 1, 0).map_err(|e| e.to_string())?;
        // F² = (1+X)F · F/(1+X)
        let up = &QSeries::from_i64(0, &[1, 1]).extend_to(120) * &f;
        let down = &QSeries::from_i64(0, &[1, 1]).extend_to(120).reciprocal().map_err(|e| e.to_string())? * &f;
        let r3 = find_functional_relations(&[f.clone(), up, down], 2, 0).map_err(|e| e.to_string())?;
        let texts: Vec<String> = [&r1, &r2, &r3].iter().flat_map(|r| r.relations.iter().map(|x| x.poly.to_string())).collect();
        let ok = r1.relations.len() == 1
            && r1.relations[0].poly.to_string() == "(1 + X)*Y1 - Y2"
            && r2.relations.len() == 1
            && r2.relations[0].poly.to_string() == "Y1 - Y2"
            && r3.relations.len() == 1
            && r3.relations[0].poly.to_string().contains("Y1^2")
            && [&r1, &r2, &r3].iter().all(|r| r.relations.iter().all(|x| x.confirmed));
        Ok(outcome(ok, texts.join("; "), None))
    });
    b.run("no_rational_relation_for_f", || {
        let f = series(Name::F, order)?;
        let r = find_functional_relations(&[f], 1, 10).map_err(|e| e.to_string())?;
        Ok(outcome(r.certified_empty(), format!("{} relations", r.relations.len()), format!("{} unknowns, {} rows", r.unknowns, r.rows_used + r.held_out)))
    });
    b.run("specialization_two_path", || {
        // (1+X)F − G₂ with G₂ = (1+X)F, specialized at ξ = 1/10000, at ∞ and at 5
        let mut rel = RelationPoly::<Poly>::with_names(&["Y1", "Y2"]);
        rel.add_term(vec![1, 0], Poly::from_i64(&[1, 1]));
        rel.add_term(vec![0, 1], Poly::from_i64(&[-1]));
        let xi = rat(1, 10_000);
        let (pt, safe) = specialize_relation(&rel, &xi);
        let f = series(Name::F, 300)?;
        let g = &QSeries::from_i64(0, &[1, 1]).extend_to(300) * &f;
        let bound = place::f_coefficient_bound(&rat(1, 1800));
        let gb = place::CoeffBound { c: bound.c.clone() * int(2), rho: bound.rho.clone() };
        let x = Ball::from_rational(&xi, 256);
        let fv = place::eval_real(&f, &x, Some(&bound)).map_err(|e| e.to_string())?.0;
        let gv = place::eval_real(&g, &x, Some(&gb)).map_err(|e| e.to_string())?.0;
        let arch = pt.eval_with(&[fv, gv], |c| Ball::from_rational(c, 256), |a, b| a.add(b), |a, b| a.mul(b)).ok_or("zero")?;
        let xi5 = int(1000);
        let (pt5, safe5) = specialize_relation(&rel, &xi5);
        let x5 = crate::padic::PadicNum::from_rational(&xi5, 5, 40);
        let f5 = place::eval_padic(&f, &x5, 40, None).map_err(|e| e.to_string())?;
        let g5 = place::eval_padic(&g, &x5, 40, None).map_err(|e| e.to_string())?;
        let padic = pt5
            .eval_with(&[f5, g5], |c| crate::padic::PadicNum::from_rational(c, 5, 40), |a, b| a.add(b), |a, b| a.mul(b))
            .ok_or("zero")?;
        let ok = safe && safe5 && arch.contains_zero() && padic.congruent(&crate::padic::PadicNum::zero(5, 40), 40) == Some(true);
        Ok(outcome(ok, format!("∞: {}", arch.to_string_digits(3)), format!("5-adic: {padic}")))
    });
}

fn suite_modpoly(b: &mut Builder, opts: &SuiteOptions) {
    let order = opts.order.unwrap_or(150);
    let levels = match opts.prime {
        Some(p) => vec![p],
        None => vec![2, 3],
    };
    for m in levels {
        let phi = isogeny::modular_polynomial(m, order);
        b.run(format!("phi{m}_generated"), || {
            let p = phi.as_ref().map_err(|e| e.to_string())?;
            let d = isogeny::psi(m) as usize;
            let ok = p.is_symmetric() && p.degree_x() == d && p.degree_y() == d;
            Ok(outcome(ok, format!("bidegree ({}, {})", p.degree_x(), p.degree_y()), format!("ψ({m}) = {d}, symmetric")))
        });
        b.run(format!("phi{m}_annihilates_j_pair"), || {
            let p = phi.as_ref().map_err(|e| e.to_string())?;
            Ok(outcome(isogeny::annihilates_j_pair(p, order), format!("Φ{m}(j(q), j(q^{m}))"), format!("0 mod q^{order}")))
        });
        if m == 2 {
            b.run("phi2_table_values", || {
                let p = phi.as_ref().map_err(|e| e.to_string())?;
                let ok = p.coeff(2, 2) == BigInt::from(-1) && p.coeff(1, 1) == BigInt::from(40773375);
                Ok(outcome(ok, format!("X²Y²: {}, XY: {}", p.coeff(2, 2), p.coeff(1, 1)), "-1, 40773375".to_string()))
            });
        }
    }
    b.run("x0_parametrization_t5", || {
        let (j1, j2) = isogeny::x0_j_invariants(&int(5)).unwrap();
        let v = isogeny::phi2().eval(&j1, &j2);
        Ok(outcome(v.is_zero() && j1 == rat(17779581, 25) && j2 == rat(9261, 5), format!("j1 = {}, j2 = {}", fmt_rational(&j1), fmt_rational(&j2)), "Φ2(j1, j2) = 0".to_string()))
    });
}

fn suite_heights(b: &mut Builder, opts: &SuiteOptions) {
    let n_max = opts.order.map(|o| o as u64).unwrap_or(1_000_000);
    b.run("divisor_count_12", || Ok(outcome(gfun::divisor_count(12) == 6, gfun::divisor_count(12).to_string(), "6".to_string())));
    b.run("divisor_bound_scan", || {
        let r = gfun::check_divisor_bound(0.5, n_max);
        Ok(outcome(r.max_ratio.is_finite(), format!("max d(N)/N^0.5 = {:.6} at N = {}", r.max_ratio, r.argmax), format!("N ≤ {n_max}")))
    });
    b.run("height_two_thirds", || {
        let h = weil_height_rational(&rat(2, 3));
        let l3 = Ball::from_i64(3, 192).log().unwrap();
        Ok(outcome(h.value.overlaps(&l3) && h.value.rad() < &crate::ball::Dyadic::from_f64(1e-40), h.value.to_string_digits(20), l3.to_string_digits(20)))
    });
    b.run("height_golden_ratio", || {
        let h = weil_height(&[BigInt::from(-1), BigInt::from(-1), BigInt::from(1)]).map_err(|e| e.to_string())?;
        // oracle: log((1+√5)/2)/2 in ball arithmetic
        let phi = Ball::from_i64(5, 192).sqrt().unwrap().add(&Ball::from_i64(1, 192)).mul_2exp(-1);
        let want = phi.log().unwrap().mul_2exp(-1);
        let ok = h.value.overlaps(&want) && h.value.rad() < &crate::ball::Dyadic::from_f64(1e-12);
        Ok(outcome(ok, h.value.to_string_digits(15), want.to_string_digits(15)).tol("1e-12"))
    });
    b.run("height_power_rule", || {
        // x = 2/3 has minimal polynomial 3X − 2; x³ has 27X − 8
        let h1 = weil_height(&[BigInt::from(-2), BigInt::from(3)]).map_err(|e| e.to_string())?;
        let h3 = weil_height(&[BigInt::from(-8), BigInt::from(27)]).map_err(|e| e.to_string())?;
        Ok(outcome(h3.value.overlaps(&h1.value.mul_i64(3)), h3.value.to_string_digits(15), h1.value.mul_i64(3).to_string_digits(15)))
    });
}

pub fn toolchain(opts: &SuiteOptions) -> Toolchain {
    Toolchain {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: opts.seed.to_string(),
        order: opts.order.map(|x| x.to_string()),
        bits: opts.bits.map(|x| x.to_string()),
        precision: opts.precision.map(|x| x.to_string()),
        samples: opts.samples.map(|x| x.to_string()),
    }
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<Report, SuiteError> {
    opts.validate()?;
    let mut b = Builder::new();
    match suite {
        Suite::Identities => suite_identities(&mut b, opts.order.unwrap_or(300)),
        Suite::Growth => suite_growth(&mut b, opts.order.unwrap_or(500)),
        Suite::NonarchLemmas => suite_nonarch(&mut b, opts),
        Suite::Periods => suite_periods(&mut b, opts),
        Suite::PadicRelations => suite_padic(&mut b, opts),
        Suite::Relations => suite_relations(&mut b, opts),
        Suite::Modpoly => suite_modpoly(&mut b, opts),
        Suite::Heights => suite_heights(&mut b, opts),
    }
    if b.checks.is_empty() {
        b.skip("no_checks", "nothing selected by the options");
    }
    Ok(b.finish(suite, toolchain(opts)))
}

pub fn run_suite_named(name: &str, opts: &SuiteOptions) -> Result<Report, SuiteError> {
    run_suite(name.parse()?, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
        }
        assert_eq!("bogus".parse::<Suite>(), Err(SuiteError::UnknownSuite("bogus".into())));
        assert!(run_suite_named("bogus", &SuiteOptions::default()).is_err());
    }

    #[test]
    fn option_validation() {
        let bad = [
            SuiteOptions { order: Some(0), ..Default::default() },
            SuiteOptions { bits: Some(8), ..Default::default() },
            SuiteOptions { prime: Some(9), ..Default::default() },
            SuiteOptions { precision: Some(-1), ..Default::default() },
            SuiteOptions { samples: Some(0), ..Default::default() },
        ];
        for o in bad {
            assert!(matches!(run_suite(Suite::Heights, &o), Err(SuiteError::InvalidOption(_))));
        }
    }

    #[test]
    fn checks_are_sorted_and_unique() {
        let r = run_suite(Suite::Heights, &SuiteOptions { order: Some(1000), ..Default::default() }).unwrap();
        let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(names, sorted);
        assert!(r.passed());
        assert_eq!(r.exit_code(), 0);
        let v = r.to_json();
        assert_eq!(v["checks"][0]["status"], "pass");
        assert!(v["checks"][0]["elapsed_ms"].is_string());
    }

    #[test]
    fn period_samples_are_seeded() {
        let a = period_samples(5, 3);
        assert_eq!(a, period_samples(5, 3));
        assert_ne!(a, period_samples(5, 4));
        assert!(a.iter().all(|s| *s > rat(0, 1) && *s <= rat(1, 10_000)));
    }

    #[test]
    fn failing_check_sets_exit_code() {
        let mut b = Builder::new();
        b.run("a", || Ok(outcome(true, None, None)));
        b.run("b", || Err("boom".into()));
        b.skip("c", "not applicable");
        let r = b.finish(Suite::Heights, toolchain(&SuiteOptions::default()));
        assert_eq!(r.exit_code(), 1);
        assert_eq!(r.check("b").unwrap().lhs.as_deref(), Some("error: boom"));
        assert_eq!(r.check("c").unwrap().status, Status::Skip);
    }
}
