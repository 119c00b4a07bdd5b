//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use gflab::report::{run_suite, Report, Status, Suite, SuiteOptions};

struct Line {
    id: u32,
    title: &'static str,
    ok: bool,
    detail: String,
}

fn opts() -> SuiteOptions {
    SuiteOptions { seed: 20260101, ..SuiteOptions::default() }
}

fn timed(suite: Suite, o: &SuiteOptions) -> (Report, Duration) {
    let t = Instant::now();
    let r = run_suite(suite, o).expect("valid options");
    (r, t.elapsed())
}

fn failures(r: &Report, prefix: &str) -> Vec<String> {
    r.checks.iter().filter(|c| c.name.starts_with(prefix) && c.status != Status::Pass).map(|c| c.name.clone()).collect()
}

fn all_pass(r: &Report, names: &[&str]) -> Result<(), String> {
    for n in names {
        match r.check(n) {
            Some(c) if c.status == Status::Pass => {}
            Some(c) => return Err(format!("{n}: {} ({:?})", c.status, c.lhs)),
            None => return Err(format!("{n}: missing")),
        }
    }
    Ok(())
}

fn verdicts(r: &Report) -> Vec<(String, Status)> {
    r.checks.iter().map(|c| (c.name.clone(), c.status)).collect()
}

fn criterion(id: u32, title: &'static str, body: impl FnOnce() -> Result<String, String>) -> Line {
    let (ok, detail) = match body() {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Line { id, title, ok, detail }
}

#[test]
fn acceptance_criteria() {
    let o = opts();
    let mut lines = Vec::new();

    lines.push(criterion(1, "q-expansion identities to order 300", || {
        let (r, t) = timed(Suite::Identities, &SuiteOptions { order: Some(300), ..o.clone() });
        all_pass(
            &r,
            &[
                "alpha_sq_e4_equals_e6",
                "theta_after_inv_j_is_x",
                "inv_j_after_theta_is_x",
                "f_is_alpha_after_theta",
                "delta_from_eisenstein_equals_eta_product",
                "a4_tate_is_minus_5_s3",
                "a6_tate_relation",
            ],
        )?;
        if t > Duration::from_secs(60) {
            return Err(format!("took {t:?}"));
        }
        Ok(format!("{:.1}s", t.as_secs_f64()))
    }));

    lines.push(criterion(2, "golden coefficients and the alpha display verdict", || {
        let (r, _) = timed(Suite::Identities, &SuiteOptions { order: Some(20), ..o.clone() });
        all_pass(
            &r,
            &[
                "golden_theta",
                "golden_a4_tate",
                "golden_a6_tate",
                "golden_j",
                "golden_alpha_oracle",
                "alpha_paper_display_is_a_typo",
            ],
        )?;
        Ok(r.check("golden_alpha_oracle").unwrap().lhs.clone().unwrap_or_default())
    }));

    lines.push(criterion(3, "integrality to order 500", || {
        let (r, t) = timed(Suite::Growth, &SuiteOptions { order: Some(500), ..o.clone() });
        let bad = failures(&r, "integral_");
        if !bad.is_empty() || r.checks.iter().filter(|c| c.name.starts_with("integral_")).count() != 5 {
            return Err(format!("failing: {bad:?}"));
        }
        if t > Duration::from_secs(120) {
            return Err(format!("took {t:?}"));
        }
        Ok(format!("{:.1}s", t.as_secs_f64()))
    }));

    lines.push(criterion(4, "non-archimedean lemmas, 200 samples at p = 2, 3, 5, K = 40", || {
        let (r, _) = timed(Suite::NonarchLemmas, &SuiteOptions { samples: Some(200), precision: Some(40), ..o.clone() });
        all_pass(&r, &["lemmas_p2", "lemmas_p3", "lemmas_p5"])?;
        Ok("0 failures".into())
    }));

    lines.push(criterion(5, "modular polynomials of levels 2 and 3 mod q^150", || {
        let (r, t) = timed(Suite::Modpoly, &SuiteOptions { order: Some(150), ..o.clone() });
        all_pass(&r, &["phi2_generated", "phi2_annihilates_j_pair", "phi3_generated", "phi3_annihilates_j_pair"])?;
        if t > Duration::from_secs(300) {
            return Err(format!("took {t:?}"));
        }
        Ok(format!("{:.1}s", t.as_secs_f64()))
    }));

    let periods = timed(Suite::Periods, &SuiteOptions { samples: Some(5), bits: Some(256), ..o.clone() });

    lines.push(criterion(6, "archimedean F period and Legendre relation at 5 samples", || {
        let (r, t) = &periods;
        let agree: Vec<_> = r.checks.iter().filter(|c| c.name.ends_with("_f_series_vs_lattice")).collect();
        let leg: Vec<_> = r.checks.iter().filter(|c| c.name.ends_with("_legendre")).collect();
        if agree.len() != 5 || leg.len() != 5 {
            return Err(format!("{} agreement and {} Legendre checks", agree.len(), leg.len()));
        }
        if let Some(c) = agree.iter().chain(&leg).find(|c| c.status != Status::Pass) {
            return Err(format!("{} failed", c.name));
        }
        if *t > Duration::from_secs(120) {
            return Err(format!("took {t:?}"));
        }
        Ok(format!("{:.1}s", t.as_secs_f64()))
    }));

    lines.push(criterion(7, "G reconstruction with held-out validation", || {
        let (r, _) = &periods;
        all_pass(r, &["g_reconstruction"])?;
        let g = r.checks.iter().filter(|c| c.name.ends_with("_legendre_with_g_series")).collect::<Vec<_>>();
        if g.is_empty() || g.iter().any(|c| c.status != Status::Pass) {
            return Err("Legendre with reconstructed G".into());
        }
        Ok(r.check("g_reconstruction").unwrap().lhs.clone().unwrap_or_default())
    }));

    lines.push(criterion(8, "cross-place isogeny relation, K = 50 and 100", || {
        let (r, t) = timed(Suite::PadicRelations, &SuiteOptions { precision: Some(50), ..o.clone() });
        all_pass(&r, &["t5_scalars", "t5_inf", "t5_p5"])?;
        let extra = ["t3_p3", "t7_p7", "t15_p3"];
        if !extra.iter().any(|n| r.check(n).is_some_and(|c| c.status == Status::Pass)) {
            return Err("no second pair at p = 3 or 7".into());
        }
        let bad = failures(&r, "t");
        if !bad.is_empty() {
            return Err(format!("failing: {bad:?}"));
        }
        if t > Duration::from_secs(120 * 4) {
            return Err(format!("took {t:?}"));
        }
        Ok(r.check("t5_p5").unwrap().lhs.clone().unwrap_or_default())
    }));

    let relations = timed(Suite::Relations, &o);

    lines.push(criterion(9, "relation polynomial bookkeeping", || {
        let (r, _) = &relations;
        all_pass(r, &["p_fin_degree_m1", "p_fin_degree_m2", "p_fin_degree_m6", "p_fin_degree_m12", "p_inf_quadratic_synthetic"])?;
        let (pr, _) = timed(Suite::PadicRelations, &SuiteOptions { precision: Some(20), ..o.clone() });
        let bad = failures(&pr, "").into_iter().filter(|n| n.ends_with("_scalars")).collect::<Vec<_>>();
        if !bad.is_empty() {
            return Err(format!("a·d or det failed: {bad:?}"));
        }
        Ok("degrees 2, 4, 8, 12".into())
    }));

    lines.push(criterion(10, "ODE discovery and functional relations", || {
        let (r, _) = &relations;
        all_pass(r, &["ode_for_f", "planted_relations", "no_rational_relation_for_f"])?;
        Ok(r.check("ode_for_f").unwrap().lhs.clone().unwrap_or_default())
    }));

    lines.push(criterion(11, "divisor bound and heights", || {
        let (r, _) = timed(Suite::Heights, &o);
        all_pass(&r, &["divisor_count_12", "divisor_bound_scan", "height_two_thirds", "height_golden_ratio"])?;
        Ok(r.check("height_golden_ratio").unwrap().lhs.clone().unwrap_or_default())
    }));

    lines.push(criterion(12, "determinism and precision monotonicity", || {
        for suite in [Suite::NonarchLemmas, Suite::Heights, Suite::Modpoly] {
            let small = SuiteOptions { samples: Some(40), order: if suite == Suite::Modpoly { Some(60) } else { None }, ..o.clone() };
            let a = run_suite(suite, &small).unwrap().without_timings();
            let b = run_suite(suite, &small).unwrap().without_timings();
            if a != b || a.to_json() != b.to_json() {
                return Err(format!("{} differs between runs", suite.as_str()));
            }
        }
        let p2 = timed(Suite::Periods, &SuiteOptions { samples: Some(5), bits: Some(512), ..o.clone() }).0;
        if verdicts(&periods.0) != verdicts(&p2) {
            return Err("periods verdicts changed at 512 bits".into());
        }
        let n1 = run_suite(Suite::NonarchLemmas, &SuiteOptions { samples: Some(50), precision: Some(40), ..o.clone() }).unwrap();
        let n2 = run_suite(Suite::NonarchLemmas, &SuiteOptions { samples: Some(50), precision: Some(80), ..o.clone() }).unwrap();
        if verdicts(&n1) != verdicts(&n2) {
            return Err("nonarch verdicts changed at K = 80".into());
        }
        let a1 = run_suite(Suite::PadicRelations, &SuiteOptions { precision: Some(30), ..o.clone() }).unwrap();
        let a2 = run_suite(Suite::PadicRelations, &SuiteOptions { precision: Some(60), bits: Some(512), ..o.clone() }).unwrap();
        if verdicts(&a1) != verdicts(&a2) {
            return Err("padic-relations verdicts changed when K and bits doubled".into());
        }
        Ok("identical reports; verdicts stable".into())
    }));

    println!();
    for l in &lines {
        println!("criterion {:>2} {} {}  [{}]", l.id, if l.ok { "PASS" } else { "FAIL" }, l.title, l.detail);
    }
    let failed: Vec<u32> = lines.iter().filter(|l| !l.ok).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
