//! One PASS/FAIL line per acceptance criterion.

mod common;

use common::{ChainOracle, FD_REL_TOL};
use recipro::catalog::n0::{in_alpha, n0_closure, n0_final, n0_k_condition, n0_transf1, n0_transform, n0_transformed};
use recipro::catalog::reductions::{
    dp_lax, dp_lax_from_reduction, dp_reduction, dp_system, reduce_final, reduced_system, vakhnenko_lax,
    vakhnenko_lax_from_reduction, vakhnenko_lax_with, vakhnenko_reduction, vakhnenko_system,
};
use recipro::catalog::scenarios::{self, locality, Settings};
use recipro::catalog::*;
use recipro::expr::parse::parse_expression;
use recipro::jetspace::JetSpace;
use recipro::lax::{pair_implied_by, verify_yields, LaxPair};
use recipro::system::{solve_leading, systems_equivalent, verify_closed, verify_conserved, PDESystem, Ranking, Report};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

const CONSERVATION_LIMIT: Duration = Duration::from_secs(1);
const TRANSFORM_LIMIT: Duration = Duration::from_secs(60);
const LAX_LIMIT: Duration = Duration::from_secs(120);
const KERNEL_LIMIT: Duration = Duration::from_secs(30);
const NUMERIC_SAMPLES: usize = 10;
const NUMERIC_TOL: f64 = 1e-6;
const KERNEL_CASES: u32 = 1000;
const KERNEL_SEED: u64 = 20_240_611;

type Outcome = Result<String, String>;

fn need(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn holds(rep: &Report) -> Result<(), String> {
    match rep.checks.iter().find(|c| !c.holds) {
        None => Ok(()),
        Some(c) => Err(format!("{}: {} nonzero ({})", rep.name, c.name, c.residual)),
    }
}

fn fails(rep: &Report) -> Result<(), String> {
    need(!rep.holds(), format!("negative control {} unexpectedly holds", rep.name))
}

fn timed<T>(limit: Duration, what: &str, f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
    let t0 = Instant::now();
    let out = f()?;
    let dt = t0.elapsed();
    need(dt < limit, format!("{} took {:?}, limit {:?}", what, dt, limit))?;
    Ok(out)
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn conservation() -> Outcome {
    for n in 1..=2 {
        let (sys, pair, form) = (chh(n).map_err(e)?, chh_pair(n).map_err(e)?, chh_one_form(n).map_err(e)?);
        let (msys, mpair, mform) = (mchh(n).map_err(e)?, mchh_pair(n).map_err(e)?, mchh_one_form(n).map_err(e)?);
        for (s, p, f) in [(&sys, &pair, &form), (&msys, &mpair, &mform)] {
            let solved = s.solve().map_err(e)?;
            timed(CONSERVATION_LIMIT, "conserved", || holds(&verify_conserved(p, &solved).map_err(e)?))?;
            timed(CONSERVATION_LIMIT, "closed", || holds(&verify_closed(f, &solved).map_err(e)?))?;
        }
    }
    Ok("CHH and mCHH pairs conserved, dz0 closed, n = 1, 2".into())
}

fn chh_three_variable() -> Outcome {
    let mut times = Vec::new();
    for n in 1..=3 {
        let t0 = Instant::now();
        timed(TRANSFORM_LIMIT, &format!("chh({}) transform", n), || {
            let out = chh_transform(n).map_err(e)?.apply(&chh(n).map_err(e)?).map_err(e)?;
            need(out.len() == n, format!("chh({}) gave {} equations", n, out.len()))?;
            holds(&systems_equivalent(&out, &chh_transformed(n).map_err(e)?).map_err(e)?)?;
            let mut seen: Vec<usize> = out.equations.iter().filter_map(|q| locality(&q.residual(), n)).collect();
            seen.sort_unstable();
            seen.dedup();
            need(seen == (1..=n).collect::<Vec<_>>(), format!("chh({}) equations not confined to (z0, z_i, z_i+1)", n))
        })?;
        times.push(format!("n={} {:.2}s", n, t0.elapsed().as_secs_f64()));
    }
    Ok(times.join(", "))
}

fn cbs_emergence() -> Outcome {
    for n in 1..=3 {
        let out = chh_transform(n).map_err(e)?.apply(&chh(n).map_err(e)?).map_err(e)?;
        let pot = chh_potential(&out, n).map_err(e)?;
        let s = solve_leading(&pot, &Ranking::for_space(&pot.space).eliminating(&["M".into()])).map_err(e)?;
        for i in 1..=n {
            let c = cbs(i, n).map_err(e)?;
            for q in &c.equations {
                let r = s.reduce(&q.residual()).map_err(e)?;
                need(r.is_zero(), format!("cbs({}, {}) residual {}", i, n, r))?;
            }
        }
    }
    Ok("CBS residuals zero for every copy, n = 1, 2, 3".into())
}

fn mcbs_pipeline() -> Outcome {
    for n in 1..=2 {
        let out = mchh_transform(n).map_err(e)?.apply(&mchh(n).map_err(e)?).map_err(e)?;
        holds(&systems_equivalent(&out, &mchh_transformed(n).map_err(e)?).map_err(e)?)?;
        let pot = mchh_potential(&out, n).map_err(e)?;
        let s = solve_leading(&pot, &Ranking::for_space(&pot.space).eliminating(&["m".into()])).map_err(e)?;
        for i in 1..=n {
            for q in &mcbs(i, n).map_err(e)?.equations {
                let r = s.reduce(&q.residual()).map_err(e)?;
                need(r.is_zero(), format!("mcbs({}, {}) {} residual {}", i, n, q.name, r))?;
            }
        }
    }
    Ok("mCBS equations and the potential m reproduced, n = 1, 2".into())
}

fn miura() -> Outcome {
    for n in 1..=2 {
        holds(&verify_miura(n).map_err(e)?)?;
        fails(&verify_miura_with(n, 1).map_err(e)?)?;
    }
    Ok("holds for n = 1, 2; sign flip fails".into())
}

fn n0_pipeline() -> Outcome {
    let c = n0_closure().map_err(e)?;
    let t1 = n0_transf1().map_err(e)?;
    need(c.len() == 3, format!("closure has {} equations", c.len()))?;
    holds(&systems_equivalent(&c, &t1).map_err(e)?)?;
    let sp = JetSpace::with_params(&["x"], &["u"], &["k"], 1).map_err(e)?;
    let cond = recipro::expr::Expression::from_poly(n0_k_condition().map_err(e)?);
    let expected = parse_expression("k^2 - k - 2", &sp).map_err(e)?;
    need(cond == expected, format!("solvability condition {} is not k^2 - k - 2", cond))?;
    for k in [2, -1] {
        let out = n0_transform(k).map_err(e)?.apply(&n0_system(k).map_err(e)?).map_err(e)?;
        let shown = n0_transformed(k).map_err(e)?;
        holds(&systems_equivalent(&out, &shown).map_err(e)?)?;
        holds(&systems_equivalent(&in_alpha(&n0_final(k).map_err(e)?).map_err(e)?, &shown).map_err(e)?)?;
    }
    fails(&systems_equivalent(&in_alpha(&n0_final(2).map_err(e)?).map_err(e)?, &n0_transformed(-1).map_err(e)?).map_err(e)?)?;
    Ok(format!("closure = transf1, condition {} = 0, final forms equivalent at k = 2, -1", cond))
}

fn reductions() -> Outcome {
    for (a1, a2) in [("1", "0"), ("0", "1"), ("A1", "A2")] {
        holds(&systems_equivalent(&reduce_final(a1, a2, "a0").map_err(e)?, &reduced_system(a1, a2, "a0").map_err(e)?).map_err(e)?)?;
    }
    holds(&systems_equivalent(&dp_reduction().map_err(e)?, &dp_system("(-1)", "0").map_err(e)?).map_err(e)?)?;
    holds(&systems_equivalent(&vakhnenko_reduction().map_err(e)?, &vakhnenko_system().map_err(e)?).map_err(e)?)?;
    Ok("reduced system, DP and derivative Vakhnenko recovered".into())
}

fn lax() -> Outcome {
    let yields = |name: &str, lp: &LaxPair, sys: &PDESystem, expect: bool| -> Result<(), String> {
        timed(LAX_LIMIT, name, || {
            let rep = verify_yields(lp, sys).map_err(e)?;
            if expect {
                holds(&rep)
            } else {
                fails(&rep)
            }
        })
    };
    for k in [2, -1] {
        yields("n0", &n0_lax(k).map_err(e)?, &n0_system(k).map_err(e)?, true)?;
    }
    yields("n0 k=0", &n0_lax(0).map_err(e)?, &n0_system(0).map_err(e)?, false)?;
    for n in 1..=2 {
        yields("chh", &chh_lax(n).map_err(e)?, &chh(n).map_err(e)?, true)?;
        yields("chh broken", &chh_lax_with(n, true).map_err(e)?, &chh(n).map_err(e)?, false)?;
    }
    yields("mchh", &mchh_lax(1).map_err(e)?, &mchh(1).map_err(e)?, true)?;
    yields("mchh broken", &mchh_lax_with(1, true).map_err(e)?, &mchh(1).map_err(e)?, false)?;
    yields("dp", &dp_lax().map_err(e)?, &dp_system("(-1)", "0").map_err(e)?, true)?;
    yields("vakhnenko", &vakhnenko_lax().map_err(e)?, &vakhnenko_system().map_err(e)?, true)?;
    yields("vakhnenko wrong factor", &vakhnenko_lax_with("1").map_err(e)?, &vakhnenko_system().map_err(e)?, false)?;
    let dp = dp_lax().map_err(e)?;
    let v = vakhnenko_lax().map_err(e)?;
    for (a, b) in [(dp_lax_from_reduction().map_err(e)?, dp), (vakhnenko_lax_from_reduction().map_err(e)?, v)] {
        holds(&pair_implied_by(&a, &b, None).map_err(e)?)?;
        holds(&pair_implied_by(&b, &a, None).map_err(e)?)?;
    }
    Ok("n0 (k = 2, -1), CHH (n = 1, 2), mCHH, DP, Vakhnenko hold; k = 0 and broken controls fail".into())
}

fn round_trip() -> Outcome {
    let t = chh_transform(1).map_err(e)?;
    let sys = chh(1).map_err(e)?;
    let back = t.invert().map_err(e)?.apply(&t.apply(&sys).map_err(e)?).map_err(e)?;
    holds(&systems_equivalent(&back, &sys).map_err(e)?)?;
    let t = mchh_transform(1).map_err(e)?;
    let sys = mchh(1).map_err(e)?;
    let back = t.invert().map_err(e)?.apply(&t.apply(&sys).map_err(e)?).map_err(e)?;
    holds(&systems_equivalent(&back, &sys).map_err(e)?)?;
    Ok("chh(1) and mchh(1) recovered".into())
}

fn numeric() -> Outcome {
    let runs: &[(&str, &[usize])] = &[
        ("chh-conserved", &[1, 2]),
        ("mchh-conserved", &[1, 2]),
        ("chh-to-cbs", &[1, 2, 3]),
        ("mchh-to-mcbs", &[1, 2]),
        ("miura", &[1, 2]),
        ("n0-closure", &[0]),
        ("n0-pipeline", &[0]),
        ("reductions", &[0]),
        ("lax-n0", &[0]),
        ("lax-chh", &[1, 2]),
        ("lax-mchh", &[1]),
        ("lax-dp", &[0]),
        ("lax-vakhnenko", &[0]),
        ("round-trip-chh", &[1]),
        ("round-trip-mchh", &[1]),
    ];
    let mut count = 0;
    for (name, levels) in runs {
        for &n in *levels {
            let st = Settings {
                n: if n == 0 { None } else { Some(n) },
                samples: NUMERIC_SAMPLES,
                seed: recipro::numeric::seed_from_env(),
                tol: NUMERIC_TOL,
            };
            let rep = scenarios::run(name, &st).map_err(e)?;
            holds(&rep)?;
            for c in rep.checks.iter().filter(|c| c.name.contains("numeric")) {
                need(c.rewrite_count >= NUMERIC_SAMPLES, format!("{} used {} samples", c.name, c.rewrite_count))?;
                count += 1;
            }
        }
    }
    let transforms = [
        ("chh(1)", chh_transform(1).map_err(e)?),
        ("chh(2)", chh_transform(2).map_err(e)?),
        ("mchh(1)", mchh_transform(1).map_err(e)?),
        ("mchh(2)", mchh_transform(2).map_err(e)?),
        ("n0(2)", n0_transform(2).map_err(e)?),
        ("n0(-1)", n0_transform(-1).map_err(e)?),
        ("chh(1) inverse", chh_transform(1).map_err(e)?.invert().map_err(e)?),
        ("mchh(1) inverse", mchh_transform(1).map_err(e)?.invert().map_err(e)?),
    ];
    let mut rules = 0;
    let mut worst: f64 = 0.0;
    for (i, (name, t)) in transforms.iter().enumerate() {
        let (k, err) = ChainOracle::new(t, 100 + i as u64).max_error(3);
        need(err < FD_REL_TOL, format!("{} chain rules deviate by {:e}", name, err))?;
        rules += k;
        worst = worst.max(err);
    }
    Ok(format!("{} numeric checks at >= {} points, {} chain rules within {:.1e}", count, NUMERIC_SAMPLES, rules, worst))
}

fn kernel() -> Outcome {
    timed(KERNEL_LIMIT, "kernel laws", || common::run_kernel_laws(KERNEL_CASES, KERNEL_SEED))?;
    Ok(format!("{} triples", KERNEL_CASES))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("conservation verification", conservation),
        ("CHH to three-variable form", chh_three_variable),
        ("CBS emergence", cbs_emergence),
        ("mCHH to mCBS", mcbs_pipeline),
        ("Miura", miura),
        ("n0 pipeline", n0_pipeline),
        ("reductions", reductions),
        ("Lax compatibility", lax),
        ("round trip", round_trip),
        ("numeric oracles", numeric),
        ("kernel properties", kernel),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let dt = t0.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("criterion {:>2} {}: PASS ({}; {:.2}s)", i + 1, name, detail, dt),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {}: FAIL ({}; {:.2}s)", i + 1, name, why, dt);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
