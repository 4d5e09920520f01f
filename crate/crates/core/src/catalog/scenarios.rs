//! Named end-to-end checks. Every symbolic verdict is paired with a
//! numeric one at seeded random points.

use super::chh::{cbs_residual, chh_potential};
use super::mchh::{mchh_potential, miura_residuals};
use super::n0::{in_alpha, lax_in_alpha, n0_closure, n0_final, n0_k_condition, n0_lax_transformed, n0_one_form, n0_transf1, n0_transform, n0_transformed, psi_lax};
use super::reductions::{
    dp_lax, dp_lax_from_reduction, dp_reduction, dp_system, reduce_final, reduced_system, vakhnenko_lax, vakhnenko_lax_from_reduction,
    vakhnenko_lax_with, vakhnenko_reduction, vakhnenko_system,
};
use super::*;
use crate::expr::{Expression, Q};
use crate::lax::{pair_implied_by, pair_implied_numeric, verify_yields, verify_yields_numeric, LaxPair};
use crate::numeric;
use crate::system::{solve_leading, systems_equivalent, verify_closed, verify_conserved, Check, PDESystem, Ranking, Report};

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    /// Default and largest hierarchy level, for scenarios indexed by n.
    pub levels: Option<(usize, usize)>,
    pub expected: &'static str,
}

pub const SCENARIOS: &[Scenario] = &[
    Scenario { name: "chh-conserved", summary: "P on Y against -P Omega1/2 on X; dz0 closed", levels: Some((1, 4)), expected: "holds" },
    Scenario { name: "chh-to-cbs", summary: "CHH(n) to the three-variable form, then the CBS copies for its potential", levels: Some((1, 3)), expected: "cbs(i, n), i = 1..n" },
    Scenario { name: "lax-chh", summary: "spectral problem with non-isospectral lambda yields CHH(n)", levels: Some((1, 2)), expected: "holds" },
    Scenario { name: "lax-dp", summary: "reduced pair yields Degasperis-Procesi", levels: None, expected: "holds" },
    Scenario { name: "lax-mchh", summary: "2x2 pair yields mCHH(n); zero curvature", levels: Some((1, 2)), expected: "holds" },
    Scenario { name: "lax-n0", summary: "n0 pair at k = 2, -1 and its reciprocal image", levels: None, expected: "holds" },
    Scenario { name: "lax-vakhnenko", summary: "reduced pair yields the derivative Vakhnenko equation", levels: None, expected: "holds" },
    Scenario { name: "mchh-conserved", summary: "u on y against -u omega1 on x; dz0 closed", levels: Some((1, 4)), expected: "holds" },
    Scenario { name: "mchh-to-mcbs", summary: "mCHH(n) to mCBS with the potential m", levels: Some((1, 2)), expected: "mcbs(i, n), i = 1..n" },
    Scenario { name: "miura", summary: "4M = x_z0 - m maps mCBS to CBS", levels: Some((1, 2)), expected: "holds" },
    Scenario { name: "n0-closure", summary: "closure of dx1 = alpha(dx - beta dt - epsilon dT)", levels: None, expected: "transf1" },
    Scenario { name: "n0-pipeline", summary: "n0 equation through the reciprocal transform; k^2 = k + 2", levels: None, expected: "final1, final2" },
    Scenario { name: "reductions", summary: "epsilon = 0, Omega = a0; DP and Vakhnenko", levels: None, expected: "golden forms" },
    Scenario { name: "round-trip-chh", summary: "invert after apply recovers CHH(n)", levels: Some((1, 2)), expected: "chh(n)" },
    Scenario { name: "round-trip-mchh", summary: "invert after apply recovers mCHH(n)", levels: Some((1, 2)), expected: "mchh(n)" },
];

pub fn scenario(name: &str) -> Option<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.name == name)
}

#[derive(Clone, Debug)]
pub struct Settings {
    pub n: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { n: None, samples: numeric::DEFAULT_SAMPLES, seed: numeric::seed_from_env(), tol: numeric::DEFAULT_TOL }
    }
}

struct Ctx<'a> {
    st: &'a Settings,
    rep: Report,
}

impl Ctx<'_> {
    fn sym(&mut self, r: Report) {
        self.rep.extend(r);
    }

    fn flag(&mut self, name: &str, ok: bool) {
        self.rep.push(Check::expecting(name, Expression::zero(), ok, 0));
    }

    /// A negative control: passes when `r` fails.
    fn control(&mut self, name: &str, r: Report) {
        self.rep.push(Check::expecting(&format!("control {} fails", name), r.residual(), !r.holds(), r.rewrite_count()));
    }

    fn equivalent(&mut self, a: &PDESystem, b: &PDESystem) -> Result<(), CatalogError> {
        self.sym(systems_equivalent(a, b)?);
        self.sym(numeric::equivalence(a, b, self.st.samples, self.st.seed, self.st.tol)?);
        Ok(())
    }

    fn yields(&mut self, lp: &LaxPair, sys: &PDESystem) -> Result<(), CatalogError> {
        self.sym(verify_yields(lp, sys)?);
        self.sym(verify_yields_numeric(lp, sys, self.st.samples, self.st.seed, self.st.tol)?);
        Ok(())
    }

    fn yields_control(&mut self, lp: &LaxPair, sys: &PDESystem) -> Result<(), CatalogError> {
        let name = format!("{} yields {}", lp.name, sys.name);
        self.control(&name, verify_yields(lp, sys)?);
        self.control(&format!("numeric {}", name), verify_yields_numeric(lp, sys, self.st.samples, self.st.seed, self.st.tol)?);
        Ok(())
    }

    fn implied_both(&mut self, a: &LaxPair, b: &LaxPair, sys: Option<&PDESystem>) -> Result<(), CatalogError> {
        let (m, s, t) = (self.st.samples, self.st.seed, self.st.tol);
        self.sym(pair_implied_by(a, b, sys)?);
        self.sym(pair_implied_numeric(a, b, sys, m, s, t)?);
        self.sym(pair_implied_by(b, a, sys)?);
        self.sym(pair_implied_numeric(b, a, sys, m, s, t)?);
        Ok(())
    }

    fn vanishing(&mut self, name: &str, exprs: &[(String, Expression)], s: &crate::system::SolvedSystem) -> Result<(), CatalogError> {
        let mut rep = Report::new(name);
        for (n, e) in exprs {
            let (r, k) = s.reduce_counted(e)?;
            rep.push(Check::new(n, r, k));
        }
        self.sym(rep);
        self.sym(numeric::vanishing(&format!("numeric {}", name), exprs, s, self.st.samples, self.st.seed, self.st.tol)?);
        Ok(())
    }
}

/// Run a scenario by name.
pub fn run(name: &str, st: &Settings) -> Result<Report, CatalogError> {
    let sc = scenario(name).ok_or_else(|| CatalogError::Unknown(name.to_string()))?;
    let n = match sc.levels {
        Some((default, max)) => {
            let n = st.n.unwrap_or(default);
            if n == 0 || n > max {
                return Err(CatalogError::Level(n));
            }
            n
        }
        None => 0,
    };
    let title = if sc.levels.is_some() { format!("{} (n = {})", name, n) } else { name.to_string() };
    let mut cx = Ctx { st, rep: Report::new(&title) };
    match name {
        "chh-conserved" => conserved(&mut cx, &chh(n)?, &chh_pair(n)?, &chh_one_form(n)?)?,
        "mchh-conserved" => conserved(&mut cx, &mchh(n)?, &mchh_pair(n)?, &mchh_one_form(n)?)?,
        "chh-to-cbs" => chh_to_cbs(&mut cx, n)?,
        "mchh-to-mcbs" => mchh_to_mcbs(&mut cx, n)?,
        "miura" => miura(&mut cx, n)?,
        "n0-closure" => closure(&mut cx)?,
        "n0-pipeline" => pipeline(&mut cx)?,
        "reductions" => reductions(&mut cx)?,
        "lax-chh" => {
            let sys = chh(n)?;
            cx.yields(&chh_lax(n)?, &sys)?;
            cx.yields_control(&chh_lax_with(n, true)?, &sys)?;
        }
        "lax-mchh" => {
            let sys = mchh(n)?;
            let lp = mchh_lax(n)?;
            cx.yields(&lp, &sys)?;
            let zc = lp.zero_curvature(Some(&sys))?;
            let mut rep = Report::new("zero curvature");
            for (i, row) in zc.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    rep.push(Check::new(&format!("[{}][{}]", i, j), e.clone(), 0));
                }
            }
            cx.sym(rep);
            cx.yields_control(&mchh_lax_with(n, true)?, &sys)?;
        }
        "lax-n0" => lax_n0(&mut cx)?,
        "lax-dp" => {
            let lp = dp_lax()?;
            cx.yields(&lp, &dp_system("(-1)", "0")?)?;
            cx.implied_both(&dp_lax_from_reduction()?, &lp, None)?;
        }
        "lax-vakhnenko" => {
            let lp = vakhnenko_lax()?;
            let sys = vakhnenko_system()?;
            cx.yields(&lp, &sys)?;
            cx.implied_both(&vakhnenko_lax_from_reduction()?, &lp, None)?;
            cx.yields_control(&vakhnenko_lax_with("1")?, &sys)?;
        }
        "round-trip-chh" => round_trip(&mut cx, &chh_transform(n)?, &chh(n)?)?,
        "round-trip-mchh" => round_trip(&mut cx, &mchh_transform(n)?, &mchh(n)?)?,
        _ => return Err(CatalogError::Unknown(name.to_string())),
    }
    Ok(cx.rep)
}

fn conserved(cx: &mut Ctx, sys: &PDESystem, pair: &crate::system::ConservedPair, form: &crate::system::OneForm) -> Result<(), CatalogError> {
    let s = sys.solve()?;
    let (m, seed, tol) = (cx.st.samples, cx.st.seed, cx.st.tol);
    cx.sym(verify_conserved(pair, &s)?);
    cx.sym(numeric::conserved(pair, &s, m, seed, tol)?);
    cx.sym(verify_closed(form, &s)?);
    cx.sym(numeric::closed(form, &s, m, seed, tol)?);
    Ok(())
}

/// Index i when every jet of `e` differentiates only along z0, z_i, z_{i+1}.
pub fn locality(e: &Expression, n: usize) -> Option<usize> {
    let jets = e.jets();
    (1..=n).find(|&i| {
        let allowed = [Symbol::new("z0"), Symbol::new(&format!("z{}", i)), Symbol::new(&format!("z{}", i + 1))];
        jets.iter().all(|j| j.derivs().iter().all(|(x, _)| allowed.contains(x)))
    })
}

fn chh_to_cbs(cx: &mut Ctx, n: usize) -> Result<(), CatalogError> {
    let out = chh_transform(n)?.apply(&chh(n)?)?;
    cx.flag(&format!("{} equations", n), out.len() == n);
    cx.equivalent(&out, &chh_transformed(n)?)?;
    let mut seen: Vec<usize> = out.equations.iter().filter_map(|eq| locality(&eq.residual(), n)).collect();
    seen.sort_unstable();
    seen.dedup();
    cx.flag("each equation confined to (z0, z_i, z_i+1)", seen.len() == n && out.len() == n);
    let pot = chh_potential(&out, n)?;
    let s = solve_leading(&pot, &Ranking::for_space(&pot.space).eliminating(&["M".into()]))?;
    let exprs: Vec<(String, Expression)> = (1..=n).map(|i| (format!("cbs{}", i), cbs_residual(i))).collect();
    cx.vanishing("cbs", &exprs, &s)
}

fn mchh_to_mcbs(cx: &mut Ctx, n: usize) -> Result<(), CatalogError> {
    let out = mchh_transform(n)?.apply(&mchh(n)?)?;
    cx.flag(&format!("{} equations", n), out.len() == n);
    cx.equivalent(&out, &mchh_transformed(n)?)?;
    let pot = mchh_potential(&out, n)?;
    let s = solve_leading(&pot, &Ranking::for_space(&pot.space).eliminating(&["m".into()]))?;
    let mut exprs = Vec::new();
    for i in 1..=n {
        for eq in mcbs(i, n)?.equations {
            exprs.push((format!("mcbs{} {}", i, eq.name), eq.residual()));
        }
    }
    cx.vanishing("mcbs", &exprs, &s)
}

fn miura(cx: &mut Ctx, n: usize) -> Result<(), CatalogError> {
    let (s, exprs) = miura_residuals(n, -1)?;
    cx.vanishing(&format!("miura({})", n), &exprs, &s)?;
    cx.control("4M = x_z0 + m", verify_miura_with(n, 1)?);
    let (s, exprs) = miura_residuals(n, 1)?;
    let r = numeric::vanishing("numeric 4M = x_z0 + m", &exprs, &s, cx.st.samples, cx.st.seed, cx.st.tol)?;
    cx.control("numeric 4M = x_z0 + m", r);
    Ok(())
}

fn closure(cx: &mut Ctx) -> Result<(), CatalogError> {
    let c = n0_closure()?;
    let t1 = n0_transf1()?;
    cx.flag("three closure equations", c.len() == 3);
    cx.equivalent(&c, &t1)?;
    let s = t1.solve()?;
    let form = n0_one_form()?;
    cx.sym(verify_closed(&form, &s)?);
    cx.sym(numeric::closed(&form, &s, cx.st.samples, cx.st.seed, cx.st.tol)?);
    Ok(())
}

fn pipeline(cx: &mut Ctx) -> Result<(), CatalogError> {
    let cond = n0_k_condition()?;
    let sp = crate::jetspace::JetSpace::with_params(&["x"], &["u"], &["k"], 1)?;
    let expected = ex(&sp, "k^2 - k - 2");
    let mut rep = Report::new("solvability in k");
    rep.push(Check::new("condition - (k^2 - k - 2)", Expression::from_poly(cond) - expected, 0));
    cx.sym(rep);
    for k in [2, -1] {
        let kk = K::int(k);
        let (a1, a2) = kk.a1_a2().ok_or_else(|| CatalogError::Unknown(format!("k = {}", k)))?;
        cx.flag(&format!("k = {}: A1 A2 = 0 and A1 + A2 = 1", k), (&a1 * &a2) == Q::from_integer(0.into()) && (&a1 + &a2) == Q::from_integer(1.into()));
        let out = n0_transform(k)?.apply(&n0_system(k)?)?;
        let shown = n0_transformed(k)?;
        cx.equivalent(&out, &shown)?;
        cx.equivalent(&in_alpha(&n0_final(k)?)?, &shown)?;
    }
    cx.control("final(k = 2) against transformed(k = -1)", systems_equivalent(&in_alpha(&n0_final(2)?)?, &n0_transformed(-1)?)?);
    Ok(())
}

fn reductions(cx: &mut Ctx) -> Result<(), CatalogError> {
    for (a1, a2) in [("1", "0"), ("0", "1"), ("A1", "A2")] {
        cx.equivalent(&reduce_final(a1, a2, "a0")?, &reduced_system(a1, a2, "a0")?)?;
    }
    cx.equivalent(&dp_reduction()?, &dp_system("(-1)", "0")?)?;
    cx.equivalent(&vakhnenko_reduction()?, &vakhnenko_system()?)?;
    Ok(())
}

fn lax_n0(cx: &mut Ctx) -> Result<(), CatalogError> {
    for k in [2, -1] {
        cx.yields(&n0_lax(k)?, &n0_system(k)?)?;
        let got = n0_lax_transformed(k)?;
        let ctx = n0_transformed(k)?;
        cx.implied_both(&lax_in_alpha(&psi_lax(k)?)?, &got, Some(&ctx))?;
        cx.yields(&got, &ctx)?;
    }
    cx.yields_control(&n0_lax(0)?, &n0_system(0)?)?;
    Ok(())
}

fn round_trip(cx: &mut Ctx, t: &crate::recip::ReciprocalTransform, sys: &PDESystem) -> Result<(), CatalogError> {
    let back = t.invert()?.apply(&t.apply(sys)?)?;
    cx.equivalent(&back, sys)
}
