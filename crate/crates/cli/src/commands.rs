//! Command implementations shared by the binary and the tests.

use crate::dsl::{parse_document, DslError};
use crate::model::{Model, ModelError};
use crate::report::{Artifact, Outcome};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use recipro::catalog::{self, scenarios, CatalogError};
use recipro::expr::{Expression, Symbol, Q};
use recipro::lax::{verify_yields, verify_yields_numeric, LaxError, LaxPair};
use recipro::numeric;
use recipro::recip::{potentialize, RecipError, ReciprocalTransform};
use recipro::system::{
    solve_leading, systems_equivalent, verify_closed, verify_conserved, Check, ConservedPair, OneForm, PDESystem, Ranking, Report,
    SystemError,
};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "recipro", version, about = "Verify reciprocal transformations, conservation laws and Lax pairs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Print the report as JSON (schema 1).
    #[arg(long, global = true)]
    pub json: bool,
    /// Also write the report as a LaTeX fragment.
    #[arg(long, global = true, value_name = "PATH")]
    pub tex: Option<PathBuf>,
    /// Rewrite budget per reduction.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Absolute tolerance of the numeric cross-checks.
    #[arg(long, global = true, default_value_t = numeric::DEFAULT_TOL)]
    pub tol: f64,
    /// Random points per numeric cross-check.
    #[arg(long, global = true, default_value_t = numeric::DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Scenarios run concurrently.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args, Debug, Clone)]
pub struct Target {
    /// Catalog entry (chh, mchh, n0, dp, vakhnenko) or a .rcp file.
    pub target: String,
    /// Hierarchy level.
    #[arg(long)]
    pub n: Option<usize>,
    /// Parameter of the n0 equation.
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<i64>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Check D_var A = D_var' A' modulo the system.
    VerifyConserved(Target),
    /// Check that a one-form is closed modulo the system.
    VerifyClosed(Target),
    /// Build a reciprocal transform and print its rules.
    BuildTransform {
        #[command(flatten)]
        target: Target,
        /// Highest derivative order of the printed rules.
        #[arg(long, default_value_t = 2)]
        order: u32,
        /// Field whose rules are printed.
        #[arg(long)]
        field: Option<String>,
    },
    /// Apply a transform and compare with the expected system.
    Apply(Target),
    /// Check that the inverse undoes the transform.
    RoundTrip(Target),
    /// Introduce a potential from conservation laws.
    Potentialize {
        #[command(flatten)]
        target: Target,
        /// Name of the potential (files only).
        #[arg(long, default_value = "W")]
        field: String,
    },
    /// Check that a Lax pair yields its system.
    LaxCheck {
        #[command(flatten)]
        target: Target,
        /// Use a pair whose spectral constraint is deliberately wrong.
        #[arg(long)]
        break_constraint: bool,
    },
    /// Check the Miura map between the modified and unmodified CBS systems.
    Miura {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run a named scenario, `all`, or the scenario blocks of a .rcp file.
    Scenario {
        name: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        /// List the scenarios instead of running them.
        #[arg(long)]
        list: bool,
    },
    /// Emit the systems of a target as LaTeX.
    Latex(Target),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyConserved(_) => "verify-conserved",
            Command::VerifyClosed(_) => "verify-closed",
            Command::BuildTransform { .. } => "build-transform",
            Command::Apply(_) => "apply",
            Command::RoundTrip(_) => "round-trip",
            Command::Potentialize { .. } => "potentialize",
            Command::LaxCheck { .. } => "lax-check",
            Command::Miura { .. } => "miura",
            Command::Scenario { .. } => "scenario",
            Command::Latex(_) => "latex",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{file}: {errors:?}")]
    Dsl { file: String, errors: Vec<DslError> },
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Budget(_) => EXIT_BUDGET,
            _ => EXIT_INPUT,
        }
    }

    /// One diagnostic per problem: (kind, message, line, col).
    pub fn diagnostics(&self) -> Vec<(String, String, Option<usize>, Option<usize>)> {
        match self {
            CliError::Dsl { file, errors } => errors
                .iter()
                .map(|e| {
                    let msg = match e {
                        DslError::Syntax { message, .. } | DslError::Invalid { message, .. } => message.clone(),
                        DslError::UnknownName { name, .. } => format!("unknown name `{}`", name),
                    };
                    (e.kind().to_string(), format!("{}: {}", file, msg), Some(e.pos().line), Some(e.pos().col))
                })
                .collect(),
            CliError::Io(m) => vec![("io".into(), m.clone(), None, None)],
            CliError::Input(m) => vec![("input".into(), m.clone(), None, None)],
            CliError::Budget(m) => vec![("budget".into(), m.clone(), None, None)],
        }
    }
}

macro_rules! budget_aware {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> CliError {
                if e.is_budget() {
                    CliError::Budget(e.to_string())
                } else {
                    CliError::Input(e.to_string())
                }
            }
        }
    )*};
}

budget_aware!(SystemError, RecipError, LaxError, CatalogError, ModelError);

/// Numeric cross-check settings.
#[derive(Clone, Copy, Debug)]
pub struct Numeric {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Numeric {
    pub fn from_global(g: &Global) -> Numeric {
        Numeric { samples: g.samples, seed: numeric::seed_from_env(), tol: g.tol }
    }
}

enum Source {
    Catalog(String),
    File(Box<Model>),
}

fn is_file(t: &str) -> bool {
    t.ends_with(".rcp") || Path::new(t).is_file()
}

pub fn load(path: &str) -> Result<Model, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {}", path, e)))?;
    let doc = parse_document(&text).map_err(|errors| CliError::Dsl { file: path.to_string(), errors })?;
    Ok(Model::build(&doc)?)
}

fn source(t: &Target) -> Result<Source, CliError> {
    if is_file(&t.target) {
        Ok(Source::File(Box::new(load(&t.target)?)))
    } else {
        match t.target.as_str() {
            "chh" | "mchh" | "n0" | "dp" | "vakhnenko" => Ok(Source::Catalog(t.target.clone())),
            other => Err(CliError::Input(format!("unknown target `{}`; expected chh, mchh, n0, dp, vakhnenko or a .rcp file", other))),
        }
    }
}

fn unsupported(cmd: &str, target: &str) -> CliError {
    CliError::Input(format!("`{}` has nothing to check for catalog target `{}`", cmd, target))
}

fn level(t: &Target) -> Result<usize, CliError> {
    let n = t.n.unwrap_or(1);
    if (1..=catalog::MAX_LEVEL).contains(&n) {
        Ok(n)
    } else {
        Err(CatalogError::Level(n).into())
    }
}

fn conserved_reports(pair: &ConservedPair, sys: &PDESystem, num: Numeric) -> Result<Vec<Report>, CliError> {
    let s = sys.solve()?;
    let mut sym = verify_conserved(pair, &s)?;
    sym.name = format!("conserved on {}", sys.name);
    Ok(vec![sym, numeric::conserved(pair, &s, num.samples, num.seed, num.tol)?])
}

fn closed_reports(form: &OneForm, sys: &PDESystem, num: Numeric) -> Result<Vec<Report>, CliError> {
    let s = sys.solve()?;
    let mut sym = verify_closed(form, &s)?;
    sym.name = format!("d{} closed on {}", form.target, sys.name);
    Ok(vec![sym, numeric::closed(form, &s, num.samples, num.seed, num.tol)?])
}

fn equivalence_reports(a: &PDESystem, b: &PDESystem, num: Numeric) -> Result<Vec<Report>, CliError> {
    Ok(vec![systems_equivalent(a, b)?, numeric::equivalence(a, b, num.samples, num.seed, num.tol)?])
}

fn yields_reports(lp: &LaxPair, sys: &PDESystem, num: Numeric) -> Result<Vec<Report>, CliError> {
    Ok(vec![verify_yields(lp, sys)?, verify_yields_numeric(lp, sys, num.samples, num.seed, num.tol)?])
}

fn vanishing_reports(name: &str, exprs: &[(String, Expression)], s: &recipro::system::SolvedSystem, num: Numeric) -> Result<Vec<Report>, CliError> {
    let mut rep = Report::new(name);
    for (n, e) in exprs {
        let (r, k) = s.reduce_counted(e)?;
        rep.push(Check::new(n, r, k));
    }
    Ok(vec![rep, numeric::vanishing(&format!("numeric {}", name), exprs, s, num.samples, num.seed, num.tol)?])
}

fn catalog_transform(name: &str, t: &Target) -> Result<(ReciprocalTransform, PDESystem, PDESystem), CliError> {
    Ok(match name {
        "chh" => {
            let n = level(t)?;
            (catalog::chh_transform(n)?, catalog::chh(n)?, catalog::chh_transformed(n)?)
        }
        "mchh" => {
            let n = level(t)?;
            (catalog::mchh_transform(n)?, catalog::mchh(n)?, catalog::mchh_transformed(n)?)
        }
        "n0" => {
            let k = t.k.unwrap_or(2);
            (catalog::n0::n0_transform(k)?, catalog::n0_system(k)?, catalog::n0::n0_transformed(k)?)
        }
        other => return Err(unsupported("transform", other)),
    })
}

fn describe(tr: &ReciprocalTransform, field: Option<&str>, order: u32) -> Result<Vec<Artifact>, CliError> {
    let field = match field {
        Some(f) => f.to_string(),
        None => tr.source().dep().first().map(|s| s.to_string()).ok_or_else(|| CliError::Input("source space has no fields".into()))?,
    };
    let doc = tr.describe(&field, order)?;
    let text = |v: &[(String, String)]| v.iter().map(|(a, b)| (a.clone(), b.clone(), b.clone())).collect::<Vec<_>>();
    let form: Vec<(String, String, String)> = tr.one_form()?.coeffs.iter().map(|(x, c)| (format!("d{}", x), c.to_string(), recipro::expr::to_latex(c))).collect();
    let gradient: Vec<(String, String, String)> =
        tr.gradient().iter().map(|(z, g)| (format!("{}_{}", tr.new_field(), z), g.to_string(), recipro::expr::to_latex(g))).collect();
    Ok(vec![
        Artifact::pairs(&format!("one-form d{} (pivot {} -> field {})", doc.target_pivot, doc.pivot, doc.new_field), &form),
        Artifact::pairs("gradient of the new field", &gradient),
        Artifact::pairs(&format!("rules for {} up to order {}", field, order), &text(&doc.rules)),
    ])
}

pub fn run_command(cmd: &Command, g: &Global) -> Result<Outcome, CliError> {
    let num = Numeric::from_global(g);
    let name = cmd.name();
    match cmd {
        Command::VerifyConserved(t) => {
            let mut o = Outcome::new(name, &t.target);
            match source(t)? {
                Source::Catalog(c) => {
                    let n = level(t)?;
                    let (pair, sys) = match c.as_str() {
                        "chh" => (catalog::chh_pair(n)?, catalog::chh(n)?),
                        "mchh" => (catalog::mchh_pair(n)?, catalog::mchh(n)?),
                        other => return Err(unsupported(name, other)),
                    };
                    o.reports = conserved_reports(&pair, &sys, num)?;
                }
                Source::File(m) => {
                    if m.pairs.is_empty() {
                        return Err(CliError::Input(format!("{} declares no conserved block", t.target)));
                    }
                    for (pn, pair, sys) in &m.pairs {
                        for mut r in conserved_reports(pair, sys, num)? {
                            r.name = format!("{}: {}", pn, r.name);
                            o.reports.push(r);
                        }
                    }
                }
            }
            Ok(o)
        }
        Command::VerifyClosed(t) => {
            let mut o = Outcome::new(name, &t.target);
            match source(t)? {
                Source::Catalog(c) => {
                    let (form, sys) = match c.as_str() {
                        "chh" => (catalog::chh_one_form(level(t)?)?, catalog::chh(level(t)?)?),
                        "mchh" => (catalog::mchh_one_form(level(t)?)?, catalog::mchh(level(t)?)?),
                        "n0" => (catalog::n0::n0_one_form()?, catalog::n0::n0_transf1()?),
                        other => return Err(unsupported(name, other)),
                    };
                    o.reports = closed_reports(&form, &sys, num)?;
                }
                Source::File(m) => {
                    let mut forms: Vec<(String, OneForm, PDESystem)> = m.forms.clone();
                    for tr in &m.transforms {
                        forms.push((tr.name.clone(), tr.transform.one_form()?, tr.source.clone()));
                    }
                    if forms.is_empty() {
                        return Err(CliError::Input(format!("{} declares no form or transform block", t.target)));
                    }
                    for (fname, form, sys) in &forms {
                        for mut r in closed_reports(form, sys, num)? {
                            r.name = format!("{}: {}", fname, r.name);
                            o.reports.push(r);
                        }
                    }
                }
            }
            Ok(o)
        }
        Command::BuildTransform { target: t, order, field } => {
            let mut o = Outcome::new(name, &t.target);
            match source(t)? {
                Source::Catalog(c) => {
                    let (tr, _, _) = catalog_transform(&c, t)?;
                    o.artifacts = describe(&tr, field.as_deref(), *order)?;
                }
                Source::File(m) => {
                    if m.transforms.is_empty() {
                        return Err(CliError::Input(format!("{} declares no transform block", t.target)));
                    }
                    for tr in &m.transforms {
                        for mut a in describe(&tr.transform, field.as_deref(), *order)? {
                            a.title = format!("{}: {}", tr.name, a.title);
                            o.artifacts.push(a);
                        }
                    }
                }
            }
            Ok(o)
        }
        Command::Apply(t) => {
            let mut o = Outcome::new(name, &t.target);
            let jobs: Vec<(String, ReciprocalTransform, PDESystem, Option<PDESystem>)> = match source(t)? {
                Source::Catalog(c) => {
                    let (tr, sys, expect) = catalog_transform(&c, t)?;
                    vec![(c, tr, sys, Some(expect))]
                }
                Source::File(m) => m.transforms.into_iter().map(|tr| (tr.name, tr.transform, tr.source, tr.expect)).collect(),
            };
            if jobs.is_empty() {
                return Err(CliError::Input(format!("{} declares no transform block", t.target)));
            }
            for (tn, tr, sys, expect) in jobs {
                let out = tr.apply(&sys)?;
                o.artifacts.push(Artifact::system(&format!("{} applied to {}", tn, sys.name), &out));
                if let Some(e) = expect {
                    o.reports.extend(equivalence_reports(&out, &e, num)?);
                }
            }
            Ok(o)
        }
        Command::RoundTrip(t) => {
            let mut o = Outcome::new(name, &t.target);
            let jobs: Vec<(ReciprocalTransform, PDESystem)> = match source(t)? {
                Source::Catalog(c) => match c.as_str() {
                    "chh" | "mchh" => {
                        let (tr, sys, _) = catalog_transform(&c, t)?;
                        vec![(tr, sys)]
                    }
                    other => return Err(unsupported(name, other)),
                },
                Source::File(m) => m.transforms.into_iter().map(|tr| (tr.transform, tr.source)).collect(),
            };
            if jobs.is_empty() {
                return Err(CliError::Input(format!("{} declares no transform block", t.target)));
            }
            for (tr, sys) in jobs {
                let back = tr.invert()?.apply(&tr.apply(&sys)?)?;
                o.reports.extend(equivalence_reports(&back, &sys, num)?);
            }
            Ok(o)
        }
        Command::Potentialize { target: t, field } => {
            let mut o = Outcome::new(name, &t.target);
            match source(t)? {
                Source::Catalog(c) => {
                    let n = level(t)?;
                    let (pot, pairs, expect, new) = match c.as_str() {
                        "chh" => (
                            catalog::chh_potential(&catalog::chh_transformed(n)?, n)?,
                            catalog::chh_potential_pairs(n)?,
                            (1..=n).map(|i| catalog::cbs(i, n)).collect::<Result<Vec<_>, _>>()?,
                            "M",
                        ),
                        "mchh" => (
                            catalog::mchh_potential(&catalog::mchh_transformed(n)?, n)?,
                            catalog::mchh_potential_pairs(n)?,
                            (1..=n).map(|i| catalog::mcbs(i, n)).collect::<Result<Vec<_>, _>>()?,
                            "m",
                        ),
                        other => return Err(unsupported(name, other)),
                    };
                    o.artifacts.push(Artifact::system(&pot.name, &pot));
                    let (rep, art) = potential_reports(&pot, new, &pairs)?;
                    o.reports.push(rep);
                    o.artifacts.extend(art);
                    let s = solve_leading(&pot, &Ranking::for_space(&pot.space).eliminating(&[new.into()]))?;
                    let exprs: Vec<(String, Expression)> =
                        expect.iter().flat_map(|sys| sys.equations.iter().map(move |eq| (format!("{} {}", sys.name, eq.name), eq.residual()))).collect();
                    o.reports.extend(vanishing_reports("potential equations", &exprs, &s, num)?);
                }
                Source::File(m) => {
                    let Some(sys) = m.pairs.first().map(|p| p.2.clone()) else {
                        return Err(CliError::Input(format!("{} declares no conserved block", t.target)));
                    };
                    let pairs: Vec<ConservedPair> = m.pairs.iter().filter(|p| p.2.name == sys.name).map(|p| p.1.clone()).collect();
                    let pot = potentialize(&sys, &pairs, field, &Q::from_integer(1.into()))?;
                    o.artifacts.push(Artifact::system(&pot.name, &pot));
                    let (rep, art) = potential_reports(&pot, field, &pairs)?;
                    o.reports.push(rep);
                    o.artifacts.extend(art);
                }
            }
            Ok(o)
        }
        Command::LaxCheck { target: t, break_constraint } => {
            let mut o = Outcome::new(name, &t.target);
            match source(t)? {
                Source::Catalog(c) => {
                    let (lp, sys) = match (c.as_str(), break_constraint) {
                        ("chh", b) => (catalog::chh_lax_with(level(t)?, *b)?, catalog::chh(level(t)?)?),
                        ("mchh", b) => (catalog::mchh_lax_with(level(t)?, *b)?, catalog::mchh(level(t)?)?),
                        ("n0", false) => {
                            let k = t.k.unwrap_or(2);
                            (catalog::n0_lax(k)?, catalog::n0_system(k)?)
                        }
                        ("dp", false) => (catalog::reductions::dp_lax()?, catalog::reductions::dp_system("(-1)", "0")?),
                        ("vakhnenko", b) => {
                            let lp = if *b { catalog::reductions::vakhnenko_lax_with("1")? } else { catalog::reductions::vakhnenko_lax()? };
                            (lp, catalog::reductions::vakhnenko_system()?)
                        }
                        (other, _) => return Err(CliError::Input(format!("--break-constraint is not available for `{}`", other))),
                    };
                    o.reports = yields_reports(&lp, &sys, num)?;
                }
                Source::File(m) => {
                    let mut any = false;
                    for (lp, sys) in &m.laxes {
                        if let Some(sys) = sys {
                            any = true;
                            o.reports.extend(yields_reports(lp, sys, num)?);
                        }
                    }
                    if !any {
                        return Err(CliError::Input(format!("{} declares no lax block with `yields`", t.target)));
                    }
                }
            }
            Ok(o)
        }
        Command::Miura { n } => {
            let n = level(&Target { target: String::new(), n: *n, k: None })?;
            let mut o = Outcome::new(name, &format!("n = {}", n));
            let (s, exprs) = catalog::miura_residuals(n, -1)?;
            o.reports = vanishing_reports(&format!("miura({})", n), &exprs, &s, num)?;
            Ok(o)
        }
        Command::Scenario { name: sc, n, list } => {
            let mut o = Outcome::new(name, sc.as_deref().unwrap_or("all"));
            if *list {
                let items: Vec<(String, String, String)> = scenarios::SCENARIOS
                    .iter()
                    .map(|s| {
                        let lv = s.levels.map_or(String::new(), |(d, m)| format!(" [n = {}..{}, default {}]", 1, m, d));
                        (s.name.to_string(), format!("{}{}; expects {}", s.summary, lv, s.expected), s.summary.to_string())
                    })
                    .collect();
                o.artifacts.push(Artifact::pairs("scenarios", &items));
                return Ok(o);
            }
            let runs: Vec<(String, Option<usize>)> = match sc.as_deref() {
                None | Some("all") => scenarios::SCENARIOS.iter().map(|s| (s.name.to_string(), *n)).collect(),
                Some(f) if is_file(f) => load(f)?.scenarios.into_iter().map(|(_, r, k)| (r, k.or(*n))).collect(),
                Some(s) => vec![(s.to_string(), *n)],
            };
            o.reports = run_scenarios(&runs, num, g.jobs)?;
            Ok(o)
        }
        Command::Latex(t) => {
            let mut o = Outcome::new(name, &t.target);
            match source(t)? {
                Source::Catalog(c) => {
                    let systems = match c.as_str() {
                        "chh" => vec![catalog::chh(level(t)?)?, catalog::chh_transformed(level(t)?)?],
                        "mchh" => vec![catalog::mchh(level(t)?)?, catalog::mchh_transformed(level(t)?)?],
                        "n0" => {
                            let k = t.k.unwrap_or(2);
                            vec![catalog::n0_system(k)?, catalog::n0::n0_transformed(k)?]
                        }
                        "dp" => vec![catalog::reductions::dp_system("(-1)", "0")?],
                        "vakhnenko" => vec![catalog::reductions::vakhnenko_system()?],
                        other => return Err(unsupported(name, other)),
                    };
                    o.artifacts = systems.iter().map(|s| Artifact::system(&s.name, s)).collect();
                }
                Source::File(m) => o.artifacts = m.systems.iter().map(|s| Artifact::system(&s.name, s)).collect(),
            }
            Ok(o)
        }
    }
}

/// Mixed partials of the potential along the two variables of one law
/// agree modulo the source system. Mixed partials across different laws are
/// extra conditions that a common potential imposes; they are listed, not
/// checked.
fn potential_reports(pot: &PDESystem, field: &str, pairs: &[ConservedPair]) -> Result<(Report, Option<Artifact>), CliError> {
    let s = solve_leading(pot, &Ranking::for_space(&pot.space).eliminating(&[field.into()]))?;
    let w = Symbol::new(field);
    let defs: Vec<(Symbol, Expression)> = pot
        .equations
        .iter()
        .filter_map(|eq| match eq.lhs.jets().into_iter().next() {
            Some(j) if j.field == w && j.order() == 1 => Some((j.derivs()[0].0.clone(), eq.rhs.clone())),
            _ => None,
        })
        .collect();
    let sp = &pot.space;
    let mut rep = Report::new(&format!("{} is well defined", field));
    let mut extra = Vec::new();
    for (i, (a, va)) in defs.iter().enumerate() {
        for (b, vb) in &defs[i + 1..] {
            let e = sp.total_derivative(vb, a).map_err(SystemError::from)? - sp.total_derivative(va, b).map_err(SystemError::from)?;
            let (r, k) = s.reduce_counted(&e)?;
            let name = format!("{}_{{{} {}}}", field, a, b);
            let same_law = pairs.iter().any(|p| (p.var == *a && p.var_prime == *b) || (p.var == *b && p.var_prime == *a));
            if same_law {
                rep.push(Check::new(&name, r, k));
            } else if !r.is_zero() {
                extra.push((name, format!("{} = 0", r), format!("{} = 0", recipro::expr::to_latex(&r))));
            }
        }
    }
    let art = (!extra.is_empty()).then(|| Artifact::pairs("conditions across laws imposed by a common potential", &extra));
    Ok((rep, art))
}

/// Run scenarios on up to `jobs` threads; reports keep the input order.
pub fn run_scenarios(runs: &[(String, Option<usize>)], num: Numeric, jobs: usize) -> Result<Vec<Report>, CliError> {
    let budget = recipro::system::default_budget();
    let one = |(name, n): &(String, Option<usize>)| {
        recipro::system::set_default_budget(budget);
        let st = scenarios::Settings { n: *n, samples: num.samples, seed: num.seed, tol: num.tol };
        scenarios::run(name, &st).map_err(|e| match e {
            CatalogError::Unknown(s) => CliError::Input(format!("unknown scenario `{}`; see `recipro scenario --list`", s)),
            other => other.into(),
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Input(format!("--jobs: {}", e)))?;
    let results: Vec<Result<Report, CliError>> = pool.install(|| runs.par_iter().map(one).collect());
    results.into_iter().collect()
}

/// Parse arguments, run, print, and return the exit code.
pub fn main_with(args: impl IntoIterator<Item = String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            if code != EXIT_OK {
                eprintln!("recipro: error[usage]: invalid command line");
            }
            return code;
        }
    };
    if let Some(b) = cli.global.budget {
        recipro::system::set_default_budget(b);
    }
    match run_command(&cli.command, &cli.global) {
        Ok(o) => {
            if cli.global.json {
                emit(&format!("{}\n", serde_json::to_string_pretty(&o.json()).expect("json")));
            } else {
                emit(&o.text());
            }
            if let Some(path) = &cli.global.tex {
                if let Err(e) = std::fs::write(path, o.latex()) {
                    return fail(&CliError::Io(format!("{}: {}", path.display(), e)), cli.global.json);
                }
            } else if matches!(cli.command, Command::Latex(_)) {
                emit(&o.latex());
            }
            if o.holds() {
                EXIT_OK
            } else {
                for f in o.failures() {
                    eprintln!("recipro: check-failed: {}", f);
                }
                EXIT_FAILED
            }
        }
        Err(e) => fail(&e, cli.global.json),
    }
}

/// Write to stdout; a closed pipe is not an error.
fn emit(s: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn fail(e: &CliError, json: bool) -> i32 {
    for (kind, message, line, col) in e.diagnostics() {
        match (line, col) {
            (Some(l), Some(c)) => eprintln!("recipro: error[{}] {}:{}: {}", kind, l, c, message),
            _ => eprintln!("recipro: error[{}]: {}", kind, message),
        }
        if json {
            let v = serde_json::json!({"schema": crate::report::SCHEMA, "error": {"kind": kind, "message": message, "line": line, "col": col}});
            emit(&format!("{}\n", v));
        }
    }
    e.exit_code()
}
