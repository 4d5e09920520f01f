//! Numeric cross-checks of symbolic zero verdicts.
//!
//! Irreducible jets, parameters and variables get random values; every
//! reducible jet gets the value of its normal form. An expression that
//! reduces to zero must then evaluate to zero before any reduction.

use crate::expr::{Assignment, Atom, ExprError, Expression};
use crate::expr::Q;
use crate::system::{solve_leading, Check, ConservedPair, OneForm, PDESystem, Report, SolvedSystem, SystemError};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;
pub const DEFAULT_SAMPLES: usize = 10;
pub const DEFAULT_TOL: f64 = 1e-6;

const MAX_RETRIES: usize = 50;

/// The seed from `RECIPRO_SEED`, or the default.
pub fn seed_from_env() -> u64 {
    std::env::var("RECIPRO_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NumericCheck {
    pub samples: usize,
    pub max_abs: f64,
    pub tol: f64,
}

impl NumericCheck {
    pub fn holds(&self) -> bool {
        self.samples > 0 && self.max_abs < self.tol
    }
}

struct Sampler<'a> {
    s: &'a SolvedSystem,
    rng: ChaCha8Rng,
}

impl Sampler<'_> {
    fn fill(&mut self, e: &Expression, a: &mut Assignment) -> Result<(), SystemError> {
        for atom in e.atoms() {
            self.fill_atom(&atom, a)?;
        }
        Ok(())
    }

    fn fill_atom(&mut self, atom: &Atom, a: &mut Assignment) -> Result<(), SystemError> {
        if a.has(atom) {
            return Ok(());
        }
        match atom {
            Atom::Imag => {}
            Atom::Sqrt(x) => self.fill_atom(x, a)?,
            Atom::Pow { base, exp } => {
                self.fill_atom(&Atom::field(base.as_str()), a)?;
                self.fill_atom(&Atom::Param(exp.clone()), a)?;
            }
            Atom::Jet(j) if self.s.is_reducible(j) => {
                let v = self.s.reduce_jet(j)?;
                self.fill(&v, a)?;
                let z = a.eval_complex(&v)?;
                a.set_complex(atom.clone(), z);
            }
            _ => {
                let v: f64 = self.rng.gen_range(0.5..1.5);
                a.set(atom.clone(), v);
            }
        }
        Ok(())
    }
}

/// Evaluate `e` at `samples` rule-consistent random points.
pub fn sample_zero(e: &Expression, s: &SolvedSystem, samples: usize, seed: u64, tol: f64) -> Result<NumericCheck, SystemError> {
    let mut sm = Sampler { s, rng: ChaCha8Rng::seed_from_u64(seed) };
    let mut max_abs: f64 = 0.0;
    let mut done = 0;
    let mut retries = 0;
    while done < samples {
        let mut a = Assignment::new();
        let r: Result<Complex64, SystemError> = sm.fill(e, &mut a).and_then(|_| Ok(a.eval_complex(e)?));
        match r {
            Ok(z) => {
                max_abs = max_abs.max(z.norm());
                done += 1;
            }
            Err(SystemError::Expr(ExprError::NumericPole(_))) if retries < MAX_RETRIES => retries += 1,
            Err(err) => return Err(err),
        }
    }
    Ok(NumericCheck { samples: done, max_abs, tol })
}

fn push(rep: &mut Report, name: &str, c: NumericCheck) {
    let r = Expression::constant(Q::from_float(c.max_abs).unwrap_or_default());
    rep.push(Check::expecting(&format!("numeric {} (max |r| = {:.1e})", name, c.max_abs), r, c.holds(), c.samples));
}

/// Numeric counterpart of `systems_equivalent`.
pub fn equivalence(a: &PDESystem, b: &PDESystem, samples: usize, seed: u64, tol: f64) -> Result<Report, SystemError> {
    let ranking = a.default_ranking();
    let sa = solve_leading(a, &ranking)?;
    let sb = solve_leading(b, &ranking)?;
    let mut rep = Report::new(&format!("numeric {} <=> {}", a.name, b.name));
    for (from, modulo, tag) in [(a, &sb, "=>"), (b, &sa, "<=")] {
        for eq in &from.equations {
            push(&mut rep, &format!("{} {}", tag, eq.name), sample_zero(&eq.residual(), modulo, samples, seed, tol)?);
        }
    }
    Ok(rep)
}

/// Each named expression vanishes at rule-consistent points of `s`.
pub fn vanishing(name: &str, exprs: &[(String, Expression)], s: &SolvedSystem, samples: usize, seed: u64, tol: f64) -> Result<Report, SystemError> {
    let mut rep = Report::new(name);
    for (n, e) in exprs {
        push(&mut rep, n, sample_zero(e, s, samples, seed, tol)?);
    }
    Ok(rep)
}

/// Numeric counterpart of `verify_conserved`.
pub fn conserved(pair: &ConservedPair, s: &SolvedSystem, samples: usize, seed: u64, tol: f64) -> Result<Report, SystemError> {
    let sp = s.space();
    let e = sp.total_derivative(&pair.a, &pair.var)? - sp.total_derivative(&pair.a_prime, &pair.var_prime)?;
    vanishing("numeric conserved", &[(format!("D_{} A - D_{} A'", pair.var, pair.var_prime), e)], s, samples, seed, tol)
}

/// Numeric counterpart of `verify_closed`.
pub fn closed(form: &OneForm, s: &SolvedSystem, samples: usize, seed: u64, tol: f64) -> Result<Report, SystemError> {
    let sp = s.space();
    let mut exprs = Vec::new();
    for (i, (a, ca)) in form.coeffs.iter().enumerate() {
        for (b, cb) in &form.coeffs[i + 1..] {
            exprs.push((format!("({},{})", a, b), sp.total_derivative(cb, a)? - sp.total_derivative(ca, b)?));
        }
    }
    vanishing(&format!("numeric closed d{}", form.target), &exprs, s, samples, seed, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetspace::JetSpace;
    use crate::system::{PDESystem, Ranking};

    #[test]
    fn consistent_points() {
        let sp = JetSpace::declare(&["x", "t"], &["u"], 4).unwrap();
        let mut sys = PDESystem::new("burgers", &sp);
        sys.push_text("b", "u_t = u*u_x").unwrap();
        let s = crate::system::solve_leading(&sys, &Ranking::for_space(&sp)).unwrap();
        let e = crate::expr::parse::parse_expression("u_xt - u_x^2 - u*u_xx", &sp).unwrap();
        assert!(sample_zero(&e, &s, 10, 1, DEFAULT_TOL).unwrap().holds());
        let bad = crate::expr::parse::parse_expression("u_xt - u*u_xx", &sp).unwrap();
        assert!(!sample_zero(&bad, &s, 10, 1, DEFAULT_TOL).unwrap().holds());
    }
}
