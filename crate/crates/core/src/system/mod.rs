//! PDE systems, solved forms, reduction and conservation checks.

pub mod conserve;
pub mod linalg;
pub mod ranking;
pub mod solved;

pub use conserve::{search_conserved, ConservedSpace};
pub use ranking::Ranking;
pub use solved::{default_budget, set_default_budget, solve_leading, Rule, SolvedSystem, DEFAULT_BUDGET};

use crate::expr::parse::{parse_expression, ParseError};
use crate::expr::{render, Atom, ExprError, Expression, Symbol};
use crate::jetspace::{JetError, JetSpace};
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SystemError {
    #[error("equation `{equation}` is not solvable for its leading jet: {reason}")]
    NotSolvable { equation: String, reason: String },
    #[error("reduction exceeded the rewrite budget of {budget}")]
    NonTermination { budget: usize },
    #[error("invalid conserved pair: {0}")]
    InvalidPair(String),
    #[error("invalid one-form: {0}")]
    InvalidForm(String),
    #[error("ansatz has {0} unknowns, more than the limit of 10000")]
    AnsatzTooLarge(usize),
    #[error("systems live in different jet spaces")]
    SpaceMismatch,
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl SystemError {
    /// Whether the error is an exhausted rewrite budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, SystemError::NonTermination { .. })
    }
}

/// An equation `lhs = rhs`, understood as `lhs - rhs = 0`.
#[derive(Clone, PartialEq)]
pub struct Equation {
    pub name: String,
    pub lhs: Expression,
    pub rhs: Expression,
}

impl Equation {
    pub fn new(name: &str, lhs: Expression, rhs: Expression) -> Equation {
        Equation { name: name.to_string(), lhs, rhs }
    }

    pub fn zero(name: &str, residual: Expression) -> Equation {
        Equation::new(name, residual, Expression::zero())
    }

    pub fn residual(&self) -> Expression {
        &self.lhs - &self.rhs
    }
}

impl fmt::Debug for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} = {}", self.name, self.lhs, self.rhs)
    }
}

/// A named system of equations over a jet space. Auxiliary relations take
/// part in reduction but are not themselves claims to be verified.
#[derive(Clone, Debug, PartialEq)]
pub struct PDESystem {
    pub name: String,
    pub space: JetSpace,
    pub equations: Vec<Equation>,
    pub aux: Vec<Equation>,
    /// Free-form provenance, e.g. which relations a transformation used.
    pub notes: Vec<String>,
    /// Fields ranked above all others when solving.
    pub eliminate: Vec<Symbol>,
}

impl PDESystem {
    pub fn new(name: &str, space: &JetSpace) -> PDESystem {
        PDESystem {
            name: name.to_string(),
            space: space.clone(),
            equations: Vec::new(),
            aux: Vec::new(),
            notes: Vec::new(),
            eliminate: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, lhs: Expression, rhs: Expression) {
        self.equations.push(Equation::new(name, lhs, rhs));
    }

    pub fn push_aux(&mut self, name: &str, lhs: Expression, rhs: Expression) {
        self.aux.push(Equation::new(name, lhs, rhs));
    }

    /// Add an equation given as text `lhs = rhs` (or a bare residual).
    pub fn push_text(&mut self, name: &str, text: &str) -> Result<(), SystemError> {
        let eq = parse_equation(name, text, &self.space)?;
        self.equations.push(eq);
        Ok(())
    }

    pub fn push_aux_text(&mut self, name: &str, text: &str) -> Result<(), SystemError> {
        let eq = parse_equation(name, text, &self.space)?;
        self.aux.push(eq);
        Ok(())
    }

    pub fn residuals(&self) -> Vec<Expression> {
        self.equations.iter().map(Equation::residual).collect()
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn default_ranking(&self) -> Ranking {
        let r = Ranking::for_space(&self.space);
        if self.eliminate.is_empty() {
            r
        } else {
            r.eliminating(&self.eliminate)
        }
    }

    pub fn solve(&self) -> Result<SolvedSystem, SystemError> {
        solve_leading(self, &self.default_ranking())
    }

    /// Atoms that do not belong to the space, if any.
    pub fn foreign_atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        for eq in self.equations.iter().chain(&self.aux) {
            for a in eq.lhs.atoms().into_iter().chain(eq.rhs.atoms()) {
                let ok = match &a {
                    Atom::Indep(s) => self.space.is_indep(s),
                    Atom::Param(s) => self.space.is_param(s),
                    Atom::Jet(j) => {
                        self.space.is_field(&j.field)
                            && j.derivs().iter().all(|(v, _)| self.space.is_indep(v))
                            && j.order() <= self.space.order()
                    }
                    Atom::Pow { base, exp } => self.space.is_field(base) && self.space.is_param(exp),
                    Atom::Sqrt(x) => x.as_jet().map_or(true, |j| self.space.is_field(&j.field)),
                    Atom::Imag => true,
                };
                if !ok && !out.contains(&a) {
                    out.push(a);
                }
            }
        }
        out
    }
}

pub fn parse_equation(name: &str, text: &str, space: &JetSpace) -> Result<Equation, SystemError> {
    match text.split_once('=') {
        Some((l, r)) => {
            let lhs = parse_expression(l, space)?;
            let rhs = parse_expression(r, space).map_err(|mut e| {
                e.pos += l.len() + 1;
                e
            })?;
            Ok(Equation::new(name, lhs, rhs))
        }
        None => Ok(Equation::zero(name, parse_expression(text, space)?)),
    }
}

/// `D_var a = D_var_prime a_prime`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservedPair {
    pub a: Expression,
    pub var: Symbol,
    pub a_prime: Expression,
    pub var_prime: Symbol,
}

impl ConservedPair {
    pub fn new(a: Expression, var: &str, a_prime: Expression, var_prime: &str) -> Result<ConservedPair, SystemError> {
        if var == var_prime {
            return Err(SystemError::InvalidPair(format!("both derivatives are along `{}`", var)));
        }
        if a == a_prime {
            return Err(SystemError::InvalidPair("density and flux coincide".into()));
        }
        Ok(ConservedPair { a, var: Symbol::new(var), a_prime, var_prime: Symbol::new(var_prime) })
    }
}

/// `dz = Σ c_i dx_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    pub target: Symbol,
    pub coeffs: Vec<(Symbol, Expression)>,
}

impl OneForm {
    pub fn new(target: &str, coeffs: Vec<(&str, Expression)>) -> Result<OneForm, SystemError> {
        if coeffs.iter().all(|(_, c)| c.is_zero()) {
            return Err(SystemError::InvalidForm("all coefficients vanish".into()));
        }
        Ok(OneForm { target: Symbol::new(target), coeffs: coeffs.into_iter().map(|(v, c)| (Symbol::new(v), c)).collect() })
    }

    pub fn coeff(&self, v: &Symbol) -> Expression {
        self.coeffs.iter().find(|(w, _)| w == v).map_or_else(Expression::zero, |(_, c)| c.clone())
    }
}

impl fmt::Display for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}) d{}", c, v)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// One residual check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: Expression,
    pub holds: bool,
    pub rewrite_count: usize,
}

impl Check {
    pub fn new(name: &str, residual: Expression, rewrite_count: usize) -> Check {
        Check { name: name.to_string(), holds: residual.is_zero(), residual, rewrite_count }
    }

    /// A check whose verdict is not "residual is zero" (negative controls).
    pub fn expecting(name: &str, residual: Expression, holds: bool, rewrite_count: usize) -> Check {
        Check { name: name.to_string(), holds, residual, rewrite_count }
    }

    pub fn residual_latex(&self) -> String {
        render::to_latex(&self.residual)
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Report {
    pub name: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(name: &str) -> Report {
        Report { name: name.to_string(), checks: Vec::new() }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: Report) {
        let prefix = other.name;
        for mut c in other.checks {
            c.name = format!("{}/{}", prefix, c.name);
            self.checks.push(c);
        }
    }

    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn residual(&self) -> Expression {
        self.checks.iter().find(|c| !c.residual.is_zero()).map_or_else(Expression::zero, |c| c.residual.clone())
    }

    pub fn rewrite_count(&self) -> usize {
        self.checks.iter().map(|c| c.rewrite_count).sum()
    }
}

pub fn verify_conserved(pair: &ConservedPair, s: &SolvedSystem) -> Result<Report, SystemError> {
    let sp = s.space();
    let lhs = sp.total_derivative(&pair.a, &pair.var)?;
    let rhs = sp.total_derivative(&pair.a_prime, &pair.var_prime)?;
    let (r, n) = s.reduce_counted(&(lhs - rhs))?;
    let mut rep = Report::new("conserved");
    rep.push(Check::new(&format!("D_{} A - D_{} A'", pair.var, pair.var_prime), r, n));
    Ok(rep)
}

/// One check per unordered pair of variables of the form.
pub fn verify_closed(form: &OneForm, s: &SolvedSystem) -> Result<Report, SystemError> {
    let sp = s.space();
    let mut rep = Report::new(&format!("closed d{}", form.target));
    for (i, (a, ca)) in form.coeffs.iter().enumerate() {
        for (b, cb) in &form.coeffs[i + 1..] {
            let r = sp.total_derivative(cb, a)? - sp.total_derivative(ca, b)?;
            let (r, n) = s.reduce_counted(&r)?;
            rep.push(Check::new(&format!("({},{})", a, b), r, n));
        }
    }
    Ok(rep)
}

/// Every equation of each system reduces to zero modulo the other.
pub fn systems_equivalent(a: &PDESystem, b: &PDESystem) -> Result<Report, SystemError> {
    systems_equivalent_with(a, b, &a.default_ranking())
}

pub fn systems_equivalent_with(a: &PDESystem, b: &PDESystem, ranking: &Ranking) -> Result<Report, SystemError> {
    if a.space.indep() != b.space.indep() {
        return Err(SystemError::SpaceMismatch);
    }
    let mut rep = Report::new(&format!("{} <=> {}", a.name, b.name));
    let sa = solve_leading(a, ranking)?;
    let sb = solve_leading(b, ranking)?;
    for (from, modulo, tag) in [(a, &sb, "=>"), (b, &sa, "<=")] {
        for eq in &from.equations {
            let (r, n) = modulo.reduce_counted(&eq.residual())?;
            rep.push(Check::new(&format!("{} {}", tag, eq.name), r, n));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chh1() -> PDESystem {
        let sp = JetSpace::declare(&["X", "Y", "T"], &["P", "Delta", "Omega1"], 5).unwrap();
        let mut s = PDESystem::new("chh1", &sp);
        s.push_text("e1", "P_Y = -1/2*(P_X*Omega1 + P*Omega1_X)").unwrap();
        s
    }

    #[test]
    fn parse_equations() {
        let s = chh1();
        assert_eq!(s.len(), 1);
        assert!(s.foreign_atoms().is_empty());
    }

    #[test]
    fn conserved_and_closed() {
        let s = chh1();
        let solved = s.solve().unwrap();
        let sp = &s.space;
        let p = Expression::atom(sp.field("P").unwrap());
        let o = Expression::atom(sp.field("Omega1").unwrap());
        let pair = ConservedPair::new(p.clone(), "Y", -(&p * &o) / 2, "X").unwrap();
        assert!(verify_conserved(&pair, &solved).unwrap().holds());
        let form = OneForm::new("z", vec![("X", p.clone()), ("Y", -(&p * &o) / 2)]).unwrap();
        let rep = verify_closed(&form, &solved).unwrap();
        assert_eq!(rep.checks.len(), 1);
        assert!(rep.holds());
        let bad = OneForm::new("z", vec![("X", o.clone()), ("Y", o.clone())]).unwrap();
        assert!(!verify_closed(&bad, &solved).unwrap().holds());
        assert!(ConservedPair::new(p.clone(), "X", p.clone(), "Y").is_err());
    }

    #[test]
    fn equivalence_is_reflexive() {
        let s = chh1();
        assert!(systems_equivalent(&s, &s).unwrap().holds());
    }
}
