//! Jet spaces and total derivatives.

use crate::expr::parse::{Resolver, Suffix};
use crate::expr::{Atom, Expression, Jet, Poly, Symbol};
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JetError {
    #[error("name `{0}` is declared more than once")]
    DuplicateName(String),
    #[error("a jet space needs at least one independent variable, one field and order >= 1")]
    EmptySpace,
    #[error("differentiating `{jet}` exceeds the maximal jet order {order}")]
    OrderOverflow { jet: String, order: u32 },
    #[error("`{0}` is not an independent variable of the space")]
    UnknownVariable(String),
    #[error("`{0}` is not a field of the space")]
    UnknownField(String),
}

/// Independent variables, dependent fields, constant parameters and the
/// maximal jet order.
#[derive(Clone, PartialEq, Eq)]
pub struct JetSpace {
    indep: Vec<Symbol>,
    dep: Vec<Symbol>,
    params: Vec<Symbol>,
    order: u32,
}

pub const DEFAULT_ORDER: u32 = 4;

impl JetSpace {
    pub fn declare(indep: &[&str], dep: &[&str], order: u32) -> Result<JetSpace, JetError> {
        JetSpace::with_params(indep, dep, &[], order)
    }

    pub fn with_params(indep: &[&str], dep: &[&str], params: &[&str], order: u32) -> Result<JetSpace, JetError> {
        let sym = |v: &[&str]| v.iter().map(|s| Symbol::new(s)).collect::<Vec<_>>();
        JetSpace::from_symbols(sym(indep), sym(dep), sym(params), order)
    }

    pub fn from_symbols(
        indep: Vec<Symbol>,
        dep: Vec<Symbol>,
        params: Vec<Symbol>,
        order: u32,
    ) -> Result<JetSpace, JetError> {
        if indep.is_empty() || dep.is_empty() || order == 0 {
            return Err(JetError::EmptySpace);
        }
        let mut seen = std::collections::HashSet::new();
        for s in indep.iter().chain(&dep).chain(&params) {
            if !seen.insert(s.clone()) {
                return Err(JetError::DuplicateName(s.to_string()));
            }
        }
        Ok(JetSpace { indep, dep, params, order })
    }

    pub fn indep(&self) -> &[Symbol] {
        &self.indep
    }

    pub fn dep(&self) -> &[Symbol] {
        &self.dep
    }

    pub fn params(&self) -> &[Symbol] {
        &self.params
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn with_order(&self, order: u32) -> JetSpace {
        JetSpace { order, ..self.clone() }
    }

    pub fn is_indep(&self, s: &Symbol) -> bool {
        self.indep.contains(s)
    }

    pub fn is_field(&self, s: &Symbol) -> bool {
        self.dep.contains(s)
    }

    pub fn is_param(&self, s: &Symbol) -> bool {
        self.params.contains(s)
    }

    /// Union of two spaces (variables, fields and parameters in first-seen
    /// order, maximal order).
    pub fn merge(&self, other: &JetSpace) -> JetSpace {
        fn union(a: &[Symbol], b: &[Symbol]) -> Vec<Symbol> {
            let mut v = a.to_vec();
            v.extend(b.iter().filter(|s| !a.contains(s)).cloned());
            v
        }
        JetSpace {
            indep: union(&self.indep, &other.indep),
            dep: union(&self.dep, &other.dep),
            params: union(&self.params, &other.params),
            order: self.order.max(other.order),
        }
    }

    pub fn add_fields(&self, fields: &[&str]) -> Result<JetSpace, JetError> {
        let mut dep = self.dep.clone();
        dep.extend(fields.iter().map(|s| Symbol::new(s)));
        JetSpace::from_symbols(self.indep.clone(), dep, self.params.clone(), self.order)
    }

    pub fn add_params(&self, params: &[&str]) -> Result<JetSpace, JetError> {
        let mut p = self.params.clone();
        p.extend(params.iter().map(|s| Symbol::new(s)));
        JetSpace::from_symbols(self.indep.clone(), self.dep.clone(), p, self.order)
    }

    /// Number of jet coordinates per field, C(n+p, p).
    pub fn jets_per_field(&self) -> usize {
        let n = self.indep.len() as u64;
        let p = self.order as u64;
        let mut c: u64 = 1;
        for i in 1..=p {
            c = c * (n + i) / i;
        }
        c as usize
    }

    /// All jets of `field` with order at most `max`.
    pub fn jets_of(&self, field: &Symbol, max: u32) -> Vec<Jet> {
        let mut out = vec![Jet::plain(field.clone())];
        let mut frontier = out.clone();
        for _ in 0..max.min(self.order) {
            let mut next = Vec::new();
            for j in &frontier {
                for x in &self.indep {
                    let b = j.bump(x);
                    if !next.contains(&b) {
                        next.push(b);
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    pub fn var(&self, name: &str) -> Result<Atom, JetError> {
        let s = Symbol::new(name);
        if self.is_indep(&s) {
            Ok(Atom::Indep(s))
        } else {
            Err(JetError::UnknownVariable(name.into()))
        }
    }

    pub fn field(&self, name: &str) -> Result<Atom, JetError> {
        self.jet(name, &[])
    }

    pub fn jet(&self, field: &str, derivs: &[(&str, u32)]) -> Result<Atom, JetError> {
        let f = Symbol::new(field);
        if !self.is_field(&f) {
            return Err(JetError::UnknownField(field.into()));
        }
        for (v, _) in derivs {
            if !self.is_indep(&Symbol::new(v)) {
                return Err(JetError::UnknownVariable(v.to_string()));
            }
        }
        let j = Jet::new(f, derivs.iter().map(|(v, c)| (Symbol::new(v), *c)));
        if j.order() > self.order {
            return Err(JetError::OrderOverflow { jet: j.name_with(Some(&self.indep)), order: self.order });
        }
        Ok(Atom::Jet(j))
    }

    pub fn param(&self, name: &str) -> Result<Atom, JetError> {
        let s = Symbol::new(name);
        if self.is_param(&s) {
            Ok(Atom::Param(s))
        } else {
            Err(JetError::UnknownField(name.into()))
        }
    }

    /// Total derivative of a single atom.
    pub fn atom_derivative(&self, a: &Atom, x: &Symbol) -> Result<Expression, JetError> {
        Ok(match a {
            Atom::Indep(s) => {
                if s == x {
                    Expression::one()
                } else {
                    Expression::zero()
                }
            }
            Atom::Param(_) | Atom::Imag => Expression::zero(),
            Atom::Jet(j) => {
                if !self.is_field(&j.field) {
                    return Err(JetError::UnknownField(j.field.to_string()));
                }
                if j.order() >= self.order {
                    return Err(JetError::OrderOverflow {
                        jet: j.name_with(Some(&self.indep)),
                        order: self.order,
                    });
                }
                Expression::atom(Atom::Jet(j.bump(x)))
            }
            Atom::Pow { base, exp } => {
                let b = Atom::Jet(Jet::plain(base.clone()));
                let db = self.atom_derivative(&b, x)?;
                if db.is_zero() {
                    return Ok(db);
                }
                Expression::atom(Atom::Param(exp.clone())) * Expression::atom(a.clone()) * db
                    / Expression::atom(b)
            }
            Atom::Sqrt(inner) => {
                let d = self.atom_derivative(inner, x)?;
                if d.is_zero() {
                    return Ok(d);
                }
                d * Expression::atom(a.clone()) / (Expression::atom((**inner).clone()) * 2)
            }
        })
    }

    fn poly_derivative(
        &self,
        p: &Poly,
        x: &Symbol,
        memo: &mut HashMap<Atom, Expression>,
    ) -> Result<Expression, JetError> {
        let mut acc = Expression::zero();
        for a in p.vars() {
            let da = match memo.get(a) {
                Some(d) => d.clone(),
                None => {
                    let d = self.atom_derivative(a, x)?;
                    memo.insert(a.clone(), d.clone());
                    d
                }
            };
            if da.is_zero() {
                continue;
            }
            acc = acc + Expression::from_poly(p.partial(a)) * da;
        }
        Ok(acc)
    }

    /// D_x e by the chain rule over jet atoms plus explicit x-dependence.
    pub fn total_derivative(&self, e: &Expression, x: &Symbol) -> Result<Expression, JetError> {
        if !self.is_indep(x) {
            return Err(JetError::UnknownVariable(x.to_string()));
        }
        let mut memo = HashMap::new();
        let dn = self.poly_derivative(e.num(), x, &mut memo)?;
        if e.den().is_one() {
            return Ok(dn);
        }
        let dd = self.poly_derivative(e.den(), x, &mut memo)?;
        if dd.is_zero() {
            return Ok(dn / Expression::from_poly(e.den().clone()));
        }
        let den = Expression::from_poly(e.den().clone());
        let num = Expression::from_poly(e.num().clone());
        Ok((dn * &den - num * dd) / (&den * &den))
    }

    /// Repeated total derivative along a multi-index.
    pub fn derivative_along(&self, e: &Expression, derivs: &[(Symbol, u32)]) -> Result<Expression, JetError> {
        let mut r = e.clone();
        for (x, c) in derivs {
            for _ in 0..*c {
                r = self.total_derivative(&r, x)?;
            }
        }
        Ok(r)
    }

    pub fn d(&self, e: &Expression, x: &str) -> Result<Expression, JetError> {
        self.total_derivative(e, &Symbol::new(x))
    }

    /// Split a run of letters into declared independent variables, if the
    /// split is unique.
    pub fn split_word(&self, w: &str) -> Option<Vec<Symbol>> {
        fn go(sp: &JetSpace, w: &str, acc: &mut Vec<Symbol>, out: &mut Vec<Vec<Symbol>>) {
            if w.is_empty() {
                out.push(acc.clone());
                return;
            }
            for v in &sp.indep {
                if let Some(rest) = w.strip_prefix(v.as_str()) {
                    acc.push(v.clone());
                    go(sp, rest, acc, out);
                    acc.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, w, &mut Vec::new(), &mut out);
        if out.len() == 1 {
            out.pop()
        } else {
            None
        }
    }
}

impl Resolver for JetSpace {
    fn resolve(&self, name: &str, suffix: &Suffix) -> Result<Atom, String> {
        let s = Symbol::new(name);
        let derivs: Vec<(Symbol, u32)> = match suffix {
            Suffix::None => {
                if self.is_indep(&s) {
                    return Ok(Atom::Indep(s));
                }
                if self.is_param(&s) {
                    return Ok(Atom::Param(s));
                }
                Vec::new()
            }
            Suffix::Word(w) => self
                .split_word(w)
                .ok_or_else(|| format!("cannot split `{}` into independent variables", w))?
                .into_iter()
                .map(|v| (v, 1))
                .collect(),
            Suffix::List(l) => l.iter().map(|(v, c)| (Symbol::new(v), *c)).collect(),
        };
        if !self.is_field(&s) {
            return Err(format!("unknown name `{}`", name));
        }
        for (v, _) in &derivs {
            if !self.is_indep(v) {
                return Err(format!("`{}` is not an independent variable", v));
            }
        }
        let j = Jet::new(s, derivs);
        if j.order() > self.order {
            return Err(format!("jet order {} exceeds the space order {}", j.order(), self.order));
        }
        Ok(Atom::Jet(j))
    }

    fn pow_atom(&self, base: &Atom, exp: &str) -> Result<Atom, String> {
        if !self.is_param(&Symbol::new(exp)) {
            return Err(format!("symbolic exponent `{}` is not a declared parameter", exp));
        }
        match base {
            Atom::Jet(j) if j.derivs().is_empty() => Ok(Atom::Pow { base: j.field.clone(), exp: Symbol::new(exp) }),
            _ => Err("symbolic exponents apply only to undifferentiated fields".into()),
        }
    }
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetSpace(indep {:?}, dep {:?}, params {:?}, order {})", self.indep, self.dep, self.params, self.order)
    }
}

/// Convenience: `declare(independents, dependents, p)`.
pub fn declare(indep: &[&str], dep: &[&str], p: u32) -> Result<JetSpace, JetError> {
    JetSpace::declare(indep, dep, p)
}

pub fn total_derivative(space: &JetSpace, e: &Expression, x: &str) -> Result<Expression, JetError> {
    space.d(e, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse_expression;

    #[test]
    fn jet_counts() {
        let s = declare(&["x", "y"], &["u"], 2).unwrap();
        assert_eq!(s.jets_per_field(), 6);
        assert_eq!(s.jets_of(&Symbol::new("u"), 2).len(), 6);
        let s = declare(&["x"], &["u"], 1).unwrap();
        assert_eq!(s.jets_of(&Symbol::new("u"), 1).len(), 2);
        assert_eq!(declare(&["x", "y"], &["x"], 2), Err(JetError::DuplicateName("x".into())));
    }

    #[test]
    fn leibniz_and_commutation() {
        let s = declare(&["X", "Y", "T"], &["U", "P", "Delta", "Omega1"], 4).unwrap();
        let p = s.field("P").unwrap();
        let e = Expression::atom(p.clone()).pow(2).unwrap();
        let px = Expression::atom(s.jet("P", &[("X", 1)]).unwrap());
        assert_eq!(s.d(&e, "X").unwrap(), Expression::atom(p.clone()) * &px * 2);
        let u = Expression::atom(s.field("U").unwrap());
        let a = s.d(&s.d(&(&u / (&u + 1)), "Y").unwrap(), "X").unwrap();
        let b = s.d(&s.d(&(&u / (&u + 1)), "X").unwrap(), "Y").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn overflow_and_unknowns() {
        let s = declare(&["x"], &["u"], 1).unwrap();
        let ux = Expression::atom(s.jet("u", &[("x", 1)]).unwrap());
        assert!(matches!(s.d(&ux, "x"), Err(JetError::OrderOverflow { .. })));
        assert!(matches!(s.d(&ux, "t"), Err(JetError::UnknownVariable(_))));
        assert_eq!(s.d(&Expression::atom(s.var("x").unwrap()), "x").unwrap(), Expression::one());
    }

    #[test]
    fn parsing_in_space() {
        let s = JetSpace::with_params(&["x", "y", "t"], &["u", "lambda"], &["k"], 4).unwrap();
        assert_eq!(
            parse_expression("u_xxy", &s).unwrap(),
            Expression::atom(s.jet("u", &[("x", 2), ("y", 1)]).unwrap())
        );
        assert!(parse_expression("w_x", &s).is_err());
        let e = parse_expression("u^k", &s).unwrap();
        let d = s.d(&e, "x").unwrap();
        assert_eq!(d, parse_expression("k*u^k*u_x/u", &s).unwrap());
        let r = parse_expression("sqrt(lambda)", &s).unwrap();
        assert_eq!(s.d(&r, "t").unwrap(), parse_expression("lambda_t*sqrt(lambda)/(2*lambda)", &s).unwrap());
    }
}
