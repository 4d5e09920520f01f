//! Exact expression kernel.
//!
//! An [`Expression`] is a rational function over [`Atom`]s in canonical form:
//! coprime numerator and denominator, monic denominator, algebraic generators
//! (`I`, square roots) reduced by their defining relations and removed from
//! the denominator. Structural equality is mathematical equality.

pub mod atom;
pub mod eval;
pub mod gcd;
pub mod parse;
pub mod poly;
pub mod render;
pub mod tree;

pub use atom::{Atom, Jet, Symbol};
pub use eval::Assignment;
pub use poly::{q, qr, Poly, Q};
pub use tree::ExprTree;

use gcd::gcd;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeSet, HashMap};
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("denominator normalizes to the zero polynomial")]
    DivisionByZero,
    #[error("no value assigned to atom `{0}`")]
    MissingAtom(String),
    #[error("denominator magnitude {0:e} is below the pole threshold")]
    NumericPole(f64),
    #[error("value has imaginary part {0:e}")]
    NonReal(f64),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expression {
    num: Poly,
    den: Poly,
}

fn radicand(g: &Atom) -> Poly {
    match g {
        Atom::Imag => Poly::constant(-Q::one()),
        Atom::Sqrt(a) => Poly::atom((**a).clone()),
        _ => unreachable!("not an algebraic generator"),
    }
}

fn has_generator(p: &Poly) -> bool {
    p.vars().iter().any(Atom::is_generator)
}

/// Apply g² = radicand for every generator g.
fn reduce_generators(p: &Poly) -> Poly {
    if !p.vars().iter().any(Atom::is_generator) {
        return p.clone();
    }
    let gens: Vec<(usize, Poly)> = p
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.is_generator())
        .map(|(k, a)| (k, radicand(a)))
        .collect();
    if p.terms().iter().all(|t| gens.iter().all(|(k, _)| t.exps[*k] < 2)) {
        return p.clone();
    }
    let mut out = Poly::zero();
    for t in p.terms() {
        let mut exps = t.exps.to_vec();
        let mut factor = Poly::one();
        for (k, r) in &gens {
            let e = exps[*k];
            if e >= 2 {
                factor = factor.mul(&r.pow(e / 2));
                exps[*k] = e % 2;
            }
        }
        let mono = Poly::from_terms(
            p.vars().to_vec().into(),
            vec![poly::Term { exps: exps.into(), coeff: t.coeff.clone() }],
        );
        out = out.add(&mono.mul(&factor));
    }
    // radicands are generator-free except for nested roots, so one more pass suffices
    reduce_generators_once(&out)
}

fn reduce_generators_once(p: &Poly) -> Poly {
    if p.terms().iter().any(|t| {
        p.vars().iter().zip(t.exps.iter()).any(|(a, e)| a.is_generator() && *e >= 2)
    }) {
        reduce_generators(p)
    } else {
        p.clone()
    }
}

impl Expression {
    pub fn zero() -> Self {
        Expression { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        Expression { num: Poly::one(), den: Poly::one() }
    }

    pub fn constant(c: Q) -> Self {
        Expression { num: Poly::constant(c), den: Poly::one() }
    }

    pub fn int(n: i64) -> Self {
        Expression::constant(q(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Expression::constant(qr(n, d))
    }

    pub fn atom(a: Atom) -> Self {
        Expression::from_poly(Poly::atom(a))
    }

    pub fn imag() -> Self {
        Expression::atom(Atom::Imag)
    }

    /// Square root of an atom as an algebraic generator.
    pub fn sqrt_of(a: Atom) -> Self {
        Expression::atom(Atom::Sqrt(Box::new(a)))
    }

    pub fn from_poly(p: Poly) -> Self {
        Expression { num: reduce_generators(&p), den: Poly::one() }
    }

    /// Canonical form of `num / den`.
    pub fn from_fraction(num: Poly, den: Poly) -> Result<Self, ExprError> {
        let mut num = reduce_generators(&num);
        let mut den = reduce_generators(&den);
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        while let Some(g) = den.vars().iter().find(|a| a.is_generator()).cloned() {
            let cs = den.coeffs_in(&g);
            let a = cs[0].clone();
            let b = cs.get(1).cloned().unwrap_or_else(Poly::zero);
            let conj = a.sub(&b.mul(&Poly::atom(g.clone())));
            num = reduce_generators(&num.mul(&conj));
            den = reduce_generators(&a.mul(&a).sub(&b.mul(&b).mul(&radicand(&g))));
            if den.is_zero() {
                return Err(ExprError::DivisionByZero);
            }
        }
        if num.is_zero() {
            return Ok(Expression::zero());
        }
        let g = gcd(&num, &den);
        if !g.is_one() {
            num = num.div_exact(&g).expect("gcd divides numerator");
            den = den.div_exact(&g).expect("gcd divides denominator");
        }
        let lc = den.lc();
        if !lc.is_one() {
            let inv = lc.recip();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        Ok(Expression { num, den })
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.num.vars().iter().chain(self.den.vars().iter()).cloned().collect()
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.num.contains(a) || self.den.contains(a)
    }

    /// Jet atoms, including those hidden inside square roots.
    pub fn jets(&self) -> BTreeSet<Jet> {
        let mut out = BTreeSet::new();
        for a in self.atoms() {
            if let Some(j) = a.depends_on_jet() {
                out.insert(j.clone());
            }
            if let Atom::Pow { base, .. } = &a {
                out.insert(Jet::plain(base.clone()));
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        Expression { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn add(&self, o: &Expression) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && o.den.is_one() {
            return Expression { num: self.num.add(&o.num), den: Poly::one() };
        }
        if self.den == o.den {
            let num = self.num.add(&o.num);
            return Expression::cancel(num, self.den.clone());
        }
        let g = gcd(&self.den, &o.den);
        let d1 = self.den.div_exact(&g).expect("gcd divides");
        let d2 = o.den.div_exact(&g).expect("gcd divides");
        let num = self.num.mul(&d2).add(&o.num.mul(&d1));
        let den = d1.mul(&o.den);
        if num.is_zero() {
            return Expression::zero();
        }
        if g.is_one() {
            return Expression { num, den };
        }
        let g2 = gcd(&num, &g);
        if g2.is_one() {
            return Expression { num, den };
        }
        Expression {
            num: num.div_exact(&g2).expect("gcd divides"),
            den: den.div_exact(&g2).expect("gcd divides"),
        }
    }

    fn cancel(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Expression::zero();
        }
        let g = gcd(&num, &den);
        if g.is_one() {
            return Expression { num, den };
        }
        let den = den.div_exact(&g).expect("gcd divides");
        let num = num.div_exact(&g).expect("gcd divides");
        let lc = den.lc();
        if lc.is_one() {
            Expression { num, den }
        } else {
            let inv = lc.recip();
            Expression { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn sub(&self, o: &Expression) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Expression) -> Self {
        if self.is_zero() || o.is_zero() {
            return Expression::zero();
        }
        if has_generator(&self.num) && has_generator(&o.num) {
            return Expression::from_fraction(self.num.mul(&o.num), self.den.mul(&o.den))
                .expect("product of nonzero denominators");
        }
        let g1 = gcd(&self.num, &o.den);
        let g2 = gcd(&o.num, &self.den);
        let n1 = self.num.div_exact(&g1).expect("gcd divides");
        let d2 = o.den.div_exact(&g1).expect("gcd divides");
        let n2 = o.num.div_exact(&g2).expect("gcd divides");
        let d1 = self.den.div_exact(&g2).expect("gcd divides");
        Expression { num: n1.mul(&n2), den: d1.mul(&d2) }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Expression::zero();
        }
        Expression { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn inv(&self) -> Result<Self, ExprError> {
        if self.num.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if has_generator(&self.num) {
            return Expression::from_fraction(self.den.clone(), self.num.clone());
        }
        let lc = self.num.lc().recip();
        Ok(Expression { num: self.den.scale(&lc), den: self.num.scale(&lc) })
    }

    pub fn checked_div(&self, o: &Expression) -> Result<Self, ExprError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: i32) -> Result<Self, ExprError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let n = e.unsigned_abs();
        if has_generator(&base.num) {
            let mut r = Expression::one();
            for _ in 0..n {
                r = r.mul(&base);
            }
            return Ok(r);
        }
        Ok(Expression { num: base.num.pow(n), den: base.den.pow(n) })
    }

    /// Simultaneous substitution of atoms by expressions.
    pub fn substitute(&self, map: &HashMap<Atom, Expression>) -> Result<Self, ExprError> {
        if map.is_empty() || !self.atoms().iter().any(|a| map.contains_key(a)) {
            return Ok(self.clone());
        }
        let (n1, d1) = subst_poly(&self.num, map);
        if self.den.is_one() {
            return Expression::from_fraction(n1, d1);
        }
        let (n2, d2) = subst_poly(&self.den, map);
        if n2.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Expression::from_fraction(n1.mul(&d2), d1.mul(&n2))
    }

    pub fn substitute_one(&self, a: &Atom, e: &Expression) -> Result<Self, ExprError> {
        let mut m = HashMap::new();
        m.insert(a.clone(), e.clone());
        self.substitute(&m)
    }

    /// The pair (coefficient, remainder) with `self = a·x + b`, if `self` is
    /// affine in `x` (degree ≤ 1 in the numerator, `x` absent from the denominator).
    pub fn affine_in(&self, x: &Atom) -> Option<(Expression, Expression)> {
        if self.den.contains(x) || self.num.degree_in(x) > 1 {
            return None;
        }
        let cs = self.num.coeffs_in(x);
        let b = Expression::from_fraction(cs[0].clone(), self.den.clone()).ok()?;
        let a = match cs.get(1) {
            Some(c) => Expression::from_fraction(c.clone(), self.den.clone()).ok()?,
            None => Expression::zero(),
        };
        Some((a, b))
    }

    /// Partial derivative treating atoms as independent symbols.
    pub fn partial(&self, x: &Atom) -> Self {
        if !self.contains(x) {
            return Expression::zero();
        }
        let dn = self.num.partial(x);
        let dd = self.den.partial(x);
        let num = dn.mul(&self.den).sub(&self.num.mul(&dd));
        Expression::from_fraction(num, self.den.pow(2)).expect("nonzero denominator")
    }

    /// Bit-size of the largest coefficient, a cheap growth indicator.
    pub fn coeff_bits(&self) -> u64 {
        self.num.max_abs_coeff_bits().max(self.den.max_abs_coeff_bits())
    }

    pub fn term_count(&self) -> usize {
        self.num.len() + self.den.len()
    }

    /// True when the numerator's leading coefficient is negative.
    pub fn leading_negative(&self) -> bool {
        self.num.lc().is_negative()
    }
}

/// Substitute into a polynomial, returning (numerator, denominator).
fn subst_poly(p: &Poly, map: &HashMap<Atom, Expression>) -> (Poly, Poly) {
    let vars = p.vars();
    let mapped: Vec<(usize, &Expression)> =
        vars.iter().enumerate().filter_map(|(k, a)| map.get(a).map(|e| (k, e))).collect();
    if mapped.is_empty() {
        return (p.clone(), Poly::one());
    }
    let maxe: Vec<u32> = mapped
        .iter()
        .map(|(k, _)| p.terms().iter().map(|t| t.exps[*k]).max().unwrap_or(0))
        .collect();
    let mut den = Poly::one();
    for ((_, e), m) in mapped.iter().zip(&maxe) {
        if !e.den.is_one() {
            den = den.mul(&e.den.pow(*m));
        }
    }
    let mut npow: HashMap<(usize, u32), Poly> = HashMap::new();
    let mut dpow: HashMap<(usize, u32), Poly> = HashMap::new();
    let mut num = Poly::zero();
    for t in p.terms() {
        let mut exps = t.exps.to_vec();
        let mut f = Poly::one();
        for (i, (k, e)) in mapped.iter().enumerate() {
            let x = exps[*k];
            exps[*k] = 0;
            if x > 0 {
                f = f.mul(npow.entry((i, x)).or_insert_with(|| e.num.pow(x)));
            }
            let rest = maxe[i] - x;
            if rest > 0 && !e.den.is_one() {
                f = f.mul(dpow.entry((i, rest)).or_insert_with(|| e.den.pow(rest)));
            }
        }
        let mono = Poly::from_terms(
            vars.to_vec().into(),
            vec![poly::Term { exps: exps.into(), coeff: t.coeff.clone() }],
        );
        num = num.add(&mono.mul(&f));
    }
    (num, den)
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render::to_text(self))
    }
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render::to_text(self))
    }
}

impl From<i64> for Expression {
    fn from(n: i64) -> Self {
        Expression::int(n)
    }
}

impl From<Atom> for Expression {
    fn from(a: Atom) -> Self {
        Expression::atom(a)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $call:ident) => {
        impl std::ops::$tr<&Expression> for &Expression {
            type Output = Expression;
            fn $m(self, o: &Expression) -> Expression {
                Expression::$call(self, o)
            }
        }
        impl std::ops::$tr<Expression> for Expression {
            type Output = Expression;
            fn $m(self, o: Expression) -> Expression {
                Expression::$call(&self, &o)
            }
        }
        impl std::ops::$tr<&Expression> for Expression {
            type Output = Expression;
            fn $m(self, o: &Expression) -> Expression {
                Expression::$call(&self, o)
            }
        }
        impl std::ops::$tr<Expression> for &Expression {
            type Output = Expression;
            fn $m(self, o: Expression) -> Expression {
                Expression::$call(self, &o)
            }
        }
        impl std::ops::$tr<i64> for Expression {
            type Output = Expression;
            fn $m(self, o: i64) -> Expression {
                Expression::$call(&self, &Expression::int(o))
            }
        }
        impl std::ops::$tr<i64> for &Expression {
            type Output = Expression;
            fn $m(self, o: i64) -> Expression {
                Expression::$call(self, &Expression::int(o))
            }
        }
        impl std::ops::$tr<Expression> for i64 {
            type Output = Expression;
            fn $m(self, o: Expression) -> Expression {
                Expression::$call(&Expression::int(self), &o)
            }
        }
        impl std::ops::$tr<&Expression> for i64 {
            type Output = Expression;
            fn $m(self, o: &Expression) -> Expression {
                Expression::$call(&Expression::int(self), o)
            }
        }
    };
}

/// Panics on division by an identically-zero expression; use
/// [`Expression::checked_div`] where the divisor comes from user input.
impl Expression {
    fn div_or_panic(&self, b: &Expression) -> Expression {
        self.checked_div(b).expect("division by the zero expression")
    }
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div_or_panic);

impl std::ops::Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression::neg(&self)
    }
}

impl std::ops::Neg for &Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression::neg(self)
    }
}

/// Canonical normal form of an expression tree.
pub fn normalize(e: &ExprTree) -> Result<Expression, ExprError> {
    e.normalize()
}

pub fn is_zero(e: &ExprTree) -> Result<bool, ExprError> {
    Ok(e.normalize()?.is_zero())
}

pub fn substitute(e: &Expression, rules: &HashMap<Atom, Expression>) -> Result<Expression, ExprError> {
    e.substitute(rules)
}

pub fn eval_numeric(e: &Expression, a: &Assignment) -> Result<f64, ExprError> {
    a.eval_real(e)
}

pub fn to_latex(e: &Expression) -> String {
    render::to_latex(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Expression {
        Expression::atom(Atom::field(s))
    }

    #[test]
    fn like_terms_collect() {
        let ux = Expression::atom(Atom::jet("u", &[("x", 1)]));
        assert_eq!(&ux + &ux, ux.scale(&q(2)));
        assert!((f("u") * f("v") - f("v") * f("u")).is_zero());
    }

    #[test]
    fn rational_cancellation() {
        let u = f("u");
        let v = f("v");
        let e = (&u * &v) / (&v * &v);
        assert_eq!(e, &u / &v);
        let s = (&u + &v) / (&u * &u - &v * &v);
        assert_eq!(s, Expression::one() / (&u - &v));
        assert_eq!((&u * (Expression::one() / &v)).substitute_one(&Atom::field("u"), &(Expression::one() / &v)).unwrap()
            , Expression::one() / (&v * &v));
    }

    #[test]
    fn generator_relations() {
        let lam = Atom::field("lambda");
        let mu = Expression::sqrt_of(lam.clone());
        assert!((&mu * &mu - Expression::atom(lam.clone())).is_zero());
        let i = Expression::imag();
        assert!((&i * &i + 1).is_zero());
        let inv = (Expression::one() / &mu).checked_div(&Expression::one()).unwrap();
        assert_eq!(inv, &mu / Expression::atom(lam));
        let z = Expression::one() / (Expression::one() + &i);
        assert_eq!(z, (Expression::one() - &i) / 2);
    }

    #[test]
    fn substitution_is_simultaneous() {
        let mut m = HashMap::new();
        m.insert(Atom::field("u"), f("v"));
        m.insert(Atom::field("v"), f("u"));
        assert_eq!((f("u") - f("v") * 2).substitute(&m).unwrap(), f("v") - f("u") * 2);
        assert_eq!(f("u").substitute(&HashMap::new()).unwrap(), f("u"));
        let mut m = HashMap::new();
        m.insert(Atom::field("u"), Expression::one() / f("v"));
        assert!((f("u") * f("v")).substitute(&m).unwrap().is_one());
    }

    #[test]
    fn zero_denominator_is_reported() {
        assert_eq!(Expression::from_fraction(Poly::one(), Poly::zero()), Err(ExprError::DivisionByZero));
        assert_eq!(Expression::zero().inv(), Err(ExprError::DivisionByZero));
    }

    #[test]
    fn affine_split() {
        let u = Atom::jet("u", &[("x", 1)]);
        let e = Expression::atom(u.clone()) * f("v") + f("w");
        let (a, b) = e.affine_in(&u).unwrap();
        assert_eq!(a, f("v"));
        assert_eq!(b, f("w"));
        assert!((Expression::atom(u.clone()) * Expression::atom(u.clone())).affine_in(&u).is_none());
    }
}
