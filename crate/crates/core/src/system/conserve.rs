//! Bounded polynomial search for conserved pairs.

use super::linalg::{nullspace, rank};
use super::{ConservedPair, SolvedSystem, SystemError};
use crate::expr::gcd::lcm;
use crate::expr::{Atom, Expression, Jet, Poly, Symbol, Q};
use num_traits::{One, Zero};
use std::collections::HashMap;

type Mono = Vec<(Atom, u32)>;

const MAX_UNKNOWNS: usize = 10_000;

/// The solution space of a conserved-pair ansatz.
#[derive(Clone, Debug)]
pub struct ConservedSpace {
    pub var: Symbol,
    pub var_prime: Symbol,
    monomials: Vec<Mono>,
    solutions: Vec<Vec<Q>>,
    /// Representatives of the solutions modulo trivial pairs.
    pub pairs: Vec<ConservedPair>,
}

fn mono_expr(m: &Mono) -> Expression {
    Expression::from_poly(Poly::monomial(Q::one(), m))
}

fn term_mono(p: &Poly, exps: &[u32]) -> Mono {
    p.vars().iter().zip(exps).filter(|(_, e)| **e > 0).map(|(a, e)| (a.clone(), *e)).collect()
}

impl ConservedSpace {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    fn coords(&self, a: &Expression, b: &Expression) -> Option<Vec<Q>> {
        let n = self.monomials.len();
        let index: HashMap<&Mono, usize> = self.monomials.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut v = vec![Q::zero(); 2 * n];
        for (e, off) in [(a, 0), (b, n)] {
            if !e.is_polynomial() {
                return None;
            }
            for t in e.num().terms() {
                let i = *index.get(&term_mono(e.num(), &t.exps))?;
                v[off + i] = t.coeff.clone();
            }
        }
        Some(v)
    }

    /// Whether the pair (given in reduced form) lies in the solution space.
    pub fn contains(&self, a: &Expression, a_prime: &Expression) -> bool {
        match self.coords(a, a_prime) {
            Some(v) => {
                let n = v.len();
                let r = rank(&self.solutions, n);
                let mut with = self.solutions.clone();
                with.push(v);
                rank(&with, n) == r
            }
            None => false,
        }
    }
}

fn monomials(jets: &[Atom], max_degree: u32) -> Vec<Mono> {
    let mut out: Vec<Mono> = Vec::new();
    let mut layer: Vec<(Mono, usize)> = vec![(Vec::new(), 0)];
    for _ in 0..max_degree {
        let mut next = Vec::new();
        for (m, start) in &layer {
            for (i, a) in jets.iter().enumerate().skip(*start) {
                let mut m2 = m.clone();
                match m2.last_mut() {
                    Some(last) if &last.0 == a => last.1 += 1,
                    _ => m2.push((a.clone(), 1)),
                }
                next.push((m2, i));
            }
        }
        out.extend(next.iter().map(|(m, _)| m.clone()));
        layer = next;
    }
    out
}

/// Polynomial pairs (A, A') in irreducible jets of order ≤ `max_order` and
/// degree ≤ `max_degree` with D_var A ≡ D_var' A' modulo `s`, returned
/// modulo scaling and trivial pairs (D_var' F, D_var F).
pub fn search_conserved(
    s: &SolvedSystem,
    var: &str,
    var_prime: &str,
    max_degree: u32,
    max_order: u32,
) -> Result<ConservedSpace, SystemError> {
    let sp = s.space();
    let (x, xp) = (Symbol::new(var), Symbol::new(var_prime));
    for v in [&x, &xp] {
        if !sp.is_indep(v) {
            return Err(crate::jetspace::JetError::UnknownVariable(v.to_string()).into());
        }
    }
    let mut jets: Vec<Atom> = Vec::new();
    for f in sp.dep() {
        for j in sp.jets_of(f, max_order) {
            if !s.is_reducible(&j) {
                jets.push(Atom::Jet(j));
            }
        }
    }
    jets.sort();
    let monos = monomials(&jets, max_degree);
    let n = monos.len();
    if 2 * n > MAX_UNKNOWNS {
        return Err(SystemError::AnsatzTooLarge(2 * n));
    }

    let mut cols: Vec<Expression> = Vec::with_capacity(2 * n);
    for m in &monos {
        cols.push(s.reduce(&sp.total_derivative(&mono_expr(m), &x)?)?);
    }
    for m in &monos {
        cols.push(s.reduce(&sp.total_derivative(&mono_expr(m), &xp)?)?.neg());
    }
    let mut den = Poly::one();
    for c in &cols {
        if !c.den().is_one() {
            den = lcm(&den, c.den());
        }
    }
    let mut rows: HashMap<Mono, Vec<Q>> = HashMap::new();
    for (k, c) in cols.iter().enumerate() {
        let p = if c.den() == &den { c.num().clone() } else { c.num().mul(&den.div_exact(c.den()).expect("lcm")) };
        for t in p.terms() {
            let row = rows.entry(term_mono(&p, &t.exps)).or_insert_with(|| vec![Q::zero(); 2 * n]);
            row[k] += &t.coeff;
        }
    }
    let mut rows: Vec<(Mono, Vec<Q>)> = rows.into_iter().collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let solutions = nullspace(rows.into_iter().map(|r| r.1).collect(), 2 * n);

    let mut space = ConservedSpace { var: x.clone(), var_prime: xp.clone(), monomials: monos, solutions, pairs: Vec::new() };

    // trivial pairs that fit the ansatz
    let mut basis: Vec<Vec<Q>> = Vec::new();
    let lower: Vec<Atom> = jets
        .iter()
        .filter(|a| a.as_jet().map_or(false, |j: &Jet| j.order() < max_order))
        .cloned()
        .collect();
    for f in monomials(&lower, max_degree) {
        let fe = mono_expr(&f);
        let a = s.reduce(&sp.total_derivative(&fe, &xp)?)?;
        let b = s.reduce(&sp.total_derivative(&fe, &x)?)?;
        if let Some(v) = space.coords(&a, &b) {
            basis.push(v);
        }
    }
    let mut r = rank(&basis, 2 * n);
    let nm = space.monomials.len();
    for sol in space.solutions.clone() {
        let mut with = basis.clone();
        with.push(sol.clone());
        let r2 = rank(&with, 2 * n);
        if r2 == r {
            continue;
        }
        basis = with;
        r = r2;
        let lead = sol.iter().find(|c| !c.is_zero()).expect("nonzero solution").clone();
        let sum = |range: std::ops::Range<usize>| {
            let mut e = Expression::zero();
            for i in range {
                if !sol[i].is_zero() {
                    e = e + mono_expr(&space.monomials[i % nm]).scale(&(&sol[i] / &lead));
                }
            }
            e
        };
        space.pairs.push(ConservedPair { a: sum(0..nm), var: x.clone(), a_prime: sum(nm..2 * nm), var_prime: xp.clone() });
    }
    Ok(space)
}
