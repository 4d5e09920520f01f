//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Each polynomial carries its own sorted variable list; exponent vectors are
//! dense over that list and terms are kept in descending lexicographic order.
//! The variable list only ever contains atoms that actually occur, so two
//! equal polynomials have identical representations.

use super::atom::Atom;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Arc;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Term {
    pub exps: Box<[u32]>,
    pub coeff: Q,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Poly {
    vars: Arc<[Atom]>,
    terms: Vec<Term>,
}

fn empty_vars() -> Arc<[Atom]> {
    Arc::from(Vec::<Atom>::new())
}

/// Merge two sorted variable lists; returns the union and index maps.
fn merge_vars(a: &[Atom], b: &[Atom]) -> (Arc<[Atom]>, Vec<usize>, Vec<usize>) {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut ma = Vec::with_capacity(a.len());
    let mut mb = Vec::with_capacity(b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ord = if i == a.len() {
            Ordering::Greater
        } else if j == b.len() {
            Ordering::Less
        } else {
            a[i].cmp(&b[j])
        };
        match ord {
            Ordering::Less => {
                ma.push(out.len());
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                mb.push(out.len());
                out.push(b[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                ma.push(out.len());
                mb.push(out.len());
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    (out.into(), ma, mb)
}

fn remap(terms: &[Term], map: &[usize], width: usize) -> Vec<Term> {
    terms
        .iter()
        .map(|t| {
            let mut e = vec![0u32; width];
            for (k, &x) in t.exps.iter().enumerate() {
                e[map[k]] = x;
            }
            Term { exps: e.into(), coeff: t.coeff.clone() }
        })
        .collect()
}

fn sort_and_combine(mut terms: Vec<Term>) -> Vec<Term> {
    terms.sort_unstable_by(|a, b| b.exps.cmp(&a.exps));
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.last_mut() {
            Some(last) if last.exps == t.exps => last.coeff += t.coeff,
            _ => out.push(t),
        }
    }
    out.retain(|t| !t.coeff.is_zero());
    out
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { vars: empty_vars(), terms: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { vars: empty_vars(), terms: vec![Term { exps: Box::new([]), coeff: c }] }
    }

    pub fn atom(a: Atom) -> Poly {
        Poly {
            vars: Arc::from(vec![a]),
            terms: vec![Term { exps: Box::new([1]), coeff: Q::one() }],
        }
    }

    pub fn monomial(c: Q, mono: &[(Atom, u32)]) -> Poly {
        let mut p = Poly::constant(c);
        for (a, e) in mono {
            p = p.mul(&Poly::atom(a.clone()).pow(*e));
        }
        p
    }

    /// Build from arbitrary (possibly unsorted, duplicated) terms over `vars`.
    pub fn from_terms(vars: Arc<[Atom]>, terms: Vec<Term>) -> Poly {
        let mut p = Poly { vars, terms: sort_and_combine(terms) };
        p.compact();
        p
    }

    fn compact(&mut self) {
        let n = self.vars.len();
        if n == 0 {
            return;
        }
        let mut used = vec![false; n];
        for t in &self.terms {
            for (k, &e) in t.exps.iter().enumerate() {
                if e > 0 {
                    used[k] = true;
                }
            }
        }
        if used.iter().all(|&u| u) {
            return;
        }
        let keep: Vec<usize> = (0..n).filter(|&k| used[k]).collect();
        self.vars = keep.iter().map(|&k| self.vars[k].clone()).collect::<Vec<_>>().into();
        for t in &mut self.terms {
            t.exps = keep.iter().map(|&k| t.exps[k]).collect::<Vec<_>>().into();
        }
    }

    pub fn vars(&self) -> &[Atom] {
        &self.vars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.vars.is_empty() && self.terms.len() == 1 && self.terms[0].coeff.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn as_constant(&self) -> Option<Q> {
        if !self.vars.is_empty() {
            return None;
        }
        Some(self.terms.first().map_or_else(Q::zero, |t| t.coeff.clone()))
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.vars.binary_search(a).is_ok()
    }

    pub fn var_index(&self, a: &Atom) -> Option<usize> {
        self.vars.binary_search(a).ok()
    }

    /// Leading coefficient in the lexicographic term order.
    pub fn lc(&self) -> Q {
        self.terms.first().map_or_else(Q::zero, |t| t.coeff.clone())
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.exps.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn neg(&self) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| Term { exps: t.exps.clone(), coeff: -t.coeff.clone() })
                .collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| Term { exps: t.exps.clone(), coeff: &t.coeff * c })
                .collect(),
        }
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let lc = self.lc();
        if lc.is_one() {
            return self.clone();
        }
        self.scale(&lc.recip())
    }

    fn aligned(&self, other: &Poly) -> (Arc<[Atom]>, Vec<Term>, Vec<Term>) {
        if self.vars == other.vars {
            return (self.vars.clone(), self.terms.clone(), other.terms.clone());
        }
        let (vars, ma, mb) = merge_vars(&self.vars, &other.vars);
        let w = vars.len();
        (vars.clone(), remap(&self.terms, &ma, w), remap(&other.terms, &mb, w))
    }

    fn combine(&self, other: &Poly, sign: bool) -> Poly {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if sign { other.clone() } else { other.neg() };
        }
        let (vars, a, b) = self.aligned(other);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let ord = if i == a.len() {
                Ordering::Less
            } else if j == b.len() {
                Ordering::Greater
            } else {
                a[i].exps.cmp(&b[j].exps)
            };
            match ord {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if sign { b[j].coeff.clone() } else { -b[j].coeff.clone() };
                    out.push(Term { exps: b[j].exps.clone(), coeff: c });
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if sign { &a[i].coeff + &b[j].coeff } else { &a[i].coeff - &b[j].coeff };
                    if !c.is_zero() {
                        out.push(Term { exps: a[i].exps.clone(), coeff: c });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        let mut p = Poly { vars, terms: out };
        p.compact();
        p
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.combine(other, true)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.combine(other, false)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let (vars, a, b) = self.aligned(other);
        let w = vars.len();
        let mut acc: HashMap<Box<[u32]>, Q> = HashMap::with_capacity(a.len() * b.len());
        let mut buf = vec![0u32; w];
        for ta in &a {
            for tb in &b {
                for k in 0..w {
                    buf[k] = ta.exps[k] + tb.exps[k];
                }
                let c = &ta.coeff * &tb.coeff;
                match acc.get_mut(buf.as_slice()) {
                    Some(v) => *v += c,
                    None => {
                        acc.insert(buf.clone().into(), c);
                    }
                }
            }
        }
        let mut terms: Vec<Term> = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exps, coeff)| Term { exps, coeff })
            .collect();
        terms.sort_unstable_by(|x, y| y.exps.cmp(&x.exps));
        let mut p = Poly { vars, terms };
        p.compact();
        p
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn degree_in(&self, a: &Atom) -> u32 {
        match self.var_index(a) {
            Some(k) => self.terms.iter().map(|t| t.exps[k]).max().unwrap_or(0),
            None => 0,
        }
    }

    /// Coefficients with respect to `a`, indexed by degree.
    pub fn coeffs_in(&self, a: &Atom) -> Vec<Poly> {
        let Some(k) = self.var_index(a) else {
            return vec![self.clone()];
        };
        let deg = self.degree_in(a) as usize;
        let mut buckets: Vec<Vec<Term>> = vec![Vec::new(); deg + 1];
        for t in &self.terms {
            let d = t.exps[k] as usize;
            let mut e = t.exps.to_vec();
            e[k] = 0;
            buckets[d].push(Term { exps: e.into(), coeff: t.coeff.clone() });
        }
        buckets
            .into_iter()
            .map(|ts| Poly::from_terms(self.vars.clone(), ts))
            .collect()
    }

    /// Inverse of `coeffs_in`.
    pub fn from_coeffs_in(a: &Atom, coeffs: &[Poly]) -> Poly {
        let x = Poly::atom(a.clone());
        let mut out = Poly::zero();
        for (d, c) in coeffs.iter().enumerate().rev() {
            if !c.is_zero() {
                out = out.add(&c.mul(&x.pow(d as u32)));
            }
        }
        out
    }

    /// Partial derivative with respect to an atom treated as a variable.
    pub fn partial(&self, a: &Atom) -> Poly {
        let Some(k) = self.var_index(a) else {
            return Poly::zero();
        };
        let terms = self
            .terms
            .iter()
            .filter(|t| t.exps[k] > 0)
            .map(|t| {
                let mut e = t.exps.to_vec();
                let n = e[k];
                e[k] -= 1;
                Term { exps: e.into(), coeff: &t.coeff * q(n as i64) }
            })
            .collect();
        Poly::from_terms(self.vars.clone(), terms)
    }

    /// Componentwise minimum exponent over all terms, as a monomial list.
    pub fn min_monomial(&self) -> Vec<(Atom, u32)> {
        if self.terms.is_empty() {
            return Vec::new();
        }
        let mut m: Vec<u32> = self.terms[0].exps.to_vec();
        for t in &self.terms[1..] {
            for (k, &e) in t.exps.iter().enumerate() {
                m[k] = m[k].min(e);
            }
        }
        self.vars
            .iter()
            .zip(m)
            .filter(|(_, e)| *e > 0)
            .map(|(a, e)| (a.clone(), e))
            .collect()
    }

    /// Divide by a monomial (exponents must be available in every term).
    pub fn div_monomial(&self, mono: &[(Atom, u32)]) -> Poly {
        if mono.is_empty() {
            return self.clone();
        }
        let mut terms = self.terms.clone();
        for (a, e) in mono {
            let k = self.var_index(a).expect("monomial divisor variable");
            for t in &mut terms {
                let mut ex = t.exps.to_vec();
                ex[k] -= e;
                t.exps = ex.into();
            }
        }
        let mut p = Poly { vars: self.vars.clone(), terms };
        p.compact();
        p
    }

    /// The single term as (coefficient, monomial) when `is_monomial`.
    pub fn as_monomial(&self) -> Option<(Q, Vec<(Atom, u32)>)> {
        if self.terms.len() != 1 {
            return None;
        }
        let t = &self.terms[0];
        let mono = self
            .vars
            .iter()
            .zip(t.exps.iter())
            .filter(|(_, e)| **e > 0)
            .map(|(a, e)| (a.clone(), *e))
            .collect();
        Some((t.coeff.clone(), mono))
    }

    /// Exact division; `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        if let Some((c, mono)) = d.as_monomial() {
            for (a, e) in &mono {
                let k = self.var_index(a)?;
                if self.terms.iter().any(|t| t.exps[k] < *e) {
                    return None;
                }
            }
            return Some(self.div_monomial(&mono).scale(&c.recip()));
        }
        for a in d.vars.iter() {
            if !self.contains(a) {
                return None;
            }
        }
        let (vars, rem_terms, dterms) = self.aligned(d);
        let w = vars.len();
        let mut rem = rem_terms;
        let lead = dterms[0].clone();
        let mut quot: Vec<Term> = Vec::new();
        while let Some(rt) = rem.first() {
            let mut e = vec![0u32; w];
            for k in 0..w {
                if rt.exps[k] < lead.exps[k] {
                    return None;
                }
                e[k] = rt.exps[k] - lead.exps[k];
            }
            let c = &rt.coeff / &lead.coeff;
            // rem -= c * x^e * d
            let sub: Vec<Term> = dterms
                .iter()
                .map(|t| {
                    let ex: Vec<u32> = (0..w).map(|k| t.exps[k] + e[k]).collect();
                    Term { exps: ex.into(), coeff: &t.coeff * &c }
                })
                .collect();
            rem = merge_sub(&rem, &sub);
            quot.push(Term { exps: e.into(), coeff: c });
        }
        Some(Poly::from_terms(vars, quot))
    }

    pub fn max_abs_coeff_bits(&self) -> u64 {
        self.terms
            .iter()
            .map(|t| t.coeff.numer().abs().bits().max(t.coeff.denom().bits()))
            .max()
            .unwrap_or(0)
    }

    /// Substitute polynomials for atoms (simultaneously).
    pub fn substitute(&self, map: &HashMap<Atom, Poly>) -> Poly {
        let mut out = Poly::zero();
        let mut powers: HashMap<(usize, u32), Poly> = HashMap::new();
        for t in &self.terms {
            let mut m = Poly::constant(t.coeff.clone());
            for (k, &e) in t.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let f = match map.get(&self.vars[k]) {
                    Some(p) => powers.entry((k, e)).or_insert_with(|| p.pow(e)).clone(),
                    None => Poly::atom(self.vars[k].clone()).pow(e),
                };
                m = m.mul(&f);
            }
            out = out.add(&m);
        }
        out
    }
}

fn merge_sub(a: &[Term], b: &[Term]) -> Vec<Term> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ord = if i == a.len() {
            Ordering::Less
        } else if j == b.len() {
            Ordering::Greater
        } else {
            a[i].exps.cmp(&b[j].exps)
        };
        match ord {
            Ordering::Greater => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Less => {
                out.push(Term { exps: b[j].exps.clone(), coeff: -b[j].coeff.clone() });
                j += 1;
            }
            Ordering::Equal => {
                let c = &a[i].coeff - &b[j].coeff;
                if !c.is_zero() {
                    out.push(Term { exps: a[i].exps.clone(), coeff: c });
                }
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly {
        Poly::atom(Atom::field("x"))
    }
    fn y() -> Poly {
        Poly::atom(Atom::field("y"))
    }

    #[test]
    fn arithmetic_cancels_to_canonical_zero() {
        let p = x().add(&y()).pow(2).sub(&x().pow(2)).sub(&x().mul(&y()).scale(&q(2))).sub(&y().pow(2));
        assert!(p.is_zero());
        assert_eq!(p, Poly::zero());
        assert!(p.vars().is_empty());
    }

    #[test]
    fn exact_division() {
        let a = x().add(&y());
        let b = x().sub(&y());
        let prod = a.mul(&b);
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(prod.div_exact(&b), Some(a));
        assert_eq!(x().div_exact(&y()), None);
        assert_eq!(x().add(&Poly::one()).div_exact(&x()), None);
    }

    #[test]
    fn coefficient_view_round_trips() {
        let p = x().pow(3).mul(&y()).add(&x().scale(&q(5))).add(&y().pow(2));
        let cs = p.coeffs_in(&Atom::field("x"));
        assert_eq!(cs.len(), 4);
        assert_eq!(Poly::from_coeffs_in(&Atom::field("x"), &cs), p);
    }

    #[test]
    fn partial_derivative() {
        let p = x().pow(3).mul(&y());
        assert_eq!(p.partial(&Atom::field("x")), x().pow(2).mul(&y()).scale(&q(3)));
        assert!(p.partial(&Atom::field("z")).is_zero());
    }
}
