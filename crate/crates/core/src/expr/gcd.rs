//! Multivariate polynomial GCD over the rationals.
//!
//! Recursive content/primitive-part decomposition with a subresultant
//! polynomial remainder sequence in the chosen main variable. Monomial
//! factors are split off first; they cover most denominators in practice.

use super::atom::Atom;
use super::poly::Poly;

/// Monic greatest common divisor; `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let ma = a.min_monomial();
    let mb = b.min_monomial();
    let mut common = Vec::new();
    for (x, ea) in &ma {
        if let Some((_, eb)) = mb.iter().find(|(y, _)| y == x) {
            common.push((x.clone(), (*ea).min(*eb)));
        }
    }
    let a1 = a.div_monomial(&ma);
    let b1 = b.div_monomial(&mb);
    let g = if a1.is_constant() || b1.is_constant() { Poly::one() } else { gcd_primitive(&a1, &b1) };
    Poly::monomial(num_traits::One::one(), &common).mul(&g).monic()
}

pub fn lcm(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() || b.is_zero() {
        return Poly::zero();
    }
    let g = gcd(a, b);
    a.div_exact(&g).expect("gcd divides").mul(b).monic()
}

/// GCD of polynomials without monomial content.
fn gcd_primitive(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let am = a.monic();
    let bm = b.monic();
    if am == bm {
        return am;
    }
    if am.len() <= bm.len() {
        if bm.div_exact(&am).is_some() {
            return am;
        }
    } else if am.div_exact(&bm).is_some() {
        return bm;
    }
    // a variable present in only one argument can only enter through content
    if let Some(v) = a.vars().iter().find(|v| !b.contains(v)) {
        let c = content(a, v);
        return gcd(&c, b);
    }
    if let Some(v) = b.vars().iter().find(|v| !a.contains(v)) {
        let c = content(b, v);
        return gcd(a, &c);
    }
    let x = a
        .vars()
        .iter()
        .min_by_key(|v| (a.degree_in(v).max(b.degree_in(v)), a.degree_in(v) + b.degree_in(v)))
        .expect("non-constant")
        .clone();
    let ca = content(a, &x);
    let cb = content(b, &x);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let c = gcd(&ca, &cb);
    let g = prs_gcd(pa, pb, &x);
    c.mul(&g).monic()
}

/// GCD of the coefficients of `p` viewed as a polynomial in `x`.
pub fn content(p: &Poly, x: &Atom) -> Poly {
    let mut g = Poly::zero();
    for c in p.coeffs_in(x) {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, &c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn primitive_part(p: &Poly, x: &Atom) -> Poly {
    let c = content(p, x);
    p.div_exact(&c).expect("content divides").monic()
}

fn lc_in(p: &Poly, x: &Atom) -> Poly {
    p.coeffs_in(x).pop().unwrap_or_else(Poly::zero)
}

/// Pseudo-remainder `lc(b)^(deg a - deg b + 1) a mod b` in `x`.
fn prem(a: &Poly, b: &Poly, x: &Atom) -> Poly {
    let m = b.degree_in(x);
    let n = a.degree_in(x);
    if n < m {
        return a.clone();
    }
    let lb = lc_in(b, x);
    let xa = Poly::atom(x.clone());
    let mut r = a.clone();
    let mut e = n - m + 1;
    while !r.is_zero() && r.degree_in(x) >= m {
        let d = r.degree_in(x) - m;
        let lr = lc_in(&r, x);
        r = lb.mul(&r).sub(&lr.mul(&xa.pow(d)).mul(b));
        e -= 1;
    }
    r.mul(&lb.pow(e))
}

/// Subresultant PRS for primitive inputs; returns the primitive gcd in `x`.
fn prs_gcd(a: Poly, b: Poly, x: &Atom) -> Poly {
    let (mut a, mut b) = if a.degree_in(x) >= b.degree_in(x) { (a, b) } else { (b, a) };
    if b.degree_in(x) == 0 {
        return Poly::one();
    }
    let mut g = Poly::one();
    let mut h = Poly::one();
    loop {
        let delta = a.degree_in(x) - b.degree_in(x);
        let r = prem(&a, &b, x);
        if r.is_zero() {
            return primitive_part(&b, x);
        }
        if r.degree_in(x) == 0 {
            return Poly::one();
        }
        a = b;
        let divisor = g.mul(&h.pow(delta));
        b = r.div_exact(&divisor).expect("subresultant division is exact");
        g = lc_in(&a, x);
        if delta > 0 {
            h = g.pow(delta).div_exact(&h.pow(delta - 1)).expect("subresultant h update is exact");
        }
    }
}
