#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recipro::expr::parse::{parse_expression, parse_tree};
use recipro::expr::{Assignment, Atom, ExprTree, Expression, Jet, Symbol, Q};
use recipro::jetspace::JetSpace;
use recipro::recip::ReciprocalTransform;
use std::collections::HashMap;

/// Dense multivariate polynomial with f64 coefficients.
#[derive(Clone, Debug)]
pub struct MPoly {
    terms: Vec<(f64, Vec<u32>)>,
}

impl MPoly {
    /// Random data up to degree 4; with `lead = Some(p)` the result is
    /// z_p plus a small perturbation, so it is invertible in z_p near the
    /// sample point.
    pub fn random(rng: &mut ChaCha8Rng, nvars: usize, lead: Option<usize>) -> MPoly {
        let mut terms = Vec::new();
        let scale = if lead.is_some() { 0.1 } else { 1.0 };
        let mono = |pairs: &[usize]| {
            let mut e = vec![0u32; nvars];
            for &i in pairs {
                e[i] += 1;
            }
            e
        };
        terms.push((scale * rng.gen_range(0.5..1.5), vec![0; nvars]));
        for i in 0..nvars {
            terms.push((scale * rng.gen_range(-0.5..0.5), mono(&[i])));
            terms.push((scale * rng.gen_range(-0.2..0.2), mono(&[i, i, i])));
            for j in i..nvars {
                terms.push((scale * rng.gen_range(-0.3..0.3), mono(&[i, j])));
            }
        }
        for _ in 0..6 {
            let k: Vec<usize> = (0..rng.gen_range(3..5)).map(|_| rng.gen_range(0..nvars)).collect();
            terms.push((scale * rng.gen_range(-0.2..0.2), mono(&k)));
        }
        if let Some(p) = lead {
            terms.push((1.0, mono(&[p])));
        }
        MPoly { terms }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.terms.iter().map(|(c, e)| c * e.iter().zip(z).map(|(k, x)| x.powi(*k as i32)).product::<f64>()).sum()
    }

    pub fn deriv(&self, i: usize) -> MPoly {
        let mut terms = Vec::new();
        for (c, e) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                terms.push((c * e[i] as f64, e2));
            }
        }
        MPoly { terms }
    }
}

/// Chain-rule oracle: target data X(z), f(z) are manufactured; source data
/// is f(z(x)) with z(x) obtained by Newton inversion of the pivot.
pub struct ChainOracle<'a> {
    t: &'a ReciprocalTransform,
    tv: Vec<Symbol>,
    ip: usize,
    src_to_tgt: Vec<Option<usize>>,
    src_pivot: usize,
    z_star: Vec<f64>,
    polys: HashMap<Symbol, MPoly>,
    rng: ChaCha8Rng,
}

impl<'a> ChainOracle<'a> {
    pub fn new(t: &'a ReciprocalTransform, seed: u64) -> ChainOracle<'a> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tv: Vec<Symbol> = t.target().indep().to_vec();
        let idx = |s: &Symbol| tv.iter().position(|v| v == s).expect("target variable");
        let ip = idx(t.target_pivot());
        let sv = t.source().indep();
        let src_pivot = sv.iter().position(|x| x == t.pivot()).expect("pivot");
        let src_to_tgt = sv.iter().map(|x| if x == t.pivot() { None } else { Some(idx(&t.target_var(x).expect("renamed"))) }).collect();
        let z_star = (0..tv.len()).map(|_| rng.gen_range(0.2..0.6)).collect();
        let mut polys = HashMap::new();
        polys.insert(t.new_field().clone(), MPoly::random(&mut rng, tv.len(), Some(ip)));
        ChainOracle { t, tv, ip, src_to_tgt, src_pivot, z_star, polys, rng }
    }

    fn poly(&mut self, f: &Symbol) -> &MPoly {
        if !self.polys.contains_key(f) {
            let p = MPoly::random(&mut self.rng, self.tv.len(), None);
            self.polys.insert(f.clone(), p);
        }
        &self.polys[f]
    }

    fn target_value(&mut self, a: &Atom) -> f64 {
        match a {
            Atom::Indep(z) => self.z_star[self.tv.iter().position(|v| v == z).expect("target variable")],
            Atom::Jet(j) => {
                let mut p = self.poly(&j.field).clone();
                for (x, k) in j.derivs() {
                    let i = self.tv.iter().position(|v| v == x).expect("target variable");
                    for _ in 0..*k {
                        p = p.deriv(i);
                    }
                }
                p.eval(&self.z_star)
            }
            other => panic!("unexpected atom {:?} in a chain rule", other),
        }
    }

    fn source_point(&self) -> Vec<f64> {
        let x = &self.polys[self.t.new_field()];
        self.src_to_tgt
            .iter()
            .map(|m| match m {
                Some(i) => self.z_star[*i],
                None => x.eval(&self.z_star),
            })
            .collect()
    }

    fn source_value(&mut self, field: &Symbol, s: &[f64]) -> f64 {
        let mut z = self.z_star.clone();
        for (k, m) in self.src_to_tgt.iter().enumerate() {
            if let Some(i) = m {
                z[*i] = s[k];
            }
        }
        let x = self.polys[self.t.new_field()].clone();
        let xp = x.deriv(self.ip);
        for _ in 0..60 {
            let r = x.eval(&z) - s[self.src_pivot];
            z[self.ip] -= r / xp.eval(&z);
            if r.abs() < 1e-15 {
                break;
            }
        }
        if Some(field) == self.t.demoted() {
            return z[self.ip];
        }
        self.poly(field).eval(&z)
    }

    fn fd(&mut self, field: &Symbol, s: &mut Vec<f64>, dirs: &[usize], h: f64) -> f64 {
        match dirs.split_first() {
            None => self.source_value(field, s),
            Some((&k, rest)) => {
                let s0 = s[k];
                s[k] = s0 + h;
                let a = self.fd(field, s, rest, h);
                s[k] = s0 - h;
                let b = self.fd(field, s, rest, h);
                s[k] = s0;
                (a - b) / (2.0 * h)
            }
        }
    }

    /// Exact value of a target expression at the sample point.
    pub fn rule_value(&mut self, rule: &Expression) -> f64 {
        let mut a = Assignment::new();
        for atom in rule.atoms() {
            let v = self.target_value(&atom);
            a.set(atom, v);
        }
        a.eval_complex(rule).expect("rule value").re
    }

    /// Finite-difference value of a source jet at the sample point.
    pub fn fd_jet(&mut self, j: &Jet) -> f64 {
        let sv: Vec<Symbol> = self.t.source().indep().to_vec();
        let dirs: Vec<usize> = j
            .derivs()
            .iter()
            .flat_map(|(x, k)| std::iter::repeat(sv.iter().position(|v| v == x).expect("source variable")).take(*k as usize))
            .collect();
        let mut base = self.source_point();
        self.fd(&j.field, &mut base, &dirs, 1e-3)
    }

    /// Largest relative deviation between each rule of order 1..=p and its
    /// finite-difference value, with the number of rules compared.
    pub fn max_error(&mut self, p: u32) -> (usize, f64) {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for f in self.t.source().dep().to_vec() {
            for (j, rule) in self.t.derivative_rules(f.as_str(), p).expect("rules") {
                let exact = self.rule_value(&rule);
                let approx = self.fd_jet(&j);
                worst = worst.max(rel(approx, exact));
                count += 1;
            }
        }
        (count, worst)
    }
}

pub fn rel(approx: f64, exact: f64) -> f64 {
    (approx - exact).abs() / exact.abs().max(1.0)
}

pub const FD_REL_TOL: f64 = 1e-4;

// Kernel laws.

pub fn kernel_space() -> JetSpace {
    JetSpace::with_params(&["x", "t"], &["u", "v"], &["k"], 6).unwrap()
}

fn leaf() -> impl Strategy<Value = ExprTree> {
    let atoms = vec![
        Atom::jet("u", &[]),
        Atom::jet("v", &[]),
        Atom::jet("u", &[("x", 1)]),
        Atom::jet("u", &[("t", 1)]),
        Atom::jet("v", &[("x", 1)]),
        Atom::indep("x"),
        Atom::param("k"),
    ];
    prop_oneof![
        (-4i64..=4, 1i64..=3).prop_map(|(n, d)| ExprTree::Num(Q::new(n.into(), d.into()))),
        proptest::sample::select(atoms).prop_map(ExprTree::Atom),
    ]
}

pub fn tree() -> impl Strategy<Value = ExprTree> {
    leaf().prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2..=3).prop_map(ExprTree::Add),
            proptest::collection::vec(inner.clone(), 2..=2).prop_map(ExprTree::Mul),
            inner.clone().prop_map(|a| ExprTree::Neg(Box::new(a))),
            (inner.clone(), 0i32..=2).prop_map(|(a, e)| ExprTree::Pow(Box::new(a), e)),
            (inner, leaf(), 1i64..=3).prop_map(|(a, l, c)| {
                let den = match l {
                    ExprTree::Atom(x) => ExprTree::Add(vec![ExprTree::Atom(x), ExprTree::Num(Q::from_integer(c.into()))]),
                    _ => ExprTree::Num(Q::from_integer(c.into())),
                };
                ExprTree::Div(Box::new(a), Box::new(den))
            }),
        ]
    })
}

fn ensure(ok: bool, what: &str) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(what.to_string()))
    }
}

/// Ring laws, Leibniz, commutation of total derivatives, and idempotence of
/// normalization through rendering and reparsing.
pub fn check_laws(sp: &JetSpace, ta: &ExprTree, tb: &ExprTree, tc: &ExprTree) -> Result<(), TestCaseError> {
    let norm = |t: &ExprTree| t.normalize().map_err(|e| TestCaseError::fail(e.to_string()));
    let (a, b, c) = (norm(ta)?, norm(tb)?, norm(tc)?);
    ensure(a.add(&b).add(&c) == a.add(&b.add(&c)), "additive associativity")?;
    ensure(a.add(&b) == b.add(&a), "additive commutativity")?;
    ensure(a.mul(&b).mul(&c) == a.mul(&b.mul(&c)), "multiplicative associativity")?;
    ensure(a.mul(&b) == b.mul(&a), "multiplicative commutativity")?;
    ensure(a.mul(&b.add(&c)) == a.mul(&b).add(&a.mul(&c)), "distributivity")?;
    ensure(a.sub(&a).is_zero(), "additive inverse")?;
    ensure(a.add(&Expression::zero()) == a && a.mul(&Expression::one()) == a, "identities")?;
    let d = |e: &Expression, x: &str| sp.d(e, x).map_err(|err| TestCaseError::fail(err.to_string()));
    for x in ["x", "t"] {
        ensure(d(&a.mul(&b), x)? == d(&a, x)?.mul(&b).add(&a.mul(&d(&b, x)?)), "Leibniz")?;
    }
    ensure(d(&d(&a, "x")?, "t")? == d(&d(&a, "t")?, "x")?, "commutation")?;
    let text = a.to_string();
    let again = parse_tree(&text, sp).map_err(|e| TestCaseError::fail(format!("{}: {}", text, e)))?;
    ensure(norm(&again)? == a, "normalize idempotent")?;
    ensure(parse_expression(&text, sp).ok().as_ref() == Some(&a), "render round trip")?;
    Ok(())
}

/// Run `cases` seeded random triples through [`check_laws`].
pub fn run_kernel_laws(cases: u32, seed: u64) -> Result<(), String> {
    let sp = kernel_space();
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    let cfg = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(cfg, TestRng::from_seed(RngAlgorithm::ChaCha, &bytes));
    runner.run(&(tree(), tree(), tree()), |(a, b, c)| check_laws(&sp, &a, &b, &c)).map_err(|e| e.to_string())
}
