use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use super::ranking::Ranking;
use super::{PDESystem, SystemError};
use crate::expr::{Atom, Expression, Jet, Symbol};
use crate::jetspace::JetSpace;
use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;

pub const DEFAULT_BUDGET: usize = 10_000;

static BUDGET: AtomicUsize = AtomicUsize::new(DEFAULT_BUDGET);

/// The budget given to every new [`SolvedSystem`].
pub fn default_budget() -> usize {
    BUDGET.load(AtomicOrdering::Relaxed)
}

/// Change the budget of systems created from now on, process-wide.
pub fn set_default_budget(budget: usize) {
    BUDGET.store(budget, AtomicOrdering::Relaxed);
}

/// A rewrite rule `lead -> rhs` with the name of its source equation.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub lead: Jet,
    pub rhs: Expression,
    pub source: String,
}

/// Leading-derivative rules with on-demand prolongation.
///
/// A jet is reducible when it is a derivative of some rule's lead; its
/// reduced value is computed by differentiating the reduced value of a
/// lower reducible jet, so only the jets actually met are ever prolonged.
pub struct SolvedSystem {
    space: JetSpace,
    ranking: Ranking,
    rules: Vec<Rule>,
    budget: usize,
    cache: Mutex<HashMap<Jet, Option<Expression>>>,
}

impl Clone for SolvedSystem {
    fn clone(&self) -> Self {
        SolvedSystem {
            space: self.space.clone(),
            ranking: self.ranking.clone(),
            rules: self.rules.clone(),
            budget: self.budget,
            cache: Mutex::new(self.cache.lock().expect("cache lock").clone()),
        }
    }
}

impl std::fmt::Debug for SolvedSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolvedSystem").field("rules", &self.rules).finish()
    }
}

struct Walk {
    count: usize,
    stack: Vec<Jet>,
}

impl SolvedSystem {
    pub fn empty(space: &JetSpace, ranking: Ranking) -> SolvedSystem {
        SolvedSystem {
            space: space.clone(),
            ranking,
            rules: Vec::new(),
            budget: default_budget(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_budget(mut self, budget: usize) -> SolvedSystem {
        self.budget = budget;
        self
    }

    pub fn set_budget(&mut self, budget: usize) {
        self.budget = budget;
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn ranking(&self) -> &Ranking {
        &self.ranking
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule_for(&self, lead: &Jet) -> Option<&Rule> {
        self.rules.iter().find(|r| &r.lead == lead)
    }

    fn invalidate(&mut self) {
        self.cache.get_mut().expect("cache lock").clear();
    }

    /// Add a rule with a designated lead, bypassing the ranking.
    pub fn add_rule(&mut self, lead: Jet, rhs: Expression, source: &str) {
        self.rules.push(Rule { lead, rhs, source: source.to_string() });
        self.invalidate();
    }

    /// Orient `e = 0` by its ranking-maximal jet and add it, requeueing
    /// rules whose lead becomes reducible. Returns the number of new rules.
    pub fn add_equation(&mut self, name: &str, e: &Expression) -> Result<usize, SystemError> {
        let mut queue = VecDeque::new();
        queue.push_back((name.to_string(), e.clone()));
        let mut added = 0;
        while let Some((name, e)) = queue.pop_front() {
            let r = self.reduce(&e)?;
            if r.is_zero() {
                continue;
            }
            let r = if r.den().is_one() { r } else { Expression::from_poly(r.num().clone()) };
            let (lead, rhs) = self.orient(&name, &r)?;
            let mut kept = Vec::new();
            for old in self.rules.drain(..) {
                if old.lead.is_derivative_of(&lead) {
                    let back = Expression::atom(Atom::Jet(old.lead.clone())) - &old.rhs;
                    queue.push_back((old.source, back));
                } else {
                    kept.push(old);
                }
            }
            self.rules = kept;
            self.rules.push(Rule { lead, rhs, source: name });
            self.invalidate();
            added += 1;
        }
        Ok(added)
    }

    /// Leading jet and solved right side of `e = 0`.
    pub fn orient(&self, name: &str, e: &Expression) -> Result<(Jet, Expression), SystemError> {
        let jets = e.jets();
        let lead = self.ranking.max(jets.iter()).cloned().ok_or_else(|| SystemError::NotSolvable {
            equation: name.to_string(),
            reason: format!("no jet left in nonzero residual {}", e),
        })?;
        self.solve_for(name, e, &lead).map(|rhs| (lead, rhs))
    }

    pub fn solve_for(&self, name: &str, e: &Expression, lead: &Jet) -> Result<Expression, SystemError> {
        let la = Atom::Jet(lead.clone());
        let hidden = e.atoms().into_iter().any(|a| match &a {
            Atom::Sqrt(x) => x.as_jet() == Some(lead),
            Atom::Pow { base, .. } => lead.derivs().is_empty() && base == &lead.field,
            _ => false,
        });
        let fail = |why: &str| SystemError::NotSolvable { equation: name.to_string(), reason: why.to_string() };
        if hidden {
            return Err(fail("leading jet occurs inside a root or symbolic power"));
        }
        let (a, b) = e.affine_in(&la).ok_or_else(|| fail("not affine in its leading jet"))?;
        if a.is_zero() {
            return Err(fail("leading jet has zero coefficient"));
        }
        Ok(b.neg().checked_div(&a)?)
    }

    fn lookup(&self, j: &Jet) -> Option<Option<Expression>> {
        self.cache.lock().expect("cache lock").get(j).cloned()
    }

    fn reduced_jet(&self, j: &Jet, w: &mut Walk) -> Result<Option<Expression>, SystemError> {
        if let Some(v) = self.lookup(j) {
            return Ok(v);
        }
        let rule = match self.rules.iter().find(|r| j.is_derivative_of(&r.lead)) {
            Some(r) => r,
            None => {
                self.cache.lock().expect("cache lock").insert(j.clone(), None);
                return Ok(None);
            }
        };
        if w.stack.contains(j) {
            return Err(SystemError::NonTermination { budget: self.budget });
        }
        w.count += 1;
        if w.count > self.budget {
            return Err(SystemError::NonTermination { budget: self.budget });
        }
        w.stack.push(j.clone());
        let value = if *j == rule.lead {
            self.reduce_walk(&rule.rhs, w)?
        } else {
            let extra = j.quotient(&rule.lead);
            let x: &Symbol = &extra[0].0;
            let lower = j.lower(x).expect("excess derivative");
            let base = match self.reduced_jet(&lower, w)? {
                Some(v) => v,
                None => Expression::atom(Atom::Jet(lower)),
            };
            let d = self.space.total_derivative(&base, x)?;
            self.reduce_walk(&d, w)?
        };
        w.stack.pop();
        self.cache.lock().expect("cache lock").insert(j.clone(), Some(value.clone()));
        Ok(Some(value))
    }

    fn reduce_walk(&self, e: &Expression, w: &mut Walk) -> Result<Expression, SystemError> {
        if self.rules.is_empty() {
            return Ok(e.clone());
        }
        let mut map = HashMap::new();
        for a in e.atoms() {
            if let Atom::Jet(j) = &a {
                if let Some(v) = self.reduced_jet(j, w)? {
                    map.insert(a.clone(), v);
                }
            }
        }
        Ok(e.substitute(&map)?)
    }

    /// Normal form modulo the rules and all their prolongations.
    pub fn reduce(&self, e: &Expression) -> Result<Expression, SystemError> {
        self.reduce_counted(e).map(|r| r.0)
    }

    /// Reduction together with the number of rule applications it took.
    pub fn reduce_counted(&self, e: &Expression) -> Result<(Expression, usize), SystemError> {
        let mut w = Walk { count: 0, stack: Vec::new() };
        let r = self.reduce_walk(e, &mut w)?;
        Ok((r, w.count))
    }

    /// The reduced value of a jet, or the jet itself when irreducible.
    pub fn reduce_jet(&self, j: &Jet) -> Result<Expression, SystemError> {
        let mut w = Walk { count: 0, stack: Vec::new() };
        Ok(self.reduced_jet(j, &mut w)?.unwrap_or_else(|| Expression::atom(Atom::Jet(j.clone()))))
    }

    pub fn is_reducible(&self, j: &Jet) -> bool {
        self.rules.iter().any(|r| j.is_derivative_of(&r.lead))
    }

    /// Integrability conditions between rules of the same field: for leads
    /// l1, l2 the difference of the two prolongations to lcm(l1, l2).
    /// Only rules whose field is in `fields` are paired (all when `None`).
    pub fn critical_pairs(&self, fields: Option<&[Symbol]>) -> Result<Vec<(String, Expression)>, SystemError> {
        let mut out = Vec::new();
        for (name, d) in self.critical_differences(fields)? {
            let c = self.reduce(&d)?;
            if !c.is_zero() {
                out.push((name, c));
            }
        }
        Ok(out)
    }

    /// The unreduced differences behind [`SolvedSystem::critical_pairs`].
    pub fn critical_differences(&self, fields: Option<&[Symbol]>) -> Result<Vec<(String, Expression)>, SystemError> {
        let mut out = Vec::new();
        for (i, r1) in self.rules.iter().enumerate() {
            for r2 in &self.rules[i + 1..] {
                if r1.lead.field != r2.lead.field {
                    continue;
                }
                if let Some(fs) = fields {
                    if !fs.contains(&r1.lead.field) {
                        continue;
                    }
                }
                let l = r1.lead.lcm(&r2.lead);
                let v1 = self.space.derivative_along(&r1.rhs, &l.quotient(&r1.lead))?;
                let v2 = self.space.derivative_along(&r2.rhs, &l.quotient(&r2.lead))?;
                out.push((format!("{} ~ {}", r1.source, r2.source), v1 - v2));
            }
        }
        Ok(out)
    }
}

/// Solve every equation and auxiliary relation of `sys` for its leading jet.
pub fn solve_leading(sys: &PDESystem, ranking: &Ranking) -> Result<SolvedSystem, SystemError> {
    let mut s = SolvedSystem::empty(&sys.space, ranking.clone());
    for eq in sys.equations.iter().chain(&sys.aux) {
        s.add_equation(&eq.name, &eq.residual())?;
    }
    Ok(s)
}
