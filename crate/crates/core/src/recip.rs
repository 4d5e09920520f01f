//! Reciprocal transformations generated by a conserved pair.
//!
//! A transform turns the independent variable `x_p` (the pivot) into a
//! dependent field `X(z)` of new variables `z`, with `dz_p` the closed
//! one-form built from a conserved pair and `dz_i = dx_i` otherwise.

use crate::expr::{Atom, ExprError, Expression, Jet, Symbol};
use crate::jetspace::{JetError, JetSpace};
use crate::system::{
    verify_conserved, ConservedPair, Equation, OneForm, PDESystem, Ranking, SolvedSystem, SystemError,
};
use std::collections::HashMap;
use std::sync::Mutex;

pub use crate::expr::Q;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecipError {
    #[error("the pivot coefficient of d{0} vanishes")]
    ZeroPivot(String),
    #[error("field `{0}` cannot be eliminated with the available relations")]
    UneliminableField(String),
    #[error("transform cannot be inverted: {0}")]
    NotInvertible(String),
    #[error("equation `{0}` is not in conservative form modulo the system")]
    NotConservative(String),
    #[error("invalid transform: {0}")]
    Invalid(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

impl RecipError {
    pub fn is_budget(&self) -> bool {
        matches!(self, RecipError::System(e) if e.is_budget())
    }
}

/// Orders names like `z0 < z1 < z10` and plain names alphabetically.
fn natural_key(s: &Symbol) -> (String, u64, String) {
    let t = s.as_str();
    let cut = t.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    let n = t[cut..].parse::<u64>().unwrap_or(0);
    (t[..cut].to_string(), n, t.to_string())
}

pub struct ReciprocalTransform {
    source: JetSpace,
    target: JetSpace,
    pivot: Symbol,
    target_pivot: Symbol,
    renames: Vec<(Symbol, Symbol)>,
    aux_vars: Vec<Symbol>,
    new_field: Symbol,
    demoted: Option<Symbol>,
    gradient: Vec<(Symbol, Expression)>,
    relations: Vec<Equation>,
    adjoined: Vec<Equation>,
    eliminate: Vec<Symbol>,
    cache: Mutex<HashMap<Jet, Expression>>,
}

impl Clone for ReciprocalTransform {
    fn clone(&self) -> Self {
        ReciprocalTransform {
            source: self.source.clone(),
            target: self.target.clone(),
            pivot: self.pivot.clone(),
            target_pivot: self.target_pivot.clone(),
            renames: self.renames.clone(),
            aux_vars: self.aux_vars.clone(),
            new_field: self.new_field.clone(),
            demoted: self.demoted.clone(),
            gradient: self.gradient.clone(),
            relations: self.relations.clone(),
            adjoined: self.adjoined.clone(),
            eliminate: self.eliminate.clone(),
            cache: Mutex::new(self.cache.lock().expect("rule cache").clone()),
        }
    }
}

impl std::fmt::Debug for ReciprocalTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReciprocalTransform")
            .field("pivot", &self.pivot)
            .field("target_pivot", &self.target_pivot)
            .field("new_field", &self.new_field)
            .field("gradient", &self.gradient)
            .finish()
    }
}

/// Step-by-step construction of a [`ReciprocalTransform`].
#[derive(Clone, Debug)]
pub struct TransformBuilder {
    source: JetSpace,
    pivot: Symbol,
    coeffs: Vec<(Symbol, Expression)>,
    gradient: Vec<(Symbol, Expression)>,
    target_pivot: Option<Symbol>,
    renames: Vec<(Symbol, Symbol)>,
    aux_vars: Vec<(Symbol, Expression)>,
    new_field: Option<Symbol>,
    demoted: Option<Symbol>,
    target_fields: Vec<Symbol>,
    target_params: Vec<Symbol>,
    relations: Vec<Equation>,
    adjoined: Vec<Equation>,
    eliminate: Option<Vec<Symbol>>,
    order: Option<u32>,
}

impl TransformBuilder {
    fn blank(source: &JetSpace, pivot: &str) -> TransformBuilder {
        TransformBuilder {
            source: source.clone(),
            pivot: Symbol::new(pivot),
            coeffs: Vec::new(),
            gradient: Vec::new(),
            target_pivot: None,
            renames: Vec::new(),
            aux_vars: Vec::new(),
            new_field: None,
            demoted: None,
            target_fields: Vec::new(),
            target_params: Vec::new(),
            relations: Vec::new(),
            adjoined: Vec::new(),
            eliminate: None,
            order: None,
        }
    }

    /// The one-form `dz = A dx_{var'} + A' dx_{var}` of a conserved pair.
    pub fn from_pair(source: &JetSpace, pair: &ConservedPair, pivot: &str) -> TransformBuilder {
        let mut b = TransformBuilder::blank(source, pivot);
        b.coeffs.push((pair.var_prime.clone(), pair.a.clone()));
        b.coeffs.push((pair.var.clone(), pair.a_prime.clone()));
        b
    }

    pub fn from_one_form(source: &JetSpace, form: &OneForm, pivot: &str) -> TransformBuilder {
        let mut b = TransformBuilder::blank(source, pivot);
        b.coeffs = form.coeffs.clone();
        b
    }

    /// Give the gradient of the new field directly; see [`Self::gradient`].
    pub fn from_gradient(source: &JetSpace, pivot: &str) -> TransformBuilder {
        TransformBuilder::blank(source, pivot)
    }

    /// An extra `coeff dx_var` term of the one-form.
    pub fn extra(mut self, var: &str, coeff: Expression) -> Self {
        self.coeffs.push((Symbol::new(var), coeff));
        self
    }

    /// `X_{z} = value`, with `z` a target variable.
    pub fn gradient(mut self, z: &str, value: Expression) -> Self {
        self.gradient.push((Symbol::new(z), value));
        self
    }

    pub fn target_pivot(mut self, z: &str) -> Self {
        self.target_pivot = Some(Symbol::new(z));
        self
    }

    pub fn rename(mut self, x: &str, z: &str) -> Self {
        self.renames.push((Symbol::new(x), Symbol::new(z)));
        self
    }

    /// A target variable without a source counterpart, with `X_{z} = value`.
    pub fn aux_var(mut self, z: &str, value: Expression) -> Self {
        self.aux_vars.push((Symbol::new(z), value));
        self
    }

    pub fn new_field(mut self, name: &str) -> Self {
        self.new_field = Some(Symbol::new(name));
        self
    }

    /// A source field that becomes the target pivot variable.
    pub fn demote(mut self, field: &str) -> Self {
        self.demoted = Some(Symbol::new(field));
        self
    }

    /// Fields that exist only in the target space.
    pub fn target_fields(mut self, names: &[&str]) -> Self {
        self.target_fields.extend(names.iter().map(|s| Symbol::new(s)));
        self
    }

    pub fn target_params(mut self, names: &[&str]) -> Self {
        self.target_params.extend(names.iter().map(|s| Symbol::new(s)));
        self
    }

    /// A relation in source atoms, mapped through the rules and used for elimination.
    pub fn relation(mut self, eq: Equation) -> Self {
        self.relations.push(eq);
        self
    }

    /// A target-space equation used for elimination and kept in the output.
    pub fn adjoin(mut self, eq: Equation) -> Self {
        self.adjoined.push(eq);
        self
    }

    pub fn eliminate(mut self, fields: &[&str]) -> Self {
        self.eliminate = Some(fields.iter().map(|s| Symbol::new(s)).collect());
        self
    }

    pub fn order(mut self, p: u32) -> Self {
        self.order = Some(p);
        self
    }

    pub fn build(self) -> Result<ReciprocalTransform, RecipError> {
        let src = &self.source;
        if !src.is_indep(&self.pivot) {
            return Err(JetError::UnknownVariable(self.pivot.to_string()).into());
        }
        let target_pivot = self.target_pivot.clone().unwrap_or_else(|| Symbol::new("z0"));
        let mut renames = self.renames.clone();
        let mut next = 1;
        for x in src.indep() {
            if x == &self.pivot || renames.iter().any(|(a, _)| a == x) {
                continue;
            }
            loop {
                let z = Symbol::new(&format!("z{}", next));
                next += 1;
                if !renames.iter().any(|(_, b)| b == &z) && !self.aux_vars.iter().any(|(a, _)| a == &z) {
                    renames.push((x.clone(), z));
                    break;
                }
            }
        }
        for (x, _) in &renames {
            if !src.is_indep(x) || x == &self.pivot {
                return Err(RecipError::Invalid(format!("cannot rename `{}`", x)));
            }
        }
        let new_field = self.new_field.clone().unwrap_or_else(|| self.pivot.clone());
        let rename = |x: &Symbol| renames.iter().find(|(a, _)| a == x).map(|(_, b)| b.clone());

        let mut gradient = self.gradient.clone();
        if !self.coeffs.is_empty() {
            if !gradient.is_empty() {
                return Err(RecipError::Invalid("both a one-form and a gradient were given".into()));
            }
            let mut cp = Expression::zero();
            for (v, c) in &self.coeffs {
                if !src.is_indep(v) {
                    return Err(JetError::UnknownVariable(v.to_string()).into());
                }
                if v == &self.pivot {
                    cp = &cp + c;
                }
            }
            if cp.is_zero() {
                return Err(RecipError::ZeroPivot(target_pivot.to_string()));
            }
            gradient.push((target_pivot.clone(), cp.inv()?));
            for x in src.indep() {
                if x == &self.pivot {
                    continue;
                }
                let mut c = Expression::zero();
                for (v, cv) in &self.coeffs {
                    if v == x {
                        c = &c + cv;
                    }
                }
                gradient.push((rename(x).expect("renamed"), (c / &cp).neg()));
            }
        }
        match gradient.iter().find(|(z, _)| z == &target_pivot) {
            Some((_, g)) if g.is_zero() => return Err(RecipError::ZeroPivot(target_pivot.to_string())),
            Some(_) => {}
            None => return Err(RecipError::Invalid(format!("no gradient along {}", target_pivot))),
        }
        gradient.extend(self.aux_vars.iter().cloned());

        let mut tvars: Vec<Symbol> = src
            .indep()
            .iter()
            .map(|x| {
                if x == &self.pivot {
                    target_pivot.clone()
                } else {
                    rename(x).expect("renamed")
                }
            })
            .collect();
        tvars.extend(self.aux_vars.iter().map(|(z, _)| z.clone()));
        let prefix = |s: &Symbol| natural_key(s).0;
        if tvars.iter().all(|z| prefix(z) == prefix(&tvars[0])) {
            tvars.sort_by_key(natural_key);
        }
        let mut fields = vec![new_field.clone()];
        for f in src.dep() {
            if Some(f) != self.demoted.as_ref() && f != &new_field {
                fields.push(f.clone());
            }
        }
        for f in &self.target_fields {
            if !fields.contains(f) {
                fields.push(f.clone());
            }
        }
        let mut params = src.params().to_vec();
        for p in &self.target_params {
            if !params.contains(p) {
                params.push(p.clone());
            }
        }
        let order = self.order.unwrap_or(src.order() + 1);
        let target = JetSpace::from_symbols(tvars, fields, params, order)?;
        for (z, _) in &gradient {
            if !target.is_indep(z) {
                return Err(JetError::UnknownVariable(z.to_string()).into());
            }
        }
        let eliminate = match self.eliminate.clone() {
            Some(e) => e,
            None => {
                let mut used = std::collections::BTreeSet::new();
                for e in gradient.iter().map(|(_, g)| g.clone()).chain(self.relations.iter().map(|r| r.residual())) {
                    used.extend(e.jets().into_iter().map(|j| j.field));
                }
                src.dep()
                    .iter()
                    .filter(|f| Some(*f) != self.demoted.as_ref() && used.contains(*f))
                    .cloned()
                    .collect()
            }
        };
        Ok(ReciprocalTransform {
            source: self.source,
            target,
            pivot: self.pivot,
            target_pivot,
            renames,
            aux_vars: self.aux_vars.into_iter().map(|(z, _)| z).collect(),
            new_field,
            demoted: self.demoted,
            gradient,
            relations: self.relations,
            adjoined: self.adjoined,
            eliminate,
            cache: Mutex::new(HashMap::new()),
        })
    }
}

/// Build from a conserved pair, optional extra one-form terms and the pivot,
/// with target variables `z0` (pivot), `z1`, `z2`, ... in declaration order.
pub fn build(
    source: &JetSpace,
    pair: &ConservedPair,
    extra: &[(&str, Expression)],
    pivot: &str,
    new_field: &str,
) -> Result<ReciprocalTransform, RecipError> {
    let mut b = TransformBuilder::from_pair(source, pair, pivot).new_field(new_field);
    for (v, c) in extra {
        b = b.extra(v, c.clone());
    }
    b.build()
}

/// The result of applying a transform, with the elimination system it used.
#[derive(Clone, Debug)]
pub struct Applied {
    pub system: PDESystem,
    pub elimination: SolvedSystem,
}

impl ReciprocalTransform {
    pub fn source(&self) -> &JetSpace {
        &self.source
    }

    pub fn target(&self) -> &JetSpace {
        &self.target
    }

    pub fn pivot(&self) -> &Symbol {
        &self.pivot
    }

    pub fn target_pivot(&self) -> &Symbol {
        &self.target_pivot
    }

    pub fn new_field(&self) -> &Symbol {
        &self.new_field
    }

    /// The source field that becomes the target pivot variable, if any.
    pub fn demoted(&self) -> Option<&Symbol> {
        self.demoted.as_ref()
    }

    pub fn renames(&self) -> &[(Symbol, Symbol)] {
        &self.renames
    }

    pub fn eliminated(&self) -> &[Symbol] {
        &self.eliminate
    }

    /// `X_{z} = value` for every target variable with a known gradient.
    pub fn gradient(&self) -> &[(Symbol, Expression)] {
        &self.gradient
    }

    pub fn gradient_of(&self, z: &str) -> Option<&Expression> {
        self.gradient.iter().find(|(v, _)| v.as_str() == z).map(|(_, g)| g)
    }

    /// Target variable of a source variable.
    pub fn target_var(&self, x: &Symbol) -> Option<Symbol> {
        if x == &self.pivot {
            return Some(self.target_pivot.clone());
        }
        self.renames.iter().find(|(a, _)| a == x).map(|(_, b)| b.clone())
    }

    fn grad_atom(&self, z: &Symbol) -> Expression {
        Expression::atom(Atom::Jet(Jet::new(self.new_field.clone(), [(z.clone(), 1)])))
    }

    /// The one-form `dz_p = sum c_x dx` recovered from the gradient.
    pub fn one_form(&self) -> Result<OneForm, RecipError> {
        let gp = self.gradient_of(self.target_pivot.as_str()).expect("pivot gradient");
        let mut coeffs = vec![(self.pivot.clone(), gp.inv()?)];
        for (x, z) in &self.renames {
            if let Some(g) = self.gradient_of(z.as_str()) {
                coeffs.push((x.clone(), (g / gp).neg()));
            }
        }
        Ok(OneForm { target: self.target_pivot.clone(), coeffs })
    }

    /// The target form `dX = sum X_{z} dz` with coefficients from the gradient.
    pub fn target_one_form(&self) -> OneForm {
        OneForm { target: self.new_field.clone(), coeffs: self.gradient.clone() }
    }

    /// The first-order operator D_x expressed in target derivatives.
    pub fn operator(&self, x: &Symbol, e: &Expression) -> Result<Expression, RecipError> {
        let t = &self.target;
        let zp = &self.target_pivot;
        let dp = t.total_derivative(e, zp)?;
        let xp = self.grad_atom(zp);
        if x == &self.pivot {
            return Ok(dp.checked_div(&xp)?);
        }
        let z = self.target_var(x).ok_or_else(|| JetError::UnknownVariable(x.to_string()))?;
        let dz = t.total_derivative(e, &z)?;
        Ok(dz - self.grad_atom(&z) * dp / xp)
    }

    /// The target expression of a source jet, by recursive application of
    /// the first-order operators.
    pub fn rule(&self, j: &Jet) -> Result<Expression, RecipError> {
        if let Some(v) = self.cache.lock().expect("rule cache").get(j) {
            return Ok(v.clone());
        }
        let value = match j.derivs().first() {
            None => {
                if Some(&j.field) == self.demoted.as_ref() {
                    Expression::atom(Atom::Indep(self.target_pivot.clone()))
                } else {
                    Expression::atom(Atom::Jet(j.clone()))
                }
            }
            Some((x, _)) => {
                if !self.source.is_indep(x) {
                    return Err(JetError::UnknownVariable(x.to_string()).into());
                }
                let lower = j.lower(x).expect("derivative present");
                let base = self.rule(&lower)?;
                self.operator(x, &base)?
            }
        };
        self.cache.lock().expect("rule cache").insert(j.clone(), value.clone());
        Ok(value)
    }

    /// Rules for every jet of `field` of order 1..=p.
    pub fn derivative_rules(&self, field: &str, p: u32) -> Result<Vec<(Jet, Expression)>, RecipError> {
        let f = Symbol::new(field);
        if !self.source.is_field(&f) {
            return Err(JetError::UnknownField(field.into()).into());
        }
        if p >= self.target.order() {
            return Err(JetError::OrderOverflow { jet: format!("{} rules of order {}", field, p), order: self.target.order() }
                .into());
        }
        let mut out = Vec::new();
        for j in self.source.jets_of(&f, p) {
            if j.order() > 0 {
                let r = self.rule(&j)?;
                out.push((j, r));
            }
        }
        Ok(out)
    }

    /// Rewrite an expression in source atoms into target atoms. Atoms that
    /// do not belong to the source space are kept.
    pub fn map_expr(&self, e: &Expression) -> Result<Expression, RecipError> {
        let mut map = HashMap::new();
        for a in e.atoms() {
            let v = match &a {
                Atom::Indep(x) if self.source.is_indep(x) => {
                    if x == &self.pivot {
                        Expression::atom(Atom::Jet(Jet::plain(self.new_field.clone())))
                    } else {
                        Expression::atom(Atom::Indep(self.target_var(x).expect("renamed")))
                    }
                }
                Atom::Jet(j) if self.source.is_field(&j.field) => self.rule(j)?,
                _ => continue,
            };
            map.insert(a.clone(), v);
        }
        Ok(e.substitute(&map)?)
    }

    fn ranking(&self) -> Ranking {
        Ranking::for_space(&self.target).eliminating(&self.eliminate)
    }

    /// The solved form of the gradient relations, the mapped relations and
    /// the adjoined equations, with eliminated fields ranked highest.
    pub fn elimination_system(&self) -> Result<SolvedSystem, RecipError> {
        let mut s = SolvedSystem::empty(&self.target, self.ranking());
        for (z, g) in &self.gradient {
            let e = self.grad_atom(z) - self.map_expr(g)?;
            s.add_equation(&format!("{}_{}", self.new_field, z), &e)?;
        }
        for r in &self.relations {
            s.add_equation(&r.name, &self.map_expr(&r.residual())?)?;
        }
        for a in &self.adjoined {
            s.add_equation(&a.name, &a.residual())?;
        }
        Ok(s)
    }

    fn eliminated_in(&self, e: &Expression) -> Option<Symbol> {
        e.jets().into_iter().map(|j| j.field).find(|f| self.eliminate.contains(f))
    }

    pub fn apply(&self, sys: &PDESystem) -> Result<PDESystem, RecipError> {
        self.apply_detailed(sys).map(|a| a.system)
    }

    /// Map every equation, reduce it modulo the elimination system and keep
    /// what survives. Equations that still involve an eliminated field are
    /// solved for it instead; integrability conditions between rules of
    /// eliminated fields are added to the result.
    pub fn apply_detailed(&self, sys: &PDESystem) -> Result<Applied, RecipError> {
        if sys.space.indep() != self.source.indep() {
            return Err(SystemError::SpaceMismatch.into());
        }
        let mut s = self.elimination_system()?;
        let mut out = PDESystem::new(&format!("{}'", sys.name), &self.target);
        out.notes.push(format!(
            "{} becomes the field {}; d{} = {}",
            self.pivot,
            self.new_field,
            self.target_pivot,
            self.one_form()?
        ));
        for (z, g) in &self.gradient {
            out.notes.push(format!("relation {}_{} = {}", self.new_field, z, g));
        }
        for r in &self.relations {
            out.notes.push(format!("relation {:?}", r));
        }
        let mut kept: Vec<(bool, Equation)> = Vec::new();
        let all = sys.equations.iter().map(|e| (true, e)).chain(sys.aux.iter().map(|e| (false, e)));
        for (main, eq) in all {
            let r = s.reduce(&self.map_expr(&eq.residual())?)?;
            if r.is_zero() {
                out.notes.push(format!("{} holds identically", eq.name));
            } else if let Some(f) = self.eliminated_in(&r) {
                s.add_equation(&eq.name, &r)?;
                out.notes.push(format!("{} used to eliminate {}", eq.name, f));
            } else {
                kept.push((main, Equation::zero(&eq.name, r)));
            }
        }
        for (main, eq) in kept {
            let r = s.reduce(&eq.rhs.neg().add(&eq.lhs))?;
            if r.is_zero() {
                continue;
            }
            if let Some(f) = self.eliminated_in(&r) {
                return Err(RecipError::UneliminableField(f.to_string()));
            }
            let e = Equation::zero(&eq.name, r);
            if main {
                out.equations.push(e);
            } else {
                out.aux.push(e);
            }
        }
        for (name, c) in s.critical_pairs(Some(&self.eliminate))? {
            if let Some(f) = self.eliminated_in(&c) {
                return Err(RecipError::UneliminableField(f.to_string()));
            }
            out.notes.push(format!("integrability condition {}", name));
            out.equations.push(Equation::zero(&format!("integrability {}", name), c));
        }
        for a in &self.adjoined {
            out.equations.push(a.clone());
        }
        Ok(Applied { system: out, elimination: s })
    }

    /// Exchange the roles of the pivot variable and the new field.
    pub fn invert(&self) -> Result<ReciprocalTransform, RecipError> {
        if !self.aux_vars.is_empty() {
            return Err(RecipError::NotInvertible("auxiliary variables have no source counterpart".into()));
        }
        let form = self.one_form()?;
        let new_field = match &self.demoted {
            Some(d) => d.clone(),
            None => {
                let s = self.target_pivot.as_str();
                let mut c = s.chars();
                let first = c.next().map(|f| f.to_uppercase().collect::<String>()).unwrap_or_default();
                Symbol::new(&format!("{}{}", first, c.as_str()))
            }
        };
        let mut b = TransformBuilder::from_gradient(&self.target, self.target_pivot.as_str())
            .target_pivot(self.pivot.as_str())
            .new_field(new_field.as_str())
            .demote(self.new_field.as_str())
            .order(self.target.order() + 1)
            .eliminate(&[new_field.as_str()]);
        for (x, z) in &self.renames {
            b = b.rename(z.as_str(), x.as_str());
        }
        for (x, c) in &form.coeffs {
            b = b.gradient(x.as_str(), c.clone());
        }
        for r in &self.relations {
            b = b.adjoin(r.clone());
        }
        let fields: Vec<&str> = self
            .source
            .dep()
            .iter()
            .filter(|f| !self.target.is_field(f) && *f != &new_field)
            .map(|f| f.as_str())
            .collect();
        b = b.target_fields(&fields);
        b.build()
    }

    /// The same transform acting on additional fields present in both spaces.
    pub fn with_fields(&self, fields: &[&str]) -> Result<ReciprocalTransform, RecipError> {
        let src = self.source.add_fields(fields)?;
        let tgt = self.target.add_fields(fields)?;
        let mut t = self.clone();
        t.source = src;
        t.target = tgt;
        Ok(t)
    }

    /// The same transform with a different maximal jet order on both sides.
    pub fn with_order(&self, source_order: u32) -> ReciprocalTransform {
        let mut t = self.clone();
        t.source = self.source.with_order(source_order);
        t.target = self.target.with_order(source_order + 1);
        t.cache = Mutex::new(HashMap::new());
        t
    }

    /// A plain-text description listing the pivot, one-form, gradient
    /// relations and the rules of `field` up to order `p`.
    pub fn describe(&self, field: &str, p: u32) -> Result<TransformDoc, RecipError> {
        let form = self.one_form()?;
        Ok(TransformDoc {
            pivot: self.pivot.to_string(),
            target_pivot: self.target_pivot.to_string(),
            new_field: self.new_field.to_string(),
            one_form: form
                .coeffs
                .iter()
                .map(|(x, c)| (x.to_string(), crate::expr::render::to_latex(c)))
                .collect(),
            relations: self
                .gradient
                .iter()
                .map(|(z, g)| (format!("{}_{{{}}}", self.new_field, z), crate::expr::render::to_latex(g)))
                .collect(),
            rules: self
                .derivative_rules(field, p)?
                .into_iter()
                .map(|(j, e)| (j.name_with(Some(self.source.indep())), crate::expr::render::to_latex(&e)))
                .collect(),
        })
    }
}

/// Serializable summary of a transform.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformDoc {
    pub pivot: String,
    pub target_pivot: String,
    pub new_field: String,
    pub one_form: Vec<(String, String)>,
    pub relations: Vec<(String, String)>,
    pub rules: Vec<(String, String)>,
}

/// Introduce a potential `w` from pairs D_var A = D_var' A' holding modulo
/// `sys`: w_{var'} = scale·A and w_{var} = scale·A'. The result carries the
/// definitions as equations and `sys` as auxiliary relations.
pub fn potentialize(
    sys: &PDESystem,
    pairs: &[ConservedPair],
    new_field: &str,
    scale: &Q,
) -> Result<PDESystem, RecipError> {
    let solved = sys.solve()?;
    for p in pairs {
        let rep = verify_conserved(p, &solved)?;
        if !rep.holds() {
            return Err(RecipError::NotConservative(format!("D_{} ({}) = D_{} ({})", p.var, p.a, p.var_prime, p.a_prime)));
        }
    }
    let space = sys.space.add_fields(&[new_field])?;
    let mut out = PDESystem::new(&format!("potential {} of {}", new_field, sys.name), &space);
    let w = |x: &Symbol| Expression::atom(Atom::Jet(Jet::new(Symbol::new(new_field), [(x.clone(), 1)])));
    for p in pairs {
        for (x, v) in [(&p.var_prime, &p.a), (&p.var, &p.a_prime)] {
            let eq = Equation::new(&format!("{}_{}", new_field, x), w(x), v.scale(scale));
            if !out.equations.iter().any(|e| e.lhs == eq.lhs && e.rhs == eq.rhs) {
                out.equations.push(eq);
            }
        }
    }
    out.aux = sys.equations.iter().chain(&sys.aux).cloned().collect();
    out.notes.push(format!("{} defined from {} conservation laws", new_field, pairs.len()));
    Ok(out)
}

/// Integrability conditions of the potential definitions, i.e. equal mixed
/// partials of the potential, reduced modulo the definitions alone.
pub fn potential_closure(pot: &PDESystem, new_field: &str) -> Result<Vec<Expression>, RecipError> {
    let f = Symbol::new(new_field);
    let mut s = SolvedSystem::empty(&pot.space, Ranking::for_space(&pot.space).eliminating(&[f.clone()]));
    for eq in &pot.equations {
        s.add_equation(&eq.name, &eq.residual())?;
    }
    Ok(s.critical_pairs(Some(&[f]))?.into_iter().map(|(_, c)| c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse_expression;

    fn chh1_space() -> JetSpace {
        JetSpace::declare(&["X", "Y", "T"], &["P", "Delta", "Omega1"], 5).unwrap()
    }

    fn ex(s: &str, sp: &JetSpace) -> Expression {
        parse_expression(s, sp).unwrap()
    }

    fn chh_transform() -> ReciprocalTransform {
        let sp = chh1_space();
        let pair = ConservedPair::new(ex("P", &sp), "Y", ex("-1/2*P*Omega1", &sp), "X").unwrap();
        build(&sp, &pair, &[("T", ex("Delta", &sp))], "X", "X").unwrap()
    }

    #[test]
    fn chh_inverse_relations() {
        let t = chh_transform();
        let tg = t.target().clone();
        assert_eq!(t.gradient_of("z0").unwrap(), &ex("1/P", &tg));
        assert_eq!(t.gradient_of("z1").unwrap(), &ex("Omega1/2", &tg));
        assert_eq!(t.gradient_of("z2").unwrap(), &ex("-Delta/P", &tg));
    }

    #[test]
    fn first_order_rules() {
        let t = chh_transform();
        let tg = t.target().clone();
        let rules = t.derivative_rules("P", 1).unwrap();
        let get = |v: &str| rules.iter().find(|(j, _)| j.count(&Symbol::new(v)) == 1).unwrap().1.clone();
        assert_eq!(get("X"), ex("P_{z0}/X_{z0}", &tg));
        assert_eq!(get("Y"), ex("P_{z1} - X_{z1}/X_{z0}*P_{z0}", &tg));
        let s = t.elimination_system().unwrap();
        assert_eq!(s.reduce(&get("X")).unwrap(), ex("-X_{z0 z0}/X_{z0}^3", &tg));
    }

    #[test]
    fn zero_pivot() {
        let sp = chh1_space();
        let pair = ConservedPair::new(Expression::zero(), "Y", ex("P", &sp), "X").unwrap();
        assert!(matches!(build(&sp, &pair, &[], "X", "X"), Err(RecipError::ZeroPivot(_))));
    }

    #[test]
    fn identity_transform() {
        let sp = JetSpace::declare(&["x", "t"], &["u"], 3).unwrap();
        let pair = ConservedPair::new(Expression::zero(), "x", Expression::one(), "t").unwrap();
        let t = TransformBuilder::from_pair(&sp, &pair, "x")
            .target_pivot("x")
            .rename("t", "t")
            .new_field("X")
            .build()
            .unwrap();
        let s = t.elimination_system().unwrap();
        for (j, e) in t.derivative_rules("u", 2).unwrap() {
            assert_eq!(s.reduce(&e).unwrap(), Expression::atom(Atom::Jet(j)));
        }
        let mut sys = PDESystem::new("burgers", &sp);
        sys.push_text("b", "u_t = u*u_x + u_xx").unwrap();
        let out = t.apply(&sys).unwrap();
        assert_eq!(out.equations.len(), 1);
        assert!(crate::system::systems_equivalent(&out, &sys).unwrap().holds());
    }

    #[test]
    fn invert_twice_gives_same_rules() {
        let t = chh_transform();
        let ii = t.invert().unwrap().invert().unwrap();
        assert_eq!(ii.new_field(), t.new_field());
        assert_eq!(ii.target().indep(), t.target().indep());
        for (a, b) in t.derivative_rules("P", 2).unwrap().iter().zip(ii.derivative_rules("P", 2).unwrap()) {
            assert_eq!(a, &b);
        }
    }

    #[test]
    fn toy_potential() {
        let sp = JetSpace::declare(&["x", "t"], &["u", "v"], 3).unwrap();
        let mut sys = PDESystem::new("toy", &sp);
        sys.push_text("a", "u_t = v_x").unwrap();
        let pair = ConservedPair::new(ex("u", &sp), "t", ex("v", &sp), "x").unwrap();
        let pot = potentialize(&sys, &[pair], "w", &Q::from_integer(1.into())).unwrap();
        let w = pot.space.clone();
        assert_eq!(pot.equations[0].lhs, ex("w_x", &w));
        assert_eq!(pot.equations[0].rhs, ex("u", &w));
        assert_eq!(pot.equations[1].rhs, ex("v", &w));
        let closure = potential_closure(&pot, "w").unwrap();
        assert_eq!(closure.len(), 1);
        let s = sys.solve().unwrap();
        assert!(s.reduce(&closure[0]).unwrap().is_zero());
        let bad = ConservedPair::new(ex("v", &sp), "t", ex("u", &sp), "x").unwrap();
        assert!(matches!(potentialize(&sys, &[bad], "w", &Q::from_integer(1.into())), Err(RecipError::NotConservative(_))));
    }
}
