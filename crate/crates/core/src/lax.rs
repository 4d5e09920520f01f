//! Scalar and 2x2 Lax pairs with a possibly non-isospectral parameter.

use crate::expr::{Atom, Expression, Jet, Poly, Symbol};
use crate::jetspace::{JetError, JetSpace};
use crate::recip::{RecipError, ReciprocalTransform};
use crate::numeric;
use crate::system::{Check, Equation, PDESystem, Ranking, Report, SolvedSystem, SystemError};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LaxError {
    #[error("`{0}` is not linear and homogeneous in the eigenfunctions")]
    NotLinearInEigenfunction(String),
    #[error("inconsistent reduction: {0}")]
    InconsistentReduction(String),
    #[error("invalid Lax pair: {0}")]
    Invalid(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Recip(#[from] RecipError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

impl LaxError {
    pub fn is_budget(&self) -> bool {
        match self {
            LaxError::System(e) => e.is_budget(),
            LaxError::Recip(e) => e.is_budget(),
            _ => false,
        }
    }
}

impl From<crate::expr::ExprError> for LaxError {
    fn from(e: crate::expr::ExprError) -> Self {
        LaxError::System(e.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaxKind {
    Scalar,
    Matrix2,
}

/// `residual = 0`, solved for the designated eigenfunction jet `lead`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaxEquation {
    pub name: String,
    pub lead: Jet,
    pub residual: Expression,
}

pub type Mat2 = [[Expression; 2]; 2];

/// Psi_x = U Psi and Psi_t = sum_j c_j Psi_{y_j} + V Psi.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixForm {
    pub x: Symbol,
    pub t: Symbol,
    pub u: Mat2,
    pub v: Mat2,
    pub transport: Vec<(Symbol, Expression)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaxPair {
    pub name: String,
    pub space: JetSpace,
    pub kind: LaxKind,
    pub eigen: Vec<Symbol>,
    pub equations: Vec<LaxEquation>,
    /// Constraints on the spectral parameter, e.g. lambda_X = 0.
    pub constraints: PDESystem,
    pub matrix: Option<MatrixForm>,
    pub notes: Vec<String>,
}

/// Multiplicative factor relating eigenfunctions across a transform.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeFactor(Expression);

impl GaugeFactor {
    pub fn new(g: Expression) -> Result<GaugeFactor, LaxError> {
        if g.is_zero() {
            return Err(LaxError::Invalid("gauge factor vanishes".into()));
        }
        Ok(GaugeFactor(g))
    }

    pub fn one() -> GaugeFactor {
        GaugeFactor(Expression::one())
    }

    pub fn value(&self) -> &Expression {
        &self.0
    }
}

fn eigen_degree(p: &Poly, exps: &[u32], eigen: &[Symbol]) -> u32 {
    p.vars()
        .iter()
        .zip(exps)
        .filter(|(a, _)| matches!(a, Atom::Jet(j) if eigen.contains(&j.field)))
        .map(|(_, e)| *e)
        .sum()
}

fn is_eigen(a: &Atom, eigen: &[Symbol]) -> bool {
    matches!(a, Atom::Jet(j) if eigen.contains(&j.field))
}

/// Coefficients of the eigenfunction jets of an expression that must be
/// linear and homogeneous in them.
pub fn eigen_coefficients(e: &Expression, eigen: &[Symbol]) -> Result<BTreeMap<Jet, Expression>, LaxError> {
    let bad = || LaxError::NotLinearInEigenfunction(e.to_string());
    if e.den().vars().iter().any(|a| is_eigen(a, eigen) && e.den().contains(a)) {
        return Err(bad());
    }
    let num = e.num();
    if num.terms().iter().any(|t| eigen_degree(num, &t.exps, eigen) != 1) {
        return Err(bad());
    }
    let den = Expression::from_poly(e.den().clone());
    let mut out = BTreeMap::new();
    for a in num.vars() {
        if let Atom::Jet(j) = a {
            if eigen.contains(&j.field) && num.contains(a) {
                let c = num.coeffs_in(a);
                let coeff = Expression::from_poly(c[1].clone()).checked_div(&den)?;
                out.insert(j.clone(), coeff);
            }
        }
    }
    Ok(out)
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

impl LaxPair {
    /// A pair from explicit equations with designated leading jets.
    pub fn new(
        name: &str,
        space: &JetSpace,
        kind: LaxKind,
        eigen: &[&str],
        equations: Vec<LaxEquation>,
    ) -> Result<LaxPair, LaxError> {
        let eigen: Vec<Symbol> = eigen.iter().map(|s| Symbol::new(s)).collect();
        for f in &eigen {
            if !space.is_field(f) {
                return Err(JetError::UnknownField(f.to_string()).into());
            }
        }
        for eq in &equations {
            if !eigen.contains(&eq.lead.field) {
                return Err(LaxError::Invalid(format!("lead of `{}` is not an eigenfunction jet", eq.name)));
            }
            let c = eigen_coefficients(&eq.residual, &eigen)?;
            if !c.contains_key(&eq.lead) {
                return Err(LaxError::Invalid(format!("`{}` does not contain its lead", eq.name)));
            }
        }
        Ok(LaxPair {
            name: name.to_string(),
            space: space.clone(),
            kind,
            eigen,
            equations,
            constraints: PDESystem::new(&format!("{} constraints", name), space),
            matrix: None,
            notes: Vec::new(),
        })
    }

    /// A 2x2 pair from its matrix form; the scalar equations are generated.
    pub fn matrix2(name: &str, space: &JetSpace, eigen: [&str; 2], form: MatrixForm) -> Result<LaxPair, LaxError> {
        let f: Vec<Expression> = eigen.iter().map(|e| Expression::atom(Atom::field(e))).collect();
        let mut eqs = Vec::new();
        for (i, e) in eigen.iter().enumerate() {
            let lead = Jet::new(Symbol::new(e), [(form.x.clone(), 1)]);
            let rhs = &form.u[i][0] * &f[0] + &form.u[i][1] * &f[1];
            eqs.push(LaxEquation {
                name: format!("{}_{}", e, form.x),
                residual: Expression::atom(Atom::Jet(lead.clone())) - rhs,
                lead,
            });
        }
        for (i, e) in eigen.iter().enumerate() {
            let lead = Jet::new(Symbol::new(e), [(form.t.clone(), 1)]);
            let mut rhs = &form.v[i][0] * &f[0] + &form.v[i][1] * &f[1];
            for (y, c) in &form.transport {
                rhs = rhs + c * Expression::atom(Atom::jet(e, &[(y.as_str(), 1)]));
            }
            eqs.push(LaxEquation {
                name: format!("{}_{}", e, form.t),
                residual: Expression::atom(Atom::Jet(lead.clone())) - rhs,
                lead,
            });
        }
        let mut lp = LaxPair::new(name, space, LaxKind::Matrix2, &eigen, eqs)?;
        lp.matrix = Some(form);
        Ok(lp)
    }

    pub fn with_constraint(mut self, name: &str, text: &str) -> Result<LaxPair, LaxError> {
        self.constraints.push_text(name, text)?;
        Ok(self)
    }

    pub fn with_constraints(mut self, c: &PDESystem) -> LaxPair {
        self.constraints.equations = c.equations.clone();
        self
    }

    /// Each equation solved for its lead: `lead = rhs`.
    pub fn solved_equations(&self) -> Result<Vec<(Jet, Expression)>, LaxError> {
        let s = SolvedSystem::empty(&self.space, Ranking::for_space(&self.space));
        self.equations
            .iter()
            .map(|eq| Ok((eq.lead.clone(), s.solve_for(&eq.name, &eq.residual, &eq.lead)?)))
            .collect()
    }

    /// The spectral problem and constraints, optionally with a system, as
    /// one solved form with eigenfunction jets ranked highest.
    pub fn solved(&self, sys: Option<&PDESystem>) -> Result<SolvedSystem, LaxError> {
        let (space, mut ranking) = match sys {
            Some(s) => {
                if s.space.indep() != self.space.indep() {
                    return Err(SystemError::SpaceMismatch.into());
                }
                let sp = s.space.merge(&self.space);
                let mut r = Ranking::for_space(&sp);
                if !s.eliminate.is_empty() {
                    r = r.eliminating(&s.eliminate);
                }
                (sp, r)
            }
            None => (self.space.clone(), Ranking::for_space(&self.space)),
        };
        ranking = ranking.eliminating(&self.eigen);
        let mut solved = SolvedSystem::empty(&space, ranking);
        if let Some(s) = sys {
            for eq in s.equations.iter().chain(&s.aux) {
                solved.add_equation(&eq.name, &eq.residual())?;
            }
        }
        for eq in &self.constraints.equations {
            solved.add_equation(&eq.name, &eq.residual())?;
        }
        for (eq, (lead, rhs)) in self.equations.iter().zip(self.solved_equations()?) {
            solved.add_rule(lead, rhs, &eq.name);
        }
        Ok(solved)
    }

    fn compatibility(&self, sys: Option<&PDESystem>) -> Result<Vec<(String, Expression)>, LaxError> {
        let s = self.solved(sys)?;
        let mut out = Vec::new();
        for (name, c) in s.critical_pairs(Some(&self.eigen))? {
            for (j, coeff) in eigen_coefficients(&c, &self.eigen)? {
                let r = s.reduce(&coeff)?;
                if !r.is_zero() {
                    out.push((format!("{}: {}", name, j.name_with(Some(self.space.indep()))), r));
                }
            }
        }
        Ok(out)
    }

    /// Zero-curvature matrix U_t - sum c_j U_{y_j} - V_x + [U, V], reduced
    /// modulo the constraints and `sys`.
    pub fn zero_curvature(&self, sys: Option<&PDESystem>) -> Result<Mat2, LaxError> {
        let m = self.matrix.as_ref().ok_or_else(|| LaxError::Invalid("not a matrix pair".into()))?;
        let s = self.solved(sys)?;
        let sp = s.space().clone();
        let uv = mat_mul(&m.u, &m.v);
        let vu = mat_mul(&m.v, &m.u);
        let mut out: Mat2 = [[Expression::zero(), Expression::zero()], [Expression::zero(), Expression::zero()]];
        for i in 0..2 {
            for j in 0..2 {
                let mut e = sp.total_derivative(&m.u[i][j], &m.t)? - sp.total_derivative(&m.v[i][j], &m.x)?;
                for (y, c) in &m.transport {
                    e = e - c * sp.total_derivative(&m.u[i][j], y)?;
                }
                e = e + &uv[i][j] - &vu[i][j];
                out[i][j] = s.reduce(&e)?;
            }
        }
        Ok(out)
    }
}

/// Coefficients of the independent eigenfunction jets left after cross
/// differentiation, reduced modulo the constraints only.
pub fn compatibility_residual(lp: &LaxPair) -> Result<Vec<Expression>, LaxError> {
    Ok(lp.compatibility(None)?.into_iter().map(|(_, e)| e).collect())
}

/// Holds iff every compatibility coefficient vanishes modulo `sys` and the
/// constraints.
pub fn verify_yields(lp: &LaxPair, sys: &PDESystem) -> Result<Report, LaxError> {
    let s = lp.solved(Some(sys))?;
    let mut rep = Report::new(&format!("{} yields {}", lp.name, sys.name));
    let mut any = false;
    for (name, c) in s.critical_pairs(Some(&lp.eigen))? {
        for (j, coeff) in eigen_coefficients(&c, &lp.eigen)? {
            let (r, n) = s.reduce_counted(&coeff)?;
            rep.push(Check::new(&format!("{}: {}", name, j.name_with(Some(lp.space.indep()))), r, n));
            any = true;
        }
    }
    if !any {
        rep.push(Check::new("compatibility", Expression::zero(), 0));
    }
    Ok(rep)
}

/// Cross-differentiation differences of `lp` evaluated at random points
/// consistent with `sys`, the constraints and the spectral problem.
pub fn verify_yields_numeric(lp: &LaxPair, sys: &PDESystem, samples: usize, seed: u64, tol: f64) -> Result<Report, LaxError> {
    let s = lp.solved(Some(sys))?;
    let diffs = s.critical_differences(Some(&lp.eigen))?;
    Ok(numeric::vanishing(&format!("numeric {} yields {}", lp.name, sys.name), &diffs, &s, samples, seed, tol)?)
}

/// Numeric counterpart of [`pair_implied_by`].
pub fn pair_implied_numeric(a: &LaxPair, b: &LaxPair, sys: Option<&PDESystem>, samples: usize, seed: u64, tol: f64) -> Result<Report, LaxError> {
    let s = b.solved(sys)?;
    let exprs: Vec<(String, Expression)> = a.equations.iter().map(|eq| (eq.name.clone(), eq.residual.clone())).collect();
    Ok(numeric::vanishing(&format!("numeric {} => {}", b.name, a.name), &exprs, &s, samples, seed, tol)?)
}

fn rename_lead(t: &ReciprocalTransform, lead: &Jet, field: &Symbol) -> Result<Jet, LaxError> {
    let mut d = Vec::new();
    for (x, c) in lead.derivs() {
        let z = t.target_var(x).ok_or_else(|| JetError::UnknownVariable(x.to_string()))?;
        d.push((z, *c));
    }
    Ok(Jet::new(field.clone(), d))
}

/// Carry a pair through a transform, with old eigenfunction = g * new one.
/// `context` is the source system whose elimination (e.g. of H in the n0
/// transform) the pair needs; without it only the transform's own
/// relations are used.
pub fn transform_lax(
    t: &ReciprocalTransform,
    lp: &LaxPair,
    g: &GaugeFactor,
    new_eigen: &[&str],
    context: Option<&PDESystem>,
) -> Result<LaxPair, LaxError> {
    if new_eigen.len() != lp.eigen.len() {
        return Err(LaxError::Invalid("eigenfunction count mismatch".into()));
    }
    let extra: Vec<&str> = lp.space.dep().iter().filter(|f| !t.source().is_field(f)).map(|f| f.as_str()).collect();
    let t2 = t.with_fields(&extra)?;
    let fresh: Vec<&str> = new_eigen.iter().copied().filter(|e| !t2.target().is_field(&Symbol::new(e))).collect();
    let ts = t2.target().add_fields(&fresh)?;
    let elim = match context {
        Some(sys) => {
            let mut lifted = sys.clone();
            lifted.space = sys.space.merge(t2.source());
            t2.apply_detailed(&lifted)?.elimination
        }
        None => t2.elimination_system()?,
    };
    let new: Vec<Symbol> = new_eigen.iter().map(|s| Symbol::new(s)).collect();
    let gauge = |e: &Expression| -> Result<Expression, LaxError> {
        let mut map = HashMap::new();
        for a in e.atoms() {
            if let Atom::Jet(j) = &a {
                if let Some(k) = lp.eigen.iter().position(|f| f == &j.field) {
                    let v = g.value() * Expression::atom(Atom::field(new[k].as_str()));
                    map.insert(a.clone(), ts.derivative_along(&v, j.derivs())?);
                }
            }
        }
        Ok(e.substitute(&map)?)
    };
    let mut eqs = Vec::new();
    for eq in &lp.equations {
        let k = lp.eigen.iter().position(|f| f == &eq.lead.field).expect("eigen lead");
        let lead = rename_lead(&t2, &eq.lead, &new[k])?;
        let r = elim.reduce(&gauge(&t2.map_expr(&eq.residual)?)?)?;
        let coeffs = eigen_coefficients(&r, &new)?;
        let c = coeffs.get(&lead).ok_or_else(|| LaxError::NotLinearInEigenfunction(format!("{} lost its lead", eq.name)))?;
        eqs.push(LaxEquation { name: eq.name.clone(), residual: r.checked_div(c)?, lead });
    }
    let names: Vec<&str> = new.iter().map(|s| s.as_str()).collect();
    let mut out = LaxPair::new(&format!("{}'", lp.name), &ts, lp.kind, &names, eqs)?;
    for c in &lp.constraints.equations {
        let r = elim.reduce(&t2.map_expr(&c.residual())?)?;
        if !r.is_zero() {
            out.constraints.equations.push(Equation::zero(&c.name, r));
        }
    }
    out.notes.push(format!("gauge {}", g.value()));
    Ok(out)
}

/// Substitute eigenfunction rules (e.g. psi_T -> lambda psi) and field or
/// parameter settings, drop the variables in `drop` and renormalize.
/// A `spectral` field named in the rules is adjoined with lambda_y = 0 for
/// every remaining variable y.
pub fn reduce_lax(
    lp: &LaxPair,
    rules: &[(Jet, Expression)],
    settings: &[(&str, Expression)],
    drop: &[&str],
    spectral: Option<&str>,
) -> Result<LaxPair, LaxError> {
    for (i, (a, va)) in rules.iter().enumerate() {
        if !lp.eigen.contains(&a.field) {
            return Err(LaxError::InconsistentReduction(format!("{:?} is not an eigenfunction jet", a)));
        }
        for (b, vb) in &rules[i + 1..] {
            if a == b && va != vb {
                return Err(LaxError::InconsistentReduction(format!("{:?} is mapped twice", a)));
            }
        }
    }
    let drop: Vec<Symbol> = drop.iter().map(|s| Symbol::new(s)).collect();
    let set_fields: Vec<Symbol> = settings
        .iter()
        .map(|(n, _)| Symbol::new(n))
        .filter(|n| lp.space.is_field(n))
        .collect();
    let mut params: Vec<Symbol> = lp.space.params().iter().filter(|p| !settings.iter().any(|(n, _)| p.as_str() == *n)).cloned().collect();
    let mut add_params = |e: &Expression| {
        for a in e.atoms() {
            if let Atom::Param(p) = a {
                if !params.contains(&p) {
                    params.push(p);
                }
            }
        }
    };
    for (_, v) in rules {
        add_params(v);
    }
    for (_, v) in settings {
        add_params(v);
    }
    let mut fields: Vec<Symbol> = lp.space.dep().iter().filter(|f| !set_fields.contains(f)).cloned().collect();
    let lam = spectral.map(Symbol::new);
    if let Some(l) = &lam {
        if !fields.contains(l) {
            fields.push(l.clone());
        }
    }
    let sp = JetSpace::from_symbols(
        lp.space.indep().iter().filter(|x| !drop.contains(x)).cloned().collect(),
        fields,
        params,
        lp.space.order(),
    )?;
    let mut all_fields = lp.space.dep().to_vec();
    all_fields.extend(sp.dep().iter().filter(|f| !lp.space.is_field(f)).cloned());
    let full = JetSpace::from_symbols(lp.space.indep().to_vec(), all_fields, sp.params().to_vec(), lp.space.order())?;
    let mut s = SolvedSystem::empty(&full, Ranking::for_space(&full));
    for (j, v) in rules {
        s.add_rule(j.clone(), v.clone(), "reduction");
    }
    if let Some(l) = &lam {
        for y in full.indep() {
            s.add_rule(Jet::new(l.clone(), [(y.clone(), 1)]), Expression::zero(), "spectral");
        }
    }
    let apply = |e: &Expression| -> Result<Expression, LaxError> {
        let mut map = HashMap::new();
        for a in e.atoms() {
            match &a {
                Atom::Param(p) => {
                    if let Some((_, v)) = settings.iter().find(|(n, _)| *n == p.as_str()) {
                        map.insert(a.clone(), v.clone());
                    }
                }
                Atom::Jet(j) => {
                    if let Some((_, v)) = settings.iter().find(|(n, _)| *n == j.field.as_str()) {
                        map.insert(a.clone(), full.derivative_along(v, j.derivs())?);
                    }
                }
                _ => {}
            }
        }
        let e = s.reduce(&e.substitute(&map)?)?;
        let mut zero = HashMap::new();
        for a in e.atoms() {
            if let Atom::Jet(j) = &a {
                if j.derivs().iter().any(|(x, _)| drop.contains(x)) {
                    if lp.eigen.contains(&j.field) {
                        return Err(LaxError::InconsistentReduction(format!(
                            "{} still depends on a dropped variable",
                            j.name_with(Some(lp.space.indep()))
                        )));
                    }
                    zero.insert(a.clone(), Expression::zero());
                }
            }
        }
        Ok(e.substitute(&zero)?)
    };
    let ranking = Ranking::for_space(&sp);
    let mut eqs = Vec::new();
    for eq in &lp.equations {
        let r = apply(&eq.residual)?;
        if r.is_zero() {
            continue;
        }
        let coeffs = eigen_coefficients(&r, &lp.eigen)?;
        let lead = if coeffs.contains_key(&eq.lead) && !s.is_reducible(&eq.lead) {
            eq.lead.clone()
        } else {
            ranking.max(coeffs.keys()).cloned().expect("nonzero linear residual")
        };
        let c = &coeffs[&lead];
        eqs.push(LaxEquation { name: eq.name.clone(), residual: r.checked_div(c)?, lead });
    }
    let names: Vec<&str> = lp.eigen.iter().map(|s| s.as_str()).collect();
    let mut out = LaxPair::new(&format!("{} reduced", lp.name), &sp, lp.kind, &names, eqs)?;
    for c in &lp.constraints.equations {
        let r = apply(&c.residual())?;
        if !r.is_zero() {
            out.constraints.equations.push(Equation::zero(&c.name, r));
        }
    }
    if let Some(l) = &lam {
        for y in sp.indep() {
            let j = Jet::new(l.clone(), [(y.clone(), 1)]);
            out.constraints.equations.push(Equation::zero(&format!("{}_{}", l, y), Expression::atom(Atom::Jet(j))));
        }
    }
    Ok(out)
}

/// Each equation of `a` reduces to zero modulo the solved form of `b`
/// (together with `sys` when given).
pub fn pair_implied_by(a: &LaxPair, b: &LaxPair, sys: Option<&PDESystem>) -> Result<Report, LaxError> {
    let s = b.solved(sys)?;
    let mut rep = Report::new(&format!("{} => {}", b.name, a.name));
    for eq in &a.equations {
        let (r, n) = s.reduce_counted(&eq.residual)?;
        rep.push(Check::new(&eq.name, r, n));
    }
    Ok(rep)
}
