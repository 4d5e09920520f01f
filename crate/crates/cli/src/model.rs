//! Core objects built from a parsed document.

use crate::dsl::{Document, EquationDecl, Name, TransformDecl};
use recipro::expr::Symbol;
use recipro::jetspace::JetSpace;
use recipro::lax::{LaxEquation, LaxError, LaxKind, LaxPair};
use recipro::recip::{RecipError, ReciprocalTransform, TransformBuilder};
use recipro::system::{ConservedPair, Equation, OneForm, PDESystem, SystemError};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("document declares no space")]
    NoSpace,
    #[error("`{0}` needs a system and the document declares none")]
    NoSystem(String),
    #[error("{0}")]
    System(#[from] SystemError),
    #[error("{0}")]
    Recip(#[from] RecipError),
    #[error("{0}")]
    Lax(#[from] LaxError),
}

impl ModelError {
    pub fn is_budget(&self) -> bool {
        match self {
            ModelError::System(e) => e.is_budget(),
            ModelError::Recip(e) => e.is_budget(),
            ModelError::Lax(e) => e.is_budget(),
            _ => false,
        }
    }
}

pub struct Transform {
    pub name: String,
    pub transform: ReciprocalTransform,
    /// The system the transform acts on.
    pub source: PDESystem,
    pub expect: Option<PDESystem>,
}

pub struct Model {
    pub space: JetSpace,
    pub systems: Vec<PDESystem>,
    pub pairs: Vec<(String, ConservedPair, PDESystem)>,
    pub forms: Vec<(String, OneForm, PDESystem)>,
    pub transforms: Vec<Transform>,
    pub laxes: Vec<(LaxPair, Option<PDESystem>)>,
    pub scenarios: Vec<(String, String, Option<usize>)>,
}

fn equation(e: &EquationDecl) -> Equation {
    Equation::new(&e.name, e.lhs.clone(), e.rhs.clone())
}

impl Model {
    pub fn build(doc: &Document) -> Result<Model, ModelError> {
        let space = doc.space().ok_or(ModelError::NoSpace)?.build().map_err(SystemError::from)?;
        let systems: Vec<PDESystem> = doc
            .systems()
            .map(|d| {
                let mut s = PDESystem::new(&d.name.text, &space);
                s.equations = d.equations.iter().map(equation).collect();
                s.aux = d.aux.iter().map(equation).collect();
                s.eliminate = d.eliminate.iter().map(|n| Symbol::new(&n.text)).collect();
                s
            })
            .collect();
        let find = |who: &str, n: Option<&Name>| -> Result<PDESystem, ModelError> {
            let d = doc.system_or_first(n).ok_or_else(|| ModelError::NoSystem(who.to_string()))?;
            Ok(systems.iter().find(|s| s.name == d.name.text).cloned().expect("resolved"))
        };
        let mut pairs = Vec::new();
        for c in doc.conserved() {
            let p = ConservedPair::new(c.a.clone(), &c.var.text, c.b.clone(), &c.var_prime.text)?;
            pairs.push((c.name.text.clone(), p, find(&c.name.text, c.system.as_ref())?));
        }
        let mut forms = Vec::new();
        for f in doc.forms() {
            let coeffs = f.coeffs.iter().map(|(v, e)| (v.text.as_str(), e.clone())).collect();
            forms.push((f.name.text.clone(), OneForm::new(&f.target.text, coeffs)?, find(&f.name.text, f.system.as_ref())?));
        }
        let mut transforms = Vec::new();
        for t in doc.transforms() {
            transforms.push(transform(&space, t, &pairs, &forms, &find)?);
        }
        let mut laxes = Vec::new();
        for l in doc.laxes() {
            let eigen: Vec<&str> = l.eigen.iter().map(|n| n.text.as_str()).collect();
            let eqs = l
                .equations
                .iter()
                .map(|e| LaxEquation { name: e.name.clone(), lead: e.lead.clone(), residual: e.residual.clone() })
                .collect();
            let mut lp = LaxPair::new(&l.name.text, &space, LaxKind::Scalar, &eigen, eqs)?;
            let mut c = PDESystem::new(&format!("{} constraints", l.name.text), &space);
            c.equations = l.constraints.iter().map(equation).collect();
            lp = lp.with_constraints(&c);
            let sys = match &l.system {
                Some(n) => Some(find(&l.name.text, Some(n))?),
                None => None,
            };
            laxes.push((lp, sys));
        }
        let scenarios = doc.scenarios().map(|s| (s.name.text.clone(), s.run.text.clone(), s.n)).collect();
        Ok(Model { space, systems, pairs, forms, transforms, laxes, scenarios })
    }
}

type Finder<'a> = dyn Fn(&str, Option<&Name>) -> Result<PDESystem, ModelError> + 'a;

fn transform(
    space: &JetSpace,
    t: &TransformDecl,
    pairs: &[(String, ConservedPair, PDESystem)],
    forms: &[(String, OneForm, PDESystem)],
    find: &Finder,
) -> Result<Transform, ModelError> {
    let (mut b, source, form_target) = if let Some((_, p, s)) = pairs.iter().find(|(n, _, _)| n == &t.via.text) {
        (TransformBuilder::from_pair(space, p, &t.pivot.text), s.clone(), None)
    } else {
        let (_, f, s) = forms.iter().find(|(n, _, _)| n == &t.via.text).expect("resolved");
        (TransformBuilder::from_one_form(space, f, &t.pivot.text), s.clone(), Some(f.target.clone()))
    };
    for (v, e) in &t.extras {
        b = b.extra(&v.text, e.clone());
    }
    if let Some(z) = t.target.as_ref().map(|n| n.text.clone()).or(form_target.map(|s| s.to_string())) {
        b = b.target_pivot(&z);
    }
    for (x, z) in &t.renames {
        b = b.rename(&x.text, &z.text);
    }
    for (z, e) in &t.aux {
        b = b.aux_var(&z.text, e.clone());
    }
    if let Some(f) = &t.field {
        b = b.new_field(&f.text);
    }
    let expect = match &t.expect {
        Some(n) => Some(find(&t.name.text, Some(n))?),
        None => None,
    };
    Ok(Transform { name: t.name.text.clone(), transform: b.build()?, source, expect })
}
