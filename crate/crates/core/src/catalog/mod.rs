//! Generators for the systems, transforms, reductions and Lax pairs of the
//! CHH/mCHH hierarchies and the n0 equation, plus named scenarios.

pub mod chh;
pub mod mchh;
pub mod n0;
pub mod reductions;
pub mod scenarios;

pub use chh::{cbs, chh, chh_lax, chh_lax_with, chh_one_form, chh_pair, chh_potential, chh_potential_pairs, chh_transform, chh_transformed};
pub use n0::{n0_lax, n0_system, K};
pub use mchh::{mcbs, miura_residuals, mchh, mchh_lax, mchh_lax_with, mchh_one_form, mchh_pair, mchh_potential, mchh_potential_pairs, mchh_transform, mchh_transformed, verify_miura, verify_miura_with};

use crate::expr::parse::parse_expression;
use crate::expr::{Atom, Expression, Jet, Symbol};
use crate::jetspace::{JetError, JetSpace};
use crate::lax::LaxError;
use crate::recip::RecipError;
use crate::system::SystemError;
use std::collections::HashMap;

/// Hierarchies are generated up to this level.
pub const MAX_LEVEL: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("hierarchy level {0} is outside 1..=4")]
    Level(usize),
    #[error("copy index {i} is outside 1..={n}")]
    Copy { i: usize, n: usize },
    #[error("unknown catalog entry `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Recip(#[from] RecipError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Lax(#[from] LaxError),
}

impl CatalogError {
    pub fn is_budget(&self) -> bool {
        match self {
            CatalogError::System(e) => e.is_budget(),
            CatalogError::Recip(e) => e.is_budget(),
            CatalogError::Lax(e) => e.is_budget(),
            _ => false,
        }
    }
}

impl From<crate::expr::ExprError> for CatalogError {
    fn from(e: crate::expr::ExprError) -> Self {
        CatalogError::System(e.into())
    }
}

pub(crate) fn check_level(n: usize) -> Result<(), CatalogError> {
    if (1..=MAX_LEVEL).contains(&n) {
        Ok(())
    } else {
        Err(CatalogError::Level(n))
    }
}

pub(crate) fn ex(sp: &JetSpace, s: &str) -> Expression {
    match parse_expression(s, sp) {
        Ok(e) => e,
        Err(err) => panic!("catalog expression `{}`: {}", s, err),
    }
}

pub(crate) fn jet(f: &str, d: &[(&str, u32)]) -> Expression {
    Expression::atom(Atom::jet(f, d))
}

pub(crate) fn lead(f: &str, d: &[(&str, u32)]) -> Jet {
    Jet::new(Symbol::new(f), d.iter().map(|(x, k)| (Symbol::new(x), *k)))
}

pub(crate) fn zvars(n: usize) -> Vec<String> {
    (0..n + 2).map(|i| format!("z{}", i)).collect()
}

pub(crate) fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(|s| s.as_str()).collect()
}

/// Replace every jet of `field` by the matching derivative of `value`.
pub fn substitute_field(
    sp: &JetSpace,
    e: &Expression,
    field: &str,
    value: &Expression,
) -> Result<Expression, CatalogError> {
    let f = Symbol::new(field);
    let mut map = HashMap::new();
    for a in e.atoms() {
        if let Atom::Jet(j) = &a {
            if j.field == f {
                map.insert(a.clone(), sp.derivative_along(value, j.derivs())?);
            }
        }
    }
    Ok(e.substitute(&map)?)
}

