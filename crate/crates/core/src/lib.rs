//! Exact symbolic verification of reciprocal transformations between
//! integrable hierarchies.

pub mod expr;
pub mod jetspace;
pub mod lax;
pub mod numeric;
pub mod catalog;
pub mod recip;
pub mod system;

pub use expr::{Atom, ExprError, ExprTree, Expression, Jet, Symbol};
pub use jetspace::{JetError, JetSpace};
