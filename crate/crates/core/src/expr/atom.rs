use std::fmt;
use std::sync::Arc;

/// Interned-by-value name. Ordering is plain string ordering.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(s: &str) -> Self {
        Symbol(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<&String> for Symbol {
    fn from(s: &String) -> Self {
        Symbol::new(s)
    }
}

/// A jet coordinate: a field together with its derivative counts.
///
/// Derivative counts are stored sorted by variable name with zero counts
/// omitted, so the value is independent of any particular jet space.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Jet {
    pub field: Symbol,
    derivs: Arc<[(Symbol, u32)]>,
}

impl Jet {
    pub fn new(field: Symbol, derivs: impl IntoIterator<Item = (Symbol, u32)>) -> Self {
        let mut v: Vec<(Symbol, u32)> = Vec::new();
        for (s, c) in derivs {
            if c == 0 {
                continue;
            }
            match v.iter_mut().find(|(t, _)| *t == s) {
                Some(e) => e.1 += c,
                None => v.push((s, c)),
            }
        }
        v.sort();
        Jet { field, derivs: v.into() }
    }

    pub fn plain(field: Symbol) -> Self {
        Jet { field, derivs: Arc::from(Vec::new()) }
    }

    pub fn derivs(&self) -> &[(Symbol, u32)] {
        &self.derivs
    }

    pub fn order(&self) -> u32 {
        self.derivs.iter().map(|d| d.1).sum()
    }

    pub fn count(&self, var: &Symbol) -> u32 {
        self.derivs.iter().find(|d| &d.0 == var).map_or(0, |d| d.1)
    }

    /// The jet differentiated once more with respect to `var`.
    pub fn bump(&self, var: &Symbol) -> Jet {
        Jet::new(
            self.field.clone(),
            self.derivs.iter().cloned().chain(std::iter::once((var.clone(), 1))),
        )
    }

    /// The jet with one derivative in `var` removed, if there is one.
    pub fn lower(&self, var: &Symbol) -> Option<Jet> {
        if self.count(var) == 0 {
            return None;
        }
        let v = self
            .derivs
            .iter()
            .map(|(s, c)| if s == var { (s.clone(), c - 1) } else { (s.clone(), *c) });
        Some(Jet::new(self.field.clone(), v))
    }

    /// True when `self` is obtained from `other` by further differentiation.
    pub fn is_derivative_of(&self, other: &Jet) -> bool {
        self.field == other.field && other.derivs.iter().all(|(s, c)| self.count(s) >= *c)
    }

    /// Componentwise difference `self - other`; requires `is_derivative_of`.
    pub fn quotient(&self, other: &Jet) -> Vec<(Symbol, u32)> {
        self.derivs
            .iter()
            .map(|(s, c)| (s.clone(), c - other.count(s)))
            .filter(|d| d.1 > 0)
            .collect()
    }

    /// Least common multiple of two jets of the same field.
    pub fn lcm(&self, other: &Jet) -> Jet {
        let mut v: Vec<(Symbol, u32)> = self.derivs.to_vec();
        for (s, c) in other.derivs.iter() {
            match v.iter_mut().find(|(t, _)| t == s) {
                Some(e) => e.1 = e.1.max(*c),
                None => v.push((s.clone(), *c)),
            }
        }
        Jet::new(self.field.clone(), v)
    }

    /// Canonical text name, e.g. `u`, `u_{x}`, `u_{x^2 y}`.
    ///
    /// Variables are listed in `order` when given, otherwise alphabetically.
    pub fn name_with(&self, order: Option<&[Symbol]>) -> String {
        if self.derivs.is_empty() {
            return self.field.to_string();
        }
        let mut parts: Vec<(usize, String)> = self
            .derivs
            .iter()
            .map(|(s, c)| {
                let pos = order.and_then(|o| o.iter().position(|t| t == s)).unwrap_or(usize::MAX);
                let txt = if *c == 1 { s.to_string() } else { format!("{}^{}", s, c) };
                (pos, txt)
            })
            .collect();
        parts.sort_by(|a, b| a.0.cmp(&b.0));
        let body: Vec<String> = parts.into_iter().map(|p| p.1).collect();
        format!("{}_{{{}}}", self.field, body.join(" "))
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name_with(None))
    }
}

/// Variables of the polynomial ring.
///
/// `Sqrt` and `Imag` are algebraic generators (g² = radicand, I² = −1);
/// `Pow` is a field raised to a symbolic parameter exponent.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Indep(Symbol),
    Param(Symbol),
    Jet(Jet),
    Pow { base: Symbol, exp: Symbol },
    Sqrt(Box<Atom>),
    Imag,
}

impl Atom {
    pub fn indep(s: &str) -> Atom {
        Atom::Indep(Symbol::new(s))
    }

    pub fn param(s: &str) -> Atom {
        Atom::Param(Symbol::new(s))
    }

    pub fn field(s: &str) -> Atom {
        Atom::Jet(Jet::plain(Symbol::new(s)))
    }

    pub fn jet(field: &str, derivs: &[(&str, u32)]) -> Atom {
        Atom::Jet(Jet::new(
            Symbol::new(field),
            derivs.iter().map(|(s, c)| (Symbol::new(s), *c)),
        ))
    }

    pub fn as_jet(&self) -> Option<&Jet> {
        match self {
            Atom::Jet(j) => Some(j),
            _ => None,
        }
    }

    pub fn is_generator(&self) -> bool {
        matches!(self, Atom::Sqrt(_) | Atom::Imag)
    }

    /// The field this atom depends on, if any (for `Pow` and `Sqrt` too).
    pub fn depends_on_jet(&self) -> Option<&Jet> {
        match self {
            Atom::Jet(j) => Some(j),
            Atom::Sqrt(a) => a.depends_on_jet(),
            _ => None,
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Indep(s) | Atom::Param(s) => write!(f, "{}", s),
            Atom::Jet(j) => write!(f, "{:?}", j),
            Atom::Pow { base, exp } => write!(f, "{}^{}", base, exp),
            Atom::Sqrt(a) => write!(f, "sqrt({:?})", a),
            Atom::Imag => write!(f, "I"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_identity_ignores_differentiation_order() {
        let a = Jet::new(Symbol::new("u"), [("x".into(), 1), ("y".into(), 1), ("x".into(), 1)]);
        let b = Jet::new(Symbol::new("u"), [("y".into(), 1), ("x".into(), 2)]);
        assert_eq!(a, b);
        assert_eq!(a.order(), 3);
    }

    #[test]
    fn jet_names() {
        let j = Jet::new(Symbol::new("u"), [("y".into(), 1), ("x".into(), 2)]);
        let order = [Symbol::new("x"), Symbol::new("y"), Symbol::new("t")];
        assert_eq!(j.name_with(Some(&order)), "u_{x^2 y}");
        assert_eq!(Jet::plain(Symbol::new("u")).name_with(None), "u");
    }

    #[test]
    fn divisibility_and_lcm() {
        let ux = Jet::new(Symbol::new("u"), [("x".into(), 1)]);
        let uxy = ux.bump(&"y".into());
        assert!(uxy.is_derivative_of(&ux));
        assert!(!ux.is_derivative_of(&uxy));
        let uy = Jet::new(Symbol::new("u"), [("y".into(), 1)]);
        assert_eq!(ux.lcm(&uy), uxy);
        assert_eq!(uxy.quotient(&ux), vec![(Symbol::new("y"), 1)]);
    }
}
