use crate::expr::{Jet, Symbol};
use crate::jetspace::JetSpace;
use std::cmp::Ordering;

/// A total order on jets used to pick leading derivatives.
///
/// Jets compare by elimination block first, then total order, then the
/// derivative counts of the priority variables (highest priority first),
/// then field position (earlier fields rank higher), then the remaining
/// multi-index.
#[derive(Clone, Debug, PartialEq)]
pub struct Ranking {
    blocks: Vec<Vec<Symbol>>,
    priority: Vec<Symbol>,
    fields: Vec<Symbol>,
}

impl Ranking {
    /// Orderly ranking with the independent variables in reverse declaration
    /// order of priority (the last declared variable is the most time-like).
    pub fn for_space(space: &JetSpace) -> Ranking {
        Ranking {
            blocks: Vec::new(),
            priority: space.indep().iter().rev().cloned().collect(),
            fields: space.dep().to_vec(),
        }
    }

    pub fn with_priority(mut self, vars: &[&str]) -> Ranking {
        let mut p: Vec<Symbol> = vars.iter().map(|s| Symbol::new(s)).collect();
        p.extend(self.priority.iter().filter(|v| !p.contains(v)).cloned().collect::<Vec<_>>());
        self.priority = p;
        self
    }

    /// Rank the given fields above every field seen so far, regardless of order.
    pub fn eliminating(mut self, fields: &[Symbol]) -> Ranking {
        self.blocks.insert(0, fields.to_vec());
        self
    }

    pub fn with_field_order(mut self, fields: &[&str]) -> Ranking {
        let mut f: Vec<Symbol> = fields.iter().map(|s| Symbol::new(s)).collect();
        f.extend(self.fields.iter().filter(|v| !f.contains(v)).cloned().collect::<Vec<_>>());
        self.fields = f;
        self
    }

    pub fn priority(&self) -> &[Symbol] {
        &self.priority
    }

    fn block(&self, f: &Symbol) -> usize {
        match self.blocks.iter().position(|b| b.contains(f)) {
            Some(i) => self.blocks.len() - i,
            None => 0,
        }
    }

    fn field_rank(&self, f: &Symbol) -> usize {
        match self.fields.iter().position(|g| g == f) {
            Some(i) => self.fields.len() - i,
            None => 0,
        }
    }

    /// `Greater` when `a` ranks above `b`.
    pub fn cmp(&self, a: &Jet, b: &Jet) -> Ordering {
        self.block(&a.field)
            .cmp(&self.block(&b.field))
            .then(a.order().cmp(&b.order()))
            .then_with(|| {
                for v in &self.priority {
                    let c = a.count(v).cmp(&b.count(v));
                    if c != Ordering::Equal {
                        return c;
                    }
                }
                Ordering::Equal
            })
            .then_with(|| self.field_rank(&a.field).cmp(&self.field_rank(&b.field)))
            .then_with(|| a.field.cmp(&b.field).reverse())
            .then_with(|| a.derivs().cmp(b.derivs()))
    }

    pub fn max<'a>(&self, jets: impl IntoIterator<Item = &'a Jet>) -> Option<&'a Jet> {
        jets.into_iter().max_by(|a, b| self.cmp(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j(f: &str, d: &[(&str, u32)]) -> Jet {
        Jet::new(Symbol::new(f), d.iter().map(|(s, c)| (Symbol::new(s), *c)))
    }

    #[test]
    fn orderly_with_time_priority() {
        let s = JetSpace::declare(&["X", "Y", "T"], &["P", "Delta"], 4).unwrap();
        let r = Ranking::for_space(&s);
        assert_eq!(r.cmp(&j("P", &[("Y", 1)]), &j("P", &[("X", 1)])), Ordering::Greater);
        assert_eq!(r.cmp(&j("P", &[("T", 1)]), &j("P", &[("Y", 1)])), Ordering::Greater);
        assert_eq!(r.cmp(&j("P", &[("X", 2)]), &j("Delta", &[("T", 1)])), Ordering::Greater);
        assert_eq!(r.cmp(&j("P", &[("X", 1)]), &j("Delta", &[("X", 1)])), Ordering::Greater);
    }

    #[test]
    fn elimination_blocks_dominate() {
        let s = JetSpace::declare(&["x"], &["u", "v"], 4).unwrap();
        let r = Ranking::for_space(&s).eliminating(&[Symbol::new("v")]);
        assert_eq!(r.cmp(&j("v", &[]), &j("u", &[("x", 3)])), Ordering::Greater);
    }
}
