//! The `.rcp` input language.
//!
//! ```text
//! space { indep: X, Y, T; dep: P, Delta, Omega1; params: k; order: 6 }
//! system chh1 { eq P_Y: P_Y = -1/2*(P_X*Omega1 + P*Omega1_X); aux: P_T = Delta_X }
//! conserved pair { A: P on Y; B: -1/2*P*Omega1 on X; in: chh1 }
//! form dz0 { target: z0; X: P; Y: -1/2*P*Omega1; in: chh1 }
//! transform t { pivot: X; via: pair; target: z0; field: X; rename: Y -> z1, T -> z2; extra: T = Delta; expect: chh1z }
//! lax l { eigen: Phi; eq spatial(Phi_XX): Phi_XX + Phi; constraint: lambda_X = 0; yields: chh1 }
//! scenario { run: chh-to-cbs; n: 2 }
//! ```
//!
//! `#` starts a comment. Every block name is optional except for systems,
//! forms and lax pairs; missing names are numbered per kind.

use recipro::catalog::scenarios;
use recipro::expr::parse::parse_expression;
use recipro::expr::{Atom, Expression, Jet, Symbol};
use recipro::jetspace::JetSpace;
use std::fmt;

#[derive(Clone, Copy, Debug, Default, Eq, PartialEq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A source position that never takes part in equality.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span(pub Pos);

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DslError {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: unknown name `{name}`")]
    UnknownName { pos: Pos, name: String },
    #[error("{pos}: {message}")]
    Invalid { pos: Pos, message: String },
}

impl DslError {
    pub fn pos(&self) -> Pos {
        match self {
            DslError::Syntax { pos, .. } | DslError::UnknownName { pos, .. } | DslError::Invalid { pos, .. } => *pos,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DslError::Syntax { .. } => "syntax",
            DslError::UnknownName { .. } => "unknown-name",
            DslError::Invalid { .. } => "invalid",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Name {
    pub text: String,
    pub span: Span,
}

impl Name {
    fn new(text: &str, pos: Pos) -> Name {
        Name { text: text.to_string(), span: Span(pos) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceDecl {
    pub indep: Vec<String>,
    pub dep: Vec<String>,
    pub params: Vec<String>,
    pub order: u32,
    pub span: Span,
}

impl SpaceDecl {
    pub fn build(&self) -> Result<JetSpace, recipro::jetspace::JetError> {
        fn s(v: &[String]) -> Vec<&str> {
            v.iter().map(|x| x.as_str()).collect()
        }
        JetSpace::with_params(&s(&self.indep), &s(&self.dep), &s(&self.params), self.order)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquationDecl {
    pub name: String,
    pub lhs: Expression,
    pub rhs: Expression,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemDecl {
    pub name: Name,
    pub equations: Vec<EquationDecl>,
    pub aux: Vec<EquationDecl>,
    pub eliminate: Vec<Name>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConservedDecl {
    pub name: Name,
    pub a: Expression,
    pub var: Name,
    pub b: Expression,
    pub var_prime: Name,
    pub system: Option<Name>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormDecl {
    pub name: Name,
    pub target: Name,
    pub coeffs: Vec<(Name, Expression)>,
    pub system: Option<Name>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransformDecl {
    pub name: Name,
    pub pivot: Name,
    pub via: Name,
    pub target: Option<Name>,
    pub field: Option<Name>,
    pub renames: Vec<(Name, Name)>,
    pub extras: Vec<(Name, Expression)>,
    pub aux: Vec<(Name, Expression)>,
    pub expect: Option<Name>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaxEquationDecl {
    pub name: String,
    pub lead: Jet,
    pub residual: Expression,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaxDecl {
    pub name: Name,
    pub eigen: Vec<Name>,
    pub equations: Vec<LaxEquationDecl>,
    pub constraints: Vec<EquationDecl>,
    pub system: Option<Name>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioDecl {
    pub name: Name,
    pub run: Name,
    pub n: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Space(SpaceDecl),
    System(SystemDecl),
    Conserved(ConservedDecl),
    Form(FormDecl),
    Transform(TransformDecl),
    Lax(LaxDecl),
    Scenario(ScenarioDecl),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Document {
    pub items: Vec<Item>,
}

macro_rules! accessor {
    ($fn:ident, $variant:ident, $ty:ty) => {
        pub fn $fn(&self) -> impl Iterator<Item = &$ty> {
            self.items.iter().filter_map(|i| match i {
                Item::$variant(x) => Some(x),
                _ => None,
            })
        }
    };
}

impl Document {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn space(&self) -> Option<&SpaceDecl> {
        self.items.iter().find_map(|i| match i {
            Item::Space(s) => Some(s),
            _ => None,
        })
    }

    accessor!(systems, System, SystemDecl);
    accessor!(conserved, Conserved, ConservedDecl);
    accessor!(forms, Form, FormDecl);
    accessor!(transforms, Transform, TransformDecl);
    accessor!(laxes, Lax, LaxDecl);
    accessor!(scenarios, Scenario, ScenarioDecl);

    pub fn system(&self, name: &str) -> Option<&SystemDecl> {
        self.systems().find(|s| s.name.text == name)
    }

    /// The named system, or the first one.
    pub fn system_or_first(&self, name: Option<&Name>) -> Option<&SystemDecl> {
        match name {
            Some(n) => self.system(&n.text),
            None => self.systems().next(),
        }
    }
}

struct Cursor<'a> {
    src: &'a str,
    i: usize,
    line: usize,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

/// Position of byte `off` of `text`, which starts at `start`.
fn advance(start: Pos, text: &str, off: usize) -> Pos {
    let mut p = start;
    for c in text[..off.min(text.len())].chars() {
        if c == '\n' {
            p.line += 1;
            p.col = 1;
        } else {
            p.col += 1;
        }
    }
    p
}

impl<'a> Cursor<'a> {
    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.i..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip(&mut self) {
        while let Some(c) = self.peek() {
            if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, DslError> {
        Err(DslError::Syntax { pos: self.pos(), message: message.into() })
    }

    fn at_end(&mut self) -> bool {
        self.skip();
        self.peek().is_none()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), DslError> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(d) => self.err(format!("expected `{}`, found `{}`", c, d)),
                None => self.err(format!("expected `{}`, found end of input", c)),
            }
        }
    }

    fn ident(&mut self) -> Result<Name, DslError> {
        self.skip();
        let pos = self.pos();
        match self.peek() {
            Some(c) if is_ident_start(c) => {}
            Some(c) => return self.err(format!("expected a name, found `{}`", c)),
            None => return self.err("expected a name, found end of input"),
        }
        let start = self.i;
        while matches!(self.peek(), Some(c) if is_ident(c)) {
            self.bump();
        }
        Ok(Name::new(&self.src[start..self.i], pos))
    }

    fn peek_ident(&mut self) -> Option<String> {
        self.skip();
        let rest = &self.src[self.i..];
        let first = rest.chars().next()?;
        if !is_ident_start(first) {
            return None;
        }
        let end = rest.find(|c: char| !is_ident(c)).unwrap_or(rest.len());
        Some(rest[..end].to_string())
    }

    fn integer(&mut self) -> Result<u64, DslError> {
        self.skip();
        let pos = self.pos();
        let start = self.i;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        self.src[start..self.i].parse().map_err(|_| DslError::Syntax { pos, message: "expected an integer".into() })
    }

    /// Text up to the next `;` or `}` outside parentheses, unconsumed.
    fn raw(&mut self, stop: &[char]) -> Result<(String, Pos), DslError> {
        self.skip();
        let pos = self.pos();
        let start = self.i;
        let mut depth = 0i32;
        while let Some(c) = self.peek() {
            match c {
                '(' | '{' => depth += 1,
                ')' if depth == 0 && stop.contains(&')') => break,
                '}' if depth == 0 => break,
                ')' | '}' => depth -= 1,
                ';' if depth == 0 => break,
                c if depth == 0 && stop.contains(&c) => break,
                _ => {}
            }
            self.bump();
        }
        let text = self.src[start..self.i].trim_end().to_string();
        if text.is_empty() {
            return self.err("expected an expression");
        }
        Ok((text, pos))
    }

    fn list(&mut self) -> Result<Vec<Name>, DslError> {
        let mut out = Vec::new();
        if self.peek_ident().is_some() {
            out.push(self.ident()?);
            while self.eat(',') {
                out.push(self.ident()?);
            }
        }
        Ok(out)
    }

    fn end_entry(&mut self) -> Result<(), DslError> {
        self.skip();
        if self.peek() == Some('}') {
            return Ok(());
        }
        self.expect(';')
    }
}

const OPERATORS: &[char] = &['+', '-', '*', '/', '^'];

fn expr_error(text: &str, start: Pos, e: recipro::expr::parse::ParseError) -> DslError {
    let trimmed = text.trim_end();
    if e.pos >= trimmed.len() {
        if let Some(c) = trimmed.chars().last().filter(|c| OPERATORS.contains(c)) {
            return DslError::Syntax { pos: advance(start, text, trimmed.len() - 1), message: format!("dangling operator `{}`", c) };
        }
    }
    let message = match text.get(e.pos..).and_then(|r| r.chars().next()).filter(|c| OPERATORS.contains(c)) {
        Some(c) => format!("{} `{}`", e.msg, c),
        None => e.msg,
    };
    DslError::Syntax { pos: advance(start, text, e.pos), message }
}

fn expression(sp: &JetSpace, text: &str, start: Pos) -> Result<Expression, DslError> {
    parse_expression(text, sp).map_err(|e| expr_error(text, start, e))
}

fn equation(sp: &JetSpace, name: String, text: &str, start: Pos) -> Result<EquationDecl, DslError> {
    let (lhs, rhs) = match text.split_once('=') {
        Some((l, r)) => {
            let rpos = advance(start, text, l.len() + 1);
            (expression(sp, l, start)?, expression(sp, r, rpos)?)
        }
        None => (expression(sp, text, start)?, Expression::zero()),
    };
    Ok(EquationDecl { name, lhs, rhs, span: Span(start) })
}

struct Parser<'a> {
    c: Cursor<'a>,
    space: Option<JetSpace>,
    counters: std::collections::HashMap<&'static str, usize>,
}

impl Parser<'_> {
    fn sp(&self, pos: Pos) -> Result<&JetSpace, DslError> {
        self.space.as_ref().ok_or(DslError::Invalid { pos, message: "a space block must come first".into() })
    }

    fn fresh(&mut self, kind: &'static str) -> String {
        let n = self.counters.entry(kind).or_insert(0);
        *n += 1;
        format!("{}{}", kind, n)
    }

    fn optional_name(&mut self, kind: &'static str) -> Result<Name, DslError> {
        self.c.skip();
        let pos = self.c.pos();
        if self.c.peek_ident().is_some() {
            self.c.ident()
        } else {
            Ok(Name::new(&self.fresh(kind), pos))
        }
    }

    fn indep(&self, n: &Name) -> Result<(), DslError> {
        let sp = self.sp(n.span.0)?;
        if sp.is_indep(&Symbol::new(&n.text)) {
            Ok(())
        } else {
            Err(DslError::UnknownName { pos: n.span.0, name: n.text.clone() })
        }
    }

    fn field(&self, n: &Name) -> Result<(), DslError> {
        let sp = self.sp(n.span.0)?;
        if sp.is_field(&Symbol::new(&n.text)) {
            Ok(())
        } else {
            Err(DslError::UnknownName { pos: n.span.0, name: n.text.clone() })
        }
    }

    fn expr(&mut self) -> Result<Expression, DslError> {
        let (text, pos) = self.c.raw(&[])?;
        expression(self.sp(pos)?, &text, pos)
    }

    fn item(&mut self) -> Result<Item, DslError> {
        let kw = self.c.ident()?;
        match kw.text.as_str() {
            "space" => self.space_block(kw.span.0),
            "system" => self.system_block(),
            "conserved" => self.conserved_block(),
            "form" => self.form_block(),
            "transform" => self.transform_block(),
            "lax" => self.lax_block(),
            "scenario" => self.scenario_block(),
            other => Err(DslError::Syntax { pos: kw.span.0, message: format!("unknown block `{}`", other) }),
        }
    }

    fn space_block(&mut self, pos: Pos) -> Result<Item, DslError> {
        if self.space.is_some() {
            return Err(DslError::Invalid { pos, message: "only one space block is allowed".into() });
        }
        self.c.expect('{')?;
        let (mut indep, mut dep, mut params, mut order) = (Vec::new(), Vec::new(), Vec::new(), None);
        while !self.c.eat('}') {
            let key = self.c.ident()?;
            self.c.expect(':')?;
            let names = |v: Vec<Name>| v.into_iter().map(|n| n.text).collect::<Vec<_>>();
            match key.text.as_str() {
                "indep" => indep = names(self.c.list()?),
                "dep" => dep = names(self.c.list()?),
                "params" => params = names(self.c.list()?),
                "order" => order = Some(self.c.integer()? as u32),
                other => return Err(DslError::Syntax { pos: key.span.0, message: format!("unknown space entry `{}`", other) }),
            }
            self.c.end_entry()?;
        }
        let order = order.ok_or(DslError::Invalid { pos, message: "space needs an order".into() })?;
        let decl = SpaceDecl { indep, dep, params, order, span: Span(pos) };
        self.space = Some(decl.build().map_err(|e| DslError::Invalid { pos, message: e.to_string() })?);
        Ok(Item::Space(decl))
    }

    fn system_block(&mut self) -> Result<Item, DslError> {
        let name = self.c.ident()?;
        self.c.expect('{')?;
        let (mut equations, mut aux, mut eliminate) = (Vec::new(), Vec::new(), Vec::new());
        while !self.c.eat('}') {
            let key = self.c.ident()?;
            match key.text.as_str() {
                "eq" | "aux" => {
                    let kind = if key.text == "eq" { "eq" } else { "aux" };
                    let ename = if self.c.eat(':') {
                        self.fresh(kind)
                    } else {
                        let n = self.c.ident()?.text;
                        self.c.expect(':')?;
                        n
                    };
                    let (text, pos) = self.c.raw(&[])?;
                    let eq = equation(self.sp(pos)?, ename, &text, pos)?;
                    if kind == "eq" {
                        equations.push(eq);
                    } else {
                        aux.push(eq);
                    }
                }
                "eliminate" => {
                    self.c.expect(':')?;
                    for n in self.c.list()? {
                        self.field(&n)?;
                        eliminate.push(n);
                    }
                }
                other => return Err(DslError::Syntax { pos: key.span.0, message: format!("unknown system entry `{}`", other) }),
            }
            self.c.end_entry()?;
        }
        Ok(Item::System(SystemDecl { name, equations, aux, eliminate }))
    }

    /// `<expr> on <var>`
    fn expr_on(&mut self) -> Result<(Expression, Name), DslError> {
        let (text, pos) = self.c.raw(&[])?;
        let cut = text.rfind(" on ").ok_or(DslError::Syntax { pos, message: "expected `<expr> on <variable>`".into() })?;
        let e = expression(self.sp(pos)?, &text[..cut], pos)?;
        let var_text = text[cut + 4..].trim();
        let var = Name::new(var_text, advance(pos, &text, text.len() - var_text.len()));
        self.indep(&var)?;
        Ok((e, var))
    }

    fn conserved_block(&mut self) -> Result<Item, DslError> {
        let name = self.optional_name("pair")?;
        self.c.expect('{')?;
        let (mut a, mut b, mut system) = (None, None, None);
        while !self.c.eat('}') {
            let key = self.c.ident()?;
            self.c.expect(':')?;
            match key.text.as_str() {
                "A" => a = Some(self.expr_on()?),
                "B" => b = Some(self.expr_on()?),
                "in" => system = Some(self.c.ident()?),
                other => return Err(DslError::Syntax { pos: key.span.0, message: format!("unknown conserved entry `{}`", other) }),
            }
            self.c.end_entry()?;
        }
        let pos = name.span.0;
        let (a, var) = a.ok_or(DslError::Invalid { pos, message: "conserved block needs `A`".into() })?;
        let (b, var_prime) = b.ok_or(DslError::Invalid { pos, message: "conserved block needs `B`".into() })?;
        Ok(Item::Conserved(ConservedDecl { name, a, var, b, var_prime, system }))
    }

    fn form_block(&mut self) -> Result<Item, DslError> {
        let name = self.c.ident()?;
        self.c.expect('{')?;
        let (mut target, mut coeffs, mut system) = (None, Vec::new(), None);
        while !self.c.eat('}') {
            let key = self.c.ident()?;
            self.c.expect(':')?;
            match key.text.as_str() {
                "target" => target = Some(self.c.ident()?),
                "in" => system = Some(self.c.ident()?),
                _ => {
                    self.indep(&key)?;
                    let e = self.expr()?;
                    coeffs.push((key, e));
                }
            }
            self.c.end_entry()?;
        }
        let target = target.ok_or(DslError::Invalid { pos: name.span.0, message: "form needs a target".into() })?;
        Ok(Item::Form(FormDecl { name, target, coeffs, system }))
    }

    fn transform_block(&mut self) -> Result<Item, DslError> {
        let name = self.optional_name("transform")?;
        self.c.expect('{')?;
        let (mut pivot, mut via, mut target, mut field, mut expect) = (None, None, None, None, None);
        let (mut renames, mut extras, mut aux) = (Vec::new(), Vec::new(), Vec::new());
        while !self.c.eat('}') {
            let key = self.c.ident()?;
            self.c.expect(':')?;
            match key.text.as_str() {
                "pivot" => {
                    let p = self.c.ident()?;
                    self.indep(&p)?;
                    pivot = Some(p);
                }
                "via" => via = Some(self.c.ident()?),
                "target" => target = Some(self.c.ident()?),
                "field" => field = Some(self.c.ident()?),
                "expect" => expect = Some(self.c.ident()?),
                "rename" => loop {
                    let from = self.c.ident()?;
                    self.indep(&from)?;
                    self.c.expect('-')?;
                    self.c.expect('>')?;
                    renames.push((from, self.c.ident()?));
                    if !self.c.eat(',') {
                        break;
                    }
                },
                "extra" => {
                    let var = self.c.ident()?;
                    self.indep(&var)?;
                    self.c.expect('=')?;
                    let e = self.expr()?;
                    extras.push((var, e));
                }
                "aux" => {
                    let var = self.c.ident()?;
                    self.c.expect('=')?;
                    let e = self.expr()?;
                    aux.push((var, e));
                }
                other => return Err(DslError::Syntax { pos: key.span.0, message: format!("unknown transform entry `{}`", other) }),
            }
            self.c.end_entry()?;
        }
        let pos = name.span.0;
        let pivot = pivot.ok_or(DslError::Invalid { pos, message: "transform needs a pivot".into() })?;
        let via = via.ok_or(DslError::Invalid { pos, message: "transform needs `via`".into() })?;
        Ok(Item::Transform(TransformDecl { name, pivot, via, target, field, renames, extras, aux, expect }))
    }

    fn lax_block(&mut self) -> Result<Item, DslError> {
        let name = self.c.ident()?;
        self.c.expect('{')?;
        let (mut eigen, mut equations, mut constraints, mut system) = (Vec::new(), Vec::new(), Vec::new(), None);
        while !self.c.eat('}') {
            let key = self.c.ident()?;
            match key.text.as_str() {
                "eigen" => {
                    self.c.expect(':')?;
                    for n in self.c.list()? {
                        self.field(&n)?;
                        eigen.push(n);
                    }
                }
                "yields" => {
                    self.c.expect(':')?;
                    system = Some(self.c.ident()?);
                }
                "eq" => {
                    let ename = self.c.ident()?.text;
                    self.c.expect('(')?;
                    let (lead_text, lpos) = self.c.raw(&[')'])?;
                    self.c.expect(')')?;
                    self.c.expect(':')?;
                    let lead = match expression(self.sp(lpos)?, &lead_text, lpos)?.jets().into_iter().next() {
                        Some(j) if Expression::atom(Atom::Jet(j.clone())) == expression(self.sp(lpos)?, &lead_text, lpos)? => j,
                        _ => return Err(DslError::Invalid { pos: lpos, message: format!("`{}` is not a jet", lead_text) }),
                    };
                    let (text, pos) = self.c.raw(&[])?;
                    let residual = expression(self.sp(pos)?, &text, pos)?;
                    equations.push(LaxEquationDecl { name: ename, lead, residual, span: Span(pos) });
                }
                "constraint" => {
                    let cname = if self.c.eat(':') {
                        self.fresh("constraint")
                    } else {
                        let n = self.c.ident()?.text;
                        self.c.expect(':')?;
                        n
                    };
                    let (text, pos) = self.c.raw(&[])?;
                    constraints.push(equation(self.sp(pos)?, cname, &text, pos)?);
                }
                other => return Err(DslError::Syntax { pos: key.span.0, message: format!("unknown lax entry `{}`", other) }),
            }
            self.c.end_entry()?;
        }
        Ok(Item::Lax(LaxDecl { name, eigen, equations, constraints, system }))
    }

    fn scenario_block(&mut self) -> Result<Item, DslError> {
        let name = self.optional_name("scenario")?;
        self.c.expect('{')?;
        let (mut run, mut n) = (None, None);
        while !self.c.eat('}') {
            let key = self.c.ident()?;
            self.c.expect(':')?;
            match key.text.as_str() {
                "run" => run = Some(self.c.ident()?),
                "n" => n = Some(self.c.integer()? as usize),
                other => return Err(DslError::Syntax { pos: key.span.0, message: format!("unknown scenario entry `{}`", other) }),
            }
            self.c.end_entry()?;
        }
        let run = run.ok_or(DslError::Invalid { pos: name.span.0, message: "scenario needs `run`".into() })?;
        Ok(Item::Scenario(ScenarioDecl { name, run, n }))
    }
}

fn block_name(i: &Item) -> Option<&Name> {
    match i {
        Item::Space(_) => None,
        Item::System(s) => Some(&s.name),
        Item::Conserved(c) => Some(&c.name),
        Item::Form(f) => Some(&f.name),
        Item::Transform(t) => Some(&t.name),
        Item::Lax(l) => Some(&l.name),
        Item::Scenario(s) => Some(&s.name),
    }
}

/// Every reference must name a block of the right kind.
fn resolve(doc: &Document) -> Vec<DslError> {
    let mut errs = Vec::new();
    let mut seen: Vec<&str> = Vec::new();
    for n in doc.items.iter().filter_map(block_name) {
        if seen.contains(&n.text.as_str()) {
            errs.push(DslError::Invalid { pos: n.span.0, message: format!("`{}` is declared twice", n.text) });
        }
        seen.push(&n.text);
    }
    let system = |n: &Option<Name>, errs: &mut Vec<DslError>| {
        if let Some(n) = n {
            if doc.system(&n.text).is_none() {
                errs.push(DslError::UnknownName { pos: n.span.0, name: n.text.clone() });
            }
        }
    };
    for c in doc.conserved() {
        system(&c.system, &mut errs);
    }
    for f in doc.forms() {
        system(&f.system, &mut errs);
    }
    for l in doc.laxes() {
        system(&l.system, &mut errs);
    }
    for t in doc.transforms() {
        system(&t.expect, &mut errs);
        let found = doc.conserved().any(|c| c.name.text == t.via.text) || doc.forms().any(|f| f.name.text == t.via.text);
        if !found {
            errs.push(DslError::UnknownName { pos: t.via.span.0, name: t.via.text.clone() });
        }
    }
    for s in doc.scenarios() {
        if scenarios::scenario(&s.run.text).is_none() {
            errs.push(DslError::UnknownName { pos: s.run.span.0, name: s.run.text.clone() });
        }
    }
    errs
}

/// Parse a document; on failure every diagnostic carries a position.
pub fn parse_document(text: &str) -> Result<Document, Vec<DslError>> {
    let mut p = Parser { c: Cursor { src: text, i: 0, line: 1, col: 1 }, space: None, counters: Default::default() };
    let mut doc = Document::default();
    while !p.c.at_end() {
        match p.item() {
            Ok(i) => doc.items.push(i),
            Err(e) => return Err(vec![e]),
        }
    }
    let errs = resolve(&doc);
    if errs.is_empty() {
        Ok(doc)
    } else {
        Err(errs)
    }
}

fn eq_text(e: &EquationDecl) -> String {
    if e.rhs.is_zero() {
        e.lhs.to_string()
    } else {
        format!("{} = {}", e.lhs, e.rhs)
    }
}

fn names(v: &[Name]) -> String {
    v.iter().map(|n| n.text.as_str()).collect::<Vec<_>>().join(", ")
}

/// Render a document back to the input language.
pub fn render(doc: &Document) -> String {
    let mut out = String::new();
    for item in &doc.items {
        match item {
            Item::Space(s) => {
                out.push_str(&format!("space {{\n  indep: {};\n  dep: {};\n", s.indep.join(", "), s.dep.join(", ")));
                if !s.params.is_empty() {
                    out.push_str(&format!("  params: {};\n", s.params.join(", ")));
                }
                out.push_str(&format!("  order: {}\n}}\n", s.order));
            }
            Item::System(s) => {
                out.push_str(&format!("system {} {{\n", s.name.text));
                for e in &s.equations {
                    out.push_str(&format!("  eq {}: {};\n", e.name, eq_text(e)));
                }
                for e in &s.aux {
                    out.push_str(&format!("  aux {}: {};\n", e.name, eq_text(e)));
                }
                if !s.eliminate.is_empty() {
                    out.push_str(&format!("  eliminate: {};\n", names(&s.eliminate)));
                }
                out.push_str("}\n");
            }
            Item::Conserved(c) => {
                out.push_str(&format!("conserved {} {{\n  A: {} on {};\n  B: {} on {};\n", c.name.text, c.a, c.var.text, c.b, c.var_prime.text));
                if let Some(s) = &c.system {
                    out.push_str(&format!("  in: {};\n", s.text));
                }
                out.push_str("}\n");
            }
            Item::Form(f) => {
                out.push_str(&format!("form {} {{\n  target: {};\n", f.name.text, f.target.text));
                for (v, e) in &f.coeffs {
                    out.push_str(&format!("  {}: {};\n", v.text, e));
                }
                if let Some(s) = &f.system {
                    out.push_str(&format!("  in: {};\n", s.text));
                }
                out.push_str("}\n");
            }
            Item::Transform(t) => {
                out.push_str(&format!("transform {} {{\n  pivot: {};\n  via: {};\n", t.name.text, t.pivot.text, t.via.text));
                for (k, v) in [("target", &t.target), ("field", &t.field), ("expect", &t.expect)] {
                    if let Some(v) = v {
                        out.push_str(&format!("  {}: {};\n", k, v.text));
                    }
                }
                if !t.renames.is_empty() {
                    let r: Vec<String> = t.renames.iter().map(|(a, b)| format!("{} -> {}", a.text, b.text)).collect();
                    out.push_str(&format!("  rename: {};\n", r.join(", ")));
                }
                for (v, e) in &t.extras {
                    out.push_str(&format!("  extra: {} = {};\n", v.text, e));
                }
                for (v, e) in &t.aux {
                    out.push_str(&format!("  aux: {} = {};\n", v.text, e));
                }
                out.push_str("}\n");
            }
            Item::Lax(l) => {
                out.push_str(&format!("lax {} {{\n  eigen: {};\n", l.name.text, names(&l.eigen)));
                for e in &l.equations {
                    out.push_str(&format!("  eq {}({}): {};\n", e.name, Expression::atom(Atom::Jet(e.lead.clone())), e.residual));
                }
                for c in &l.constraints {
                    out.push_str(&format!("  constraint {}: {};\n", c.name, eq_text(c)));
                }
                if let Some(s) = &l.system {
                    out.push_str(&format!("  yields: {};\n", s.text));
                }
                out.push_str("}\n");
            }
            Item::Scenario(s) => {
                out.push_str(&format!("scenario {} {{\n  run: {};\n", s.name.text, s.run.text));
                if let Some(n) = s.n {
                    out.push_str(&format!("  n: {};\n", n));
                }
                out.push_str("}\n");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file() {
        assert!(parse_document("").unwrap().is_empty());
        assert!(parse_document("  # nothing\n").unwrap().is_empty());
    }

    #[test]
    fn dangling_operator() {
        let src = "space { indep: x; dep: u, v; order: 2 }\nsystem s {\n  eq: u_x + = v;\n}\n";
        let errs = parse_document(src).unwrap_err();
        assert!(matches!(&errs[0], DslError::Syntax { pos: Pos { line: 3, col: 11 }, .. }), "{:?}", errs);
    }

    #[test]
    fn unknown_names() {
        let src = "space { indep: x, t; dep: u; order: 2 }\nconserved { A: u on t; B: u on x; in: nope }\n";
        let errs = parse_document(src).unwrap_err();
        assert!(matches!(&errs[0], DslError::UnknownName { name, pos } if name == "nope" && pos.line == 2));
        let src = "space { indep: x; dep: u; order: 2 }\nconserved { A: u on y; B: u on x }\n";
        assert!(matches!(&parse_document(src).unwrap_err()[0], DslError::UnknownName { name, .. } if name == "y"));
    }

    #[test]
    fn expressions_need_a_space() {
        let errs = parse_document("system s { eq: u = 0 }").unwrap_err();
        assert!(matches!(errs[0], DslError::Invalid { .. }));
    }

    #[test]
    fn positions_do_not_affect_equality() {
        let a = parse_document("space { indep: x; dep: u; order: 2 }\nsystem s { eq: u_x = u }").unwrap();
        let b = parse_document("space {indep: x; dep: u; order: 2}\n\n\nsystem s {\n  eq: u_x = u;\n}").unwrap();
        assert_eq!(a, b);
    }
}
