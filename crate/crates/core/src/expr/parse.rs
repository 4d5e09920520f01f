//! Expression parser for the DSL text form and the LaTeX subset we emit.
//!
//! Accepts `+ - * /`, implicit multiplication, `^n`, `^{n}`, `\frac{a}{b}`,
//! `\cdot`, `\sqrt{x}` / `sqrt(x)`, `I`, backslash-prefixed names and jet
//! suffixes `u_x`, `u_{x,x,y}`, `u_{x^2 y}`. Names are mapped to atoms by a
//! [`Resolver`].

use super::atom::{Atom, Jet, Symbol};
use super::poly::Q;
use super::tree::ExprTree;
use num_bigint::BigInt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{msg} (at byte {pos})")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl ParseError {
    fn new(pos: usize, msg: impl Into<String>) -> Self {
        ParseError { pos, msg: msg.into() }
    }
}

/// Derivative suffix attached to a name.
#[derive(Debug, Clone, PartialEq)]
pub enum Suffix {
    None,
    /// `u_xy`: a run of letters whose split into variables is up to the resolver.
    Word(String),
    /// `u_{x,x,y}` or `u_{x^2 y}`.
    List(Vec<(String, u32)>),
}

pub trait Resolver {
    fn resolve(&self, name: &str, suffix: &Suffix) -> Result<Atom, String>;

    fn pow_atom(&self, base: &Atom, exp: &str) -> Result<Atom, String> {
        match base {
            Atom::Jet(j) if j.derivs().is_empty() => {
                Ok(Atom::Pow { base: j.field.clone(), exp: Symbol::new(exp) })
            }
            _ => Err("symbolic exponents apply only to undifferentiated fields".into()),
        }
    }
}

/// Every name is a field; a word suffix is split into one-letter variables.
pub struct FreeResolver;

impl Resolver for FreeResolver {
    fn resolve(&self, name: &str, suffix: &Suffix) -> Result<Atom, String> {
        let derivs: Vec<(Symbol, u32)> = match suffix {
            Suffix::None => Vec::new(),
            Suffix::Word(w) => w.chars().map(|c| (Symbol::new(&c.to_string()), 1)).collect(),
            Suffix::List(l) => l.iter().map(|(s, c)| (Symbol::new(s), *c)).collect(),
        };
        Ok(Atom::Jet(Jet::new(Symbol::new(name), derivs)))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Underscore,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Frac,
    Sqrt,
    Eof,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n) => format!("number `{}`", n),
        Tok::Ident(s) => format!("name `{}`", s),
        Tok::Eof => "end of input".into(),
        Tok::Frac => "`\\frac`".into(),
        Tok::Sqrt => "`sqrt`".into(),
        other => {
            let c = match other {
                Tok::Plus => "+",
                Tok::Minus => "-",
                Tok::Star => "*",
                Tok::Slash => "/",
                Tok::Caret => "^",
                Tok::Underscore => "_",
                Tok::Comma => ",",
                Tok::LParen => "(",
                Tok::RParen => ")",
                Tok::LBrace => "{",
                _ => "}",
            };
            format!("`{}`", c)
        }
    }
}

/// Tokens with byte offsets; `space_before` marks whitespace preceding a token.
fn lex(src: &str) -> Result<Vec<(Tok, usize, bool)>, ParseError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut space = false;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            space = true;
            i += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() {
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            Tok::Num(src[start..i].parse().expect("digits"))
        } else if c.is_ascii_alphabetic() {
            while i < b.len() && b[i].is_ascii_alphanumeric() {
                i += 1;
            }
            match &src[start..i] {
                "sqrt" => Tok::Sqrt,
                s => Tok::Ident(s.to_string()),
            }
        } else if c == '\\' {
            i += 1;
            while i < b.len() && b[i].is_ascii_alphanumeric() {
                i += 1;
            }
            match &src[start + 1..i] {
                "" => return Err(ParseError::new(start, "lone backslash")),
                "frac" | "dfrac" => Tok::Frac,
                "sqrt" => Tok::Sqrt,
                "cdot" | "times" => Tok::Star,
                "left" | "right" => {
                    space = true;
                    continue;
                }
                s => Tok::Ident(s.to_string()),
            }
        } else {
            i += 1;
            match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '_' => Tok::Underscore,
                ',' => Tok::Comma,
                '(' | '[' => Tok::LParen,
                ')' | ']' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                _ => return Err(ParseError::new(start, format!("unexpected character `{}`", c))),
            }
        };
        out.push((tok, start, space));
        space = false;
    }
    out.push((Tok::Eof, src.len(), space));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize, bool)>,
    i: usize,
    res: &'a dyn Resolver,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> usize {
        self.toks[self.i].1
    }

    fn space_before(&self) -> bool {
        self.toks[self.i].2
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if t != Tok::Eof {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::new(
                self.pos(),
                format!("expected {}, found {}", describe(&t), describe(self.peek())),
            ))
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(self.peek(), Tok::Num(_) | Tok::Ident(_) | Tok::LParen | Tok::LBrace | Tok::Frac | Tok::Sqrt)
    }

    fn expr(&mut self) -> Result<ExprTree, ParseError> {
        let mut terms = Vec::new();
        let mut neg = false;
        let mut op_pos = None;
        match self.peek() {
            Tok::Plus => {
                op_pos = Some(self.pos());
                self.bump();
            }
            Tok::Minus => {
                op_pos = Some(self.pos());
                neg = true;
                self.bump();
            }
            _ => {}
        }
        loop {
            if !self.starts_factor() && !matches!(self.peek(), Tok::Minus) {
                return Err(match op_pos {
                    Some(p) => ParseError::new(p, "operator has no right operand"),
                    None => ParseError::new(
                        self.pos(),
                        format!("expected an expression, found {}", describe(self.peek())),
                    ),
                });
            }
            let t = self.term()?;
            terms.push(if neg { ExprTree::Neg(Box::new(t)) } else { t });
            match self.peek() {
                Tok::Plus => neg = false,
                Tok::Minus => neg = true,
                _ => break,
            }
            op_pos = Some(self.pos());
            self.bump();
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { ExprTree::Add(terms) })
    }

    fn term(&mut self) -> Result<ExprTree, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    let p = self.pos();
                    self.bump();
                    let f = self.operand(p)?;
                    acc = ExprTree::Mul(vec![acc, f]);
                }
                Tok::Slash => {
                    let p = self.pos();
                    self.bump();
                    let f = self.operand(p)?;
                    acc = ExprTree::Div(Box::new(acc), Box::new(f));
                }
                _ if self.starts_factor() => {
                    let f = self.factor()?;
                    acc = ExprTree::Mul(vec![acc, f]);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn operand(&mut self, op_pos: usize) -> Result<ExprTree, ParseError> {
        if !self.starts_factor() && *self.peek() != Tok::Minus {
            return Err(ParseError::new(op_pos, "operator has no right operand"));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<ExprTree, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(ExprTree::Neg(Box::new(self.factor()?)));
        }
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let caret = self.pos();
        self.bump();
        let braced = match self.peek() {
            Tok::LBrace => Some(Tok::RBrace),
            Tok::LParen => Some(Tok::RParen),
            _ => None,
        };
        if braced.is_some() {
            self.bump();
        }
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let pos = self.pos();
        let out = match self.bump() {
            Tok::Num(n) => {
                let e: i32 = n
                    .try_into()
                    .map_err(|_| ParseError::new(pos, "exponent too large"))?;
                ExprTree::Pow(Box::new(base), if neg { -e } else { e })
            }
            Tok::Ident(s) if !neg => match base {
                ExprTree::Atom(a) => {
                    ExprTree::Atom(self.res.pow_atom(&a, &s).map_err(|m| ParseError::new(pos, m))?)
                }
                _ => return Err(ParseError::new(pos, "symbolic exponent needs a plain field base")),
            },
            t => {
                return Err(ParseError::new(
                    caret,
                    format!("expected an exponent after `^`, found {}", describe(&t)),
                ))
            }
        };
        if let Some(close) = braced {
            self.expect(close)?;
        }
        Ok(out)
    }

    fn primary(&mut self) -> Result<ExprTree, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(n) => Ok(ExprTree::Num(Q::from_integer(n))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::LBrace => {
                let e = self.expr()?;
                self.expect(Tok::RBrace)?;
                Ok(e)
            }
            Tok::Frac => {
                self.expect(Tok::LBrace)?;
                let a = self.expr()?;
                self.expect(Tok::RBrace)?;
                self.expect(Tok::LBrace)?;
                let b = self.expr()?;
                self.expect(Tok::RBrace)?;
                Ok(ExprTree::Div(Box::new(a), Box::new(b)))
            }
            Tok::Sqrt => {
                let close = match self.bump() {
                    Tok::LParen => Tok::RParen,
                    Tok::LBrace => Tok::RBrace,
                    _ => return Err(ParseError::new(pos, "expected `(` or `{` after sqrt")),
                };
                let inner_pos = self.pos();
                let inner = self.expr()?;
                self.expect(close)?;
                match inner {
                    ExprTree::Atom(a) if !a.is_generator() => Ok(ExprTree::Atom(Atom::Sqrt(Box::new(a)))),
                    _ => Err(ParseError::new(inner_pos, "sqrt takes a single symbol")),
                }
            }
            Tok::Ident(name) => {
                let suffix = self.suffix()?;
                if name == "I" && suffix == Suffix::None {
                    return Ok(ExprTree::Atom(Atom::Imag));
                }
                self.res
                    .resolve(&name, &suffix)
                    .map(ExprTree::Atom)
                    .map_err(|m| ParseError::new(pos, m))
            }
            t => Err(ParseError::new(pos, format!("expected an expression, found {}", describe(&t)))),
        }
    }

    fn suffix(&mut self) -> Result<Suffix, ParseError> {
        if *self.peek() != Tok::Underscore || self.space_before() {
            return Ok(Suffix::None);
        }
        self.bump();
        let pos = self.pos();
        match self.bump() {
            Tok::Ident(w) => Ok(Suffix::Word(w)),
            Tok::LBrace => {
                let mut items: Vec<(String, u32)> = Vec::new();
                loop {
                    match self.peek().clone() {
                        Tok::RBrace => {
                            self.bump();
                            break;
                        }
                        Tok::Comma => {
                            self.bump();
                        }
                        Tok::Ident(v) => {
                            self.bump();
                            let mut c = 1u32;
                            if *self.peek() == Tok::Caret {
                                self.bump();
                                let braced = *self.peek() == Tok::LBrace;
                                if braced {
                                    self.bump();
                                }
                                let p = self.pos();
                                c = match self.bump() {
                                    Tok::Num(n) => n
                                        .try_into()
                                        .map_err(|_| ParseError::new(p, "derivative count too large"))?,
                                    t => {
                                        return Err(ParseError::new(
                                            p,
                                            format!("expected a derivative count, found {}", describe(&t)),
                                        ))
                                    }
                                };
                                if braced {
                                    self.expect(Tok::RBrace)?;
                                }
                            }
                            items.push((v, c));
                        }
                        t => {
                            return Err(ParseError::new(
                                self.pos(),
                                format!("unexpected {} in derivative list", describe(&t)),
                            ))
                        }
                    }
                }
                if items.is_empty() {
                    return Err(ParseError::new(pos, "empty derivative list"));
                }
                Ok(Suffix::List(items))
            }
            t => Err(ParseError::new(pos, format!("expected derivative variables, found {}", describe(&t)))),
        }
    }
}

pub fn parse_tree(src: &str, res: &dyn Resolver) -> Result<ExprTree, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, i: 0, res };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(ParseError::new(p.pos(), format!("unexpected {}", describe(p.peek()))));
    }
    Ok(e)
}

/// Parse and normalize; normalization failures are reported at position 0.
pub fn parse_expression(src: &str, res: &dyn Resolver) -> Result<super::Expression, ParseError> {
    let t = parse_tree(src, res)?;
    t.normalize().map_err(|e| ParseError::new(0, e.to_string()))
}
