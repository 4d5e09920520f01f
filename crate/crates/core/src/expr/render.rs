//! Text and LaTeX rendering.
//!
//! Text output is valid DSL expression syntax; LaTeX output is accepted by
//! the same parser, so both round-trip.

use super::atom::{Atom, Symbol};
use super::poly::{Poly, Q};
use super::Expression;
use num_traits::{One, Signed};

const GREEK: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "epsilon", "varepsilon", "zeta", "eta", "theta", "iota",
    "kappa", "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "upsilon", "phi", "varphi",
    "chi", "psi", "omega", "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma", "Upsilon",
    "Phi", "Psi", "Omega",
];

/// LaTeX spelling of a name: Greek letters (optionally followed by digits)
/// get a backslash, everything else is left alone.
pub fn symbol_latex(s: &str) -> String {
    let stem = s.trim_end_matches(|c: char| c.is_ascii_digit());
    if GREEK.contains(&stem) {
        format!("\\{}", s)
    } else {
        s.to_string()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Style {
    Text,
    Latex,
}

fn atom_str(a: &Atom, style: Style, order: Option<&[Symbol]>) -> String {
    match (a, style) {
        (Atom::Indep(s) | Atom::Param(s), Style::Text) => s.to_string(),
        (Atom::Indep(s) | Atom::Param(s), Style::Latex) => symbol_latex(s.as_str()),
        (Atom::Jet(j), Style::Text) => j.name_with(order),
        (Atom::Jet(j), Style::Latex) => {
            let name = j.name_with(order);
            let field = j.field.as_str();
            format!("{}{}", symbol_latex(field), &name[field.len()..])
        }
        (Atom::Pow { base, exp }, Style::Text) => format!("{}^{}", base, exp),
        (Atom::Pow { base, exp }, Style::Latex) => {
            format!("{}^{{{}}}", symbol_latex(base.as_str()), symbol_latex(exp.as_str()))
        }
        (Atom::Sqrt(x), Style::Text) => format!("sqrt({})", atom_str(x, style, order)),
        (Atom::Sqrt(x), Style::Latex) => format!("\\sqrt{{{}}}", atom_str(x, style, order)),
        (Atom::Imag, _) => "I".to_string(),
    }
}

fn coeff_str(c: &Q, style: Style) -> String {
    if c.is_integer() {
        return c.numer().to_string();
    }
    match style {
        Style::Text => format!("{}/{}", c.numer(), c.denom()),
        Style::Latex => format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom()),
    }
}

fn poly_str(p: &Poly, style: Style, order: Option<&[Symbol]>) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let sep = if style == Style::Text { "*" } else { " " };
    let mut out = String::new();
    for (i, t) in p.terms().iter().enumerate() {
        let neg = t.coeff.is_negative();
        let c = t.coeff.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut parts = Vec::new();
        for (a, e) in p.vars().iter().zip(t.exps.iter()) {
            if *e == 0 {
                continue;
            }
            let s = atom_str(a, style, order);
            parts.push(match (*e, style) {
                (1, _) => s,
                (e, Style::Text) if matches!(a, Atom::Pow { .. }) => format!("({})^{}", s, e),
                (e, Style::Text) => format!("{}^{}", s, e),
                (e, Style::Latex) if matches!(a, Atom::Pow { .. }) => format!("{{{}}}^{{{}}}", s, e),
                (e, Style::Latex) => format!("{}^{{{}}}", s, e),
            });
        }
        if parts.is_empty() || !c.is_one() {
            parts.insert(0, coeff_str(&c, style));
        }
        out.push_str(&parts.join(sep));
    }
    out
}

fn simple_den(p: &Poly) -> bool {
    p.len() == 1 && p.terms()[0].exps.iter().sum::<u32>() == 1
}

fn expr_str(e: &Expression, style: Style, order: Option<&[Symbol]>) -> String {
    let n = poly_str(e.num(), style, order);
    if e.den().is_one() {
        return n;
    }
    let d = poly_str(e.den(), style, order);
    match style {
        Style::Latex => format!("\\frac{{{}}}{{{}}}", n, d),
        Style::Text => {
            let n = if e.num().len() > 1 { format!("({})", n) } else { n };
            let d = if simple_den(e.den()) { d } else { format!("({})", d) };
            format!("{}/{}", n, d)
        }
    }
}

pub fn to_text(e: &Expression) -> String {
    expr_str(e, Style::Text, None)
}

/// Text form with jet derivatives listed in the given variable order.
pub fn to_text_in(e: &Expression, order: &[Symbol]) -> String {
    expr_str(e, Style::Text, Some(order))
}

pub fn to_latex(e: &Expression) -> String {
    expr_str(e, Style::Latex, None)
}

pub fn to_latex_in(e: &Expression, order: &[Symbol]) -> String {
    expr_str(e, Style::Latex, Some(order))
}

pub fn atom_text(a: &Atom) -> String {
    atom_str(a, Style::Text, None)
}

pub fn atom_latex(a: &Atom) -> String {
    atom_str(a, Style::Latex, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greek_names() {
        assert_eq!(symbol_latex("Omega1"), "\\Omega1");
        assert_eq!(symbol_latex("phihat"), "phihat");
        assert_eq!(symbol_latex("P"), "P");
    }

    #[test]
    fn text_and_latex_forms() {
        let p = Expression::atom(Atom::field("P"));
        let o = Expression::atom(Atom::field("Omega1"));
        let e = -(&p * &o) / 2;
        assert_eq!(to_text(&e), "-1/2*Omega1*P");
        assert_eq!(to_latex(&e), "-\\frac{1}{2} \\Omega1 P");
        let f = Expression::one() / (&p + 1);
        assert_eq!(to_text(&f), "1/(P + 1)");
        assert_eq!(to_latex(&f), "\\frac{1}{P + 1}");
        let ux = Expression::atom(Atom::jet("u", &[("x", 2), ("y", 1)]));
        assert_eq!(to_text(&(&ux * &ux)), "u_{x^2 y}^2");
    }
}
