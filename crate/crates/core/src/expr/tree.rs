use super::atom::Atom;
use super::eval::Assignment;
use super::poly::{Poly, Q};
use super::{ExprError, Expression};
use num_complex::Complex64;
use num_traits::ToPrimitive;

/// Unnormalized expression syntax tree, as produced by the parser.
#[derive(Clone, Debug, PartialEq)]
pub enum ExprTree {
    Num(Q),
    Atom(Atom),
    Add(Vec<ExprTree>),
    Mul(Vec<ExprTree>),
    Neg(Box<ExprTree>),
    Div(Box<ExprTree>, Box<ExprTree>),
    Pow(Box<ExprTree>, i32),
}

impl ExprTree {
    pub fn normalize(&self) -> Result<Expression, ExprError> {
        Ok(match self {
            ExprTree::Num(c) => Expression::constant(c.clone()),
            ExprTree::Atom(a) => Expression::atom(a.clone()),
            ExprTree::Add(xs) => {
                let mut acc = Expression::zero();
                for x in xs {
                    acc = acc.add(&x.normalize()?);
                }
                acc
            }
            ExprTree::Mul(xs) => {
                let mut acc = Expression::one();
                for x in xs {
                    acc = acc.mul(&x.normalize()?);
                }
                acc
            }
            ExprTree::Neg(x) => x.normalize()?.neg(),
            ExprTree::Div(a, b) => a.normalize()?.checked_div(&b.normalize()?)?,
            ExprTree::Pow(x, e) => x.normalize()?.pow(*e)?,
        })
    }

    /// Direct evaluation without normalization.
    pub fn eval_complex(&self, a: &Assignment) -> Result<Complex64, ExprError> {
        Ok(match self {
            ExprTree::Num(c) => Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0),
            ExprTree::Atom(x) => a.value(x)?,
            ExprTree::Add(xs) => {
                let mut s = Complex64::new(0.0, 0.0);
                for x in xs {
                    s += x.eval_complex(a)?;
                }
                s
            }
            ExprTree::Mul(xs) => {
                let mut s = Complex64::new(1.0, 0.0);
                for x in xs {
                    s *= x.eval_complex(a)?;
                }
                s
            }
            ExprTree::Neg(x) => -x.eval_complex(a)?,
            ExprTree::Div(p, q) => {
                let d = q.eval_complex(a)?;
                if d.norm() < 1e-300 {
                    return Err(ExprError::NumericPole(d.norm()));
                }
                p.eval_complex(a)? / d
            }
            ExprTree::Pow(x, e) => x.eval_complex(a)?.powi(*e),
        })
    }

    pub fn atoms(&self, out: &mut Vec<Atom>) {
        match self {
            ExprTree::Num(_) => {}
            ExprTree::Atom(x) => {
                if !out.contains(x) {
                    out.push(x.clone())
                }
            }
            ExprTree::Add(xs) | ExprTree::Mul(xs) => xs.iter().for_each(|x| x.atoms(out)),
            ExprTree::Neg(x) | ExprTree::Pow(x, _) => x.atoms(out),
            ExprTree::Div(p, q) => {
                p.atoms(out);
                q.atoms(out);
            }
        }
    }
}

fn poly_tree(p: &Poly) -> ExprTree {
    let terms = p
        .terms()
        .iter()
        .map(|t| {
            let mut fs = vec![ExprTree::Num(t.coeff.clone())];
            for (a, e) in p.vars().iter().zip(t.exps.iter()) {
                match e {
                    0 => {}
                    1 => fs.push(ExprTree::Atom(a.clone())),
                    e => fs.push(ExprTree::Pow(Box::new(ExprTree::Atom(a.clone())), *e as i32)),
                }
            }
            ExprTree::Mul(fs)
        })
        .collect();
    ExprTree::Add(terms)
}

impl From<&Expression> for ExprTree {
    fn from(e: &Expression) -> Self {
        if e.den().is_one() {
            poly_tree(e.num())
        } else {
            ExprTree::Div(Box::new(poly_tree(e.num())), Box::new(poly_tree(e.den())))
        }
    }
}

