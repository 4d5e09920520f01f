use super::atom::{Atom, Jet};
use super::poly::Poly;
use super::render::atom_text;
use super::{ExprError, Expression};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use std::collections::HashMap;

/// Relative size below which a denominator counts as a pole.
pub const POLE_TOL: f64 = 1e-12;
/// Relative size of an imaginary part tolerated by real evaluation.
pub const REAL_TOL: f64 = 1e-9;

/// Numeric values for atoms. `I`, square roots and symbolic powers are
/// derived from the values of their constituents.
#[derive(Clone, Debug, Default)]
pub struct Assignment {
    values: HashMap<Atom, Complex64>,
}

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn set(&mut self, a: Atom, v: f64) {
        self.values.insert(a, Complex64::new(v, 0.0));
    }

    pub fn set_complex(&mut self, a: Atom, v: Complex64) {
        self.values.insert(a, v);
    }

    pub fn has(&self, a: &Atom) -> bool {
        self.values.contains_key(a)
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.values.keys()
    }

    pub fn value(&self, a: &Atom) -> Result<Complex64, ExprError> {
        if let Some(v) = self.values.get(a) {
            return Ok(*v);
        }
        match a {
            Atom::Imag => Ok(Complex64::new(0.0, 1.0)),
            Atom::Sqrt(x) => Ok(self.value(x)?.sqrt()),
            Atom::Pow { base, exp } => {
                let b = self.value(&Atom::Jet(Jet::plain(base.clone())))?;
                let e = self.value(&Atom::Param(exp.clone()))?;
                Ok(b.powc(e))
            }
            _ => Err(ExprError::MissingAtom(atom_text(a))),
        }
    }

    /// Value of a polynomial and the sum of absolute term values.
    pub fn eval_poly(&self, p: &Poly) -> Result<(Complex64, f64), ExprError> {
        let vals: Vec<Complex64> = p.vars().iter().map(|a| self.value(a)).collect::<Result<_, _>>()?;
        let mut s = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        for t in p.terms() {
            let mut v = Complex64::new(t.coeff.to_f64().unwrap_or(f64::NAN), 0.0);
            for (x, e) in vals.iter().zip(t.exps.iter()) {
                if *e > 0 {
                    v *= x.powu(*e);
                }
            }
            mag += v.norm();
            s += v;
        }
        Ok((s, mag))
    }

    pub fn eval_complex(&self, e: &Expression) -> Result<Complex64, ExprError> {
        let (n, _) = self.eval_poly(e.num())?;
        let (d, dm) = self.eval_poly(e.den())?;
        if d.norm() <= POLE_TOL * dm.max(1.0) {
            return Err(ExprError::NumericPole(d.norm()));
        }
        Ok(n / d)
    }

    pub fn eval_real(&self, e: &Expression) -> Result<f64, ExprError> {
        let z = self.eval_complex(e)?;
        if z.im.abs() > REAL_TOL * (1.0 + z.re.abs()) {
            return Err(ExprError::NonReal(z.im));
        }
        Ok(z.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_generators_and_poles() {
        let lam = Atom::field("lambda");
        let mut a = Assignment::new();
        a.set(lam.clone(), 4.0);
        let mu = Expression::sqrt_of(lam.clone());
        assert!((a.eval_real(&(&mu + 1)).unwrap() - 3.0).abs() < 1e-12);
        assert!(matches!(a.eval_real(&Expression::imag()), Err(ExprError::NonReal(_))));
        let e = Expression::one() / (Expression::atom(lam.clone()) - 4);
        assert!(matches!(a.eval_real(&e), Err(ExprError::NumericPole(_))));
        assert!(matches!(
            a.eval_real(&Expression::atom(Atom::field("u"))),
            Err(ExprError::MissingAtom(_))
        ));
    }
}
