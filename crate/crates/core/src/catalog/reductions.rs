use super::n0::{n0_final_with, psi_lax_with};
use super::{ex, lead, substitute_field, CatalogError};
use crate::expr::{Atom, Expression, Symbol};
use crate::jetspace::JetSpace;
use crate::lax::{reduce_lax, LaxEquation, LaxKind, LaxPair};
use crate::system::{Equation, PDESystem};
use std::collections::HashMap;

/// Set fields or parameters to values, zero every field jet that
/// differentiates along a dropped variable, and drop those variables.
pub fn reduce_system(sys: &PDESystem, settings: &[(&str, Expression)], drop: &[&str]) -> Result<PDESystem, CatalogError> {
    let drop: Vec<Symbol> = drop.iter().map(|s| Symbol::new(s)).collect();
    let mut params: Vec<Symbol> =
        sys.space.params().iter().filter(|p| !settings.iter().any(|(n, _)| p.as_str() == *n)).cloned().collect();
    for (_, v) in settings {
        for a in v.atoms() {
            if let Atom::Param(p) = a {
                if !params.contains(&p) {
                    params.push(p);
                }
            }
        }
    }
    let sp = JetSpace::from_symbols(
        sys.space.indep().iter().filter(|x| !drop.contains(x)).cloned().collect(),
        sys.space.dep().iter().filter(|f| !settings.iter().any(|(n, _)| f.as_str() == *n)).cloned().collect(),
        params.clone(),
        sys.space.order(),
    )?;
    let full = JetSpace::from_symbols(sys.space.indep().to_vec(), sys.space.dep().to_vec(), params, sys.space.order())?;
    let mut out = PDESystem::new(&format!("{} reduced", sys.name), &sp);
    out.eliminate = sys.eliminate.clone();
    for eq in &sys.equations {
        let mut e = eq.residual();
        for (n, v) in settings {
            e = if full.is_field(&Symbol::new(n)) {
                substitute_field(&full, &e, n, v)?
            } else {
                e.substitute_one(&Atom::Param(Symbol::new(n)), v)?
            };
        }
        let mut zero = HashMap::new();
        for a in e.atoms() {
            if let Atom::Jet(j) = &a {
                if j.derivs().iter().any(|(x, _)| drop.contains(x)) {
                    zero.insert(a.clone(), Expression::zero());
                }
            }
        }
        let e = e.substitute(&zero)?;
        if e.is_zero() {
            out.notes.push(format!("{} vanishes", eq.name));
        } else {
            out.equations.push(Equation::zero(&eq.name, e));
        }
    }
    Ok(out)
}

fn xt_space(fields: &[&str], params: &[&str]) -> Result<JetSpace, CatalogError> {
    Ok(JetSpace::with_params(&["x", "t"], fields, params, 7)?)
}

fn settings(sp: &JetSpace, a0: &str) -> Vec<(&'static str, Expression)> {
    vec![("epsilon", Expression::zero()), ("Omega", ex(sp, a0))]
}

fn strip(s: &str) -> Vec<&str> {
    [s].into_iter().filter(|a| !a.starts_with('(') && !a.starts_with('-') && a.parse::<f64>().is_err()).collect()
}

/// final1/final2 with epsilon = 0, Omega = a0, T dropped.
pub fn reduce_final(a1: &str, a2: &str, a0: &str) -> Result<PDESystem, CatalogError> {
    let sp = xt_space(&["beta"], &strip(a0))?;
    reduce_system(&n0_final_with(a1, a2)?, &settings(&sp, a0), &["T"])
}

/// 2 M A1 (beta_xx + a0 beta - 1/M)_x - A2 (M beta_xx + a0 beta + M)_x = 0 and M_t = 3 M beta_x - beta M_x.
pub fn reduced_system(a1: &str, a2: &str, a0: &str) -> Result<PDESystem, CatalogError> {
    let mut params = strip(a1);
    params.extend(strip(a2));
    params.extend(strip(a0));
    let sp = xt_space(&["M", "beta"], &params)?;
    let mut s = PDESystem::new("reduced", &sp);
    s.push_text(
        "reduced1",
        &format!(
            "2*M*{a1}*(beta_xxx + {a0}*beta_x + M_x/M^2) - {a2}*(M_x*beta_xx + M*beta_xxx + {a0}*beta_x + M_x) = 0",
            a1 = a1,
            a2 = a2,
            a0 = a0
        ),
    )?;
    s.push_text("reduced2", "M_t = 3*M*beta_x - beta*M_x")?;
    Ok(s)
}

/// beta_xx + a0 beta = 1/M + q0 and
/// (beta_xx + a0 beta)_t + beta beta_xxx + 3 beta_x beta_xx + 4 a0 beta beta_x - 3 q0 beta_x = 0.
pub fn dp_system(a0: &str, q0: &str) -> Result<PDESystem, CatalogError> {
    let mut params = strip(a0);
    params.extend(strip(q0));
    let sp = xt_space(&["M", "beta"], &params)?;
    let mut s = PDESystem::new("Degasperis-Procesi", &sp);
    s.push_text("dp1", &format!("beta_xx + {a0}*beta = 1/M + {q0}", a0 = a0, q0 = q0))?;
    s.push_text(
        "dp2",
        &format!(
            "beta_xxt + {a0}*beta_t + beta*beta_xxx + 3*beta_x*beta_xx + 4*{a0}*beta*beta_x - 3*{q0}*beta_x = 0",
            a0 = a0,
            q0 = q0
        ),
    )?;
    s.eliminate = vec![Symbol::new("M")];
    Ok(s)
}

/// beta_xx + 1 = q0/M and ((beta_t + beta beta_x)_x + 3 beta)_x = 0.
pub fn vakhnenko_system() -> Result<PDESystem, CatalogError> {
    let sp = xt_space(&["M", "beta"], &["q0"])?;
    let mut s = PDESystem::new("Vakhnenko", &sp);
    s.push_text("vakh1", "beta_xx + 1 = q0/M")?;
    s.push_text("vakh2", "beta_txx + beta*beta_xxx + 3*beta_x*beta_xx + 3*beta_x = 0")?;
    s.eliminate = vec![Symbol::new("M")];
    Ok(s)
}

/// The reduced system of the DP branch (A1 = 1, A2 = 0, a0 = -1) with its
/// first integral beta_xx - beta = 1/M (q0 = 0).
pub fn dp_reduction() -> Result<PDESystem, CatalogError> {
    let mut s = reduced_system("1", "0", "(-1)")?;
    s.push_text("integral", "beta_xx - beta = 1/M")?;
    s.eliminate = vec![Symbol::new("M")];
    Ok(s)
}

/// The reduced system of the Vakhnenko branch (A1 = 0, A2 = 1, a0 = 0)
/// with its first integral M beta_xx + M = q0.
pub fn vakhnenko_reduction() -> Result<PDESystem, CatalogError> {
    let mut s = reduced_system("0", "1", "0")?;
    s.space = s.space.add_params(&["q0"])?;
    s.push_text("integral", "M*beta_xx + M = q0")?;
    s.eliminate = vec![Symbol::new("M")];
    Ok(s)
}

/// The psi pair reduced by psi_T = lambda psi, epsilon = 0, Omega = a0.
pub fn reduce_psi_lax(a1: &str, a2: &str, a0: &str) -> Result<LaxPair, CatalogError> {
    let lp = psi_lax_with(a1, a2)?;
    let sp = lp.space.add_fields(&["lambda"])?;
    let sp0 = xt_space(&["beta"], &strip(a0))?;
    let rules = vec![(lead("psi", &[("T", 1)]), ex(&sp, "lambda*psi"))];
    Ok(reduce_lax(&lp, &rules, &settings(&sp0, a0), &["T"], Some("lambda"))?)
}

fn spectral(name: &str, sp: &JetSpace, e1: &str, e2: &str) -> Result<LaxPair, CatalogError> {
    let eqs = vec![
        LaxEquation { name: "spatial".into(), lead: lead("psi", &[("x", 3)]), residual: ex(sp, e1) },
        LaxEquation { name: "temporal".into(), lead: lead("psi", &[("t", 1)]), residual: ex(sp, e2) },
    ];
    Ok(LaxPair::new(name, sp, LaxKind::Scalar, &["psi"], eqs)?
        .with_constraint("lambda_x", "lambda_x = 0")?
        .with_constraint("lambda_t", "lambda_t = 0")?)
}

/// The reduced spectral problem with A1, A2 and a0.
pub fn reduced_lax(a1: &str, a2: &str, a0: &str) -> Result<LaxPair, CatalogError> {
    let mut params = strip(a1);
    params.extend(strip(a2));
    params.extend(strip(a0));
    let sp = xt_space(&["M", "beta", "psi", "lambda"], &params)?;
    spectral(
        "reduced pair",
        &sp,
        &format!(
            "{a1}*(psi_xxx + {a0}*psi_x - lambda/M*psi) \
             + {a2}*(psi_xxx + 2*M_x/M*psi_xx + 1/M*(M_xx + {a0})*psi_x - lambda/M*psi)",
            a1 = a1,
            a2 = a2,
            a0 = a0
        ),
        &format!(
            "{a1}*(lambda*psi_t + psi_xx + lambda*beta*psi_x + ({a0} - lambda*beta_x)*psi) \
             + {a2}*(lambda*psi_t + M*psi_xx + (lambda*beta + M_x)*psi_x + ({a0} + lambda*beta_x)*psi)",
            a1 = a1,
            a2 = a2,
            a0 = a0
        ),
    )
}

/// psi_xxx - psi_x - lambda (beta_xx - beta) psi = 0 and
/// lambda psi_t + psi_xx + lambda beta psi_x - (1 + lambda beta_x) psi = 0.
pub fn dp_lax() -> Result<LaxPair, CatalogError> {
    let sp = xt_space(&["M", "beta", "psi", "lambda"], &[])?;
    spectral(
        "Degasperis-Procesi pair",
        &sp,
        "psi_xxx - psi_x - lambda*(beta_xx - beta)*psi",
        "lambda*psi_t + psi_xx + lambda*beta*psi_x - (1 + lambda*beta_x)*psi",
    )
}

/// psi_xxx + 2 M_x/M psi_xx + M_xx/M psi_x - lambda/M psi = 0 and
/// lambda psi_t + M psi_xx + (lambda beta + M_x) psi_x + lambda beta_x psi = 0.
pub fn vakhnenko_lax() -> Result<LaxPair, CatalogError> {
    vakhnenko_lax_with("2")
}

/// The Vakhnenko pair with the given psi_xx coefficient factor in front of M_x/M.
pub fn vakhnenko_lax_with(factor: &str) -> Result<LaxPair, CatalogError> {
    let sp = xt_space(&["M", "beta", "psi", "lambda"], &["q0"])?;
    spectral(
        "Vakhnenko pair",
        &sp,
        &format!("psi_xxx + {}*M_x/M*psi_xx + M_xx/M*psi_x - lambda/M*psi", factor),
        "lambda*psi_t + M*psi_xx + (lambda*beta + M_x)*psi_x + lambda*beta_x*psi",
    )
}

/// The reduced pair of the DP branch with a0 = -1 and M = 1/(beta_xx - beta).
pub fn dp_lax_from_reduction() -> Result<LaxPair, CatalogError> {
    let lp = reduced_lax("1", "0", "(-1)")?;
    let m = ex(&lp.space, "1/(beta_xx - beta)");
    Ok(reduce_lax(&lp, &[], &[("M", m)], &[], None)?)
}

/// The reduced pair of the A2 branch specialized to a0 = 0.
pub fn vakhnenko_lax_from_reduction() -> Result<LaxPair, CatalogError> {
    let lp = reduced_lax("0", "1", "a0")?;
    Ok(reduce_lax(&lp, &[], &[("a0", Expression::zero())], &[], None)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lax::{pair_implied_by, verify_yields};
    use crate::system::systems_equivalent;

    #[test]
    fn final_reduces_to_displayed() {
        for (a1, a2) in [("1", "0"), ("0", "1"), ("A1", "A2")] {
            let got = reduce_final(a1, a2, "a0").unwrap();
            assert_eq!(got.len(), 2, "{:?}", got.equations);
            let rep = systems_equivalent(&got, &reduced_system(a1, a2, "a0").unwrap()).unwrap();
            assert!(rep.holds(), "{:#?}", rep);
        }
    }

    #[test]
    fn dp_and_vakhnenko() {
        let rep = systems_equivalent(&dp_reduction().unwrap(), &dp_system("(-1)", "0").unwrap()).unwrap();
        assert!(rep.holds(), "{:#?}", rep);
        let rep = systems_equivalent(&vakhnenko_reduction().unwrap(), &vakhnenko_system().unwrap()).unwrap();
        assert!(rep.holds(), "{:#?}", rep);
    }

    #[test]
    fn reduced_pairs() {
        for (a1, a2) in [("1", "0"), ("0", "1")] {
            let got = reduce_psi_lax(a1, a2, "a0").unwrap();
            let shown = reduced_lax(a1, a2, "a0").unwrap();
            let rep = pair_implied_by(&got, &shown, None).unwrap();
            assert!(rep.holds(), "{} {} {:#?}", a1, a2, rep);
        }
    }

    #[test]
    fn specializations() {
        let got = dp_lax_from_reduction().unwrap();
        let dp = dp_lax().unwrap();
        assert!(pair_implied_by(&got, &dp, None).unwrap().holds());
        assert!(pair_implied_by(&dp, &got, None).unwrap().holds());
        let got = vakhnenko_lax_from_reduction().unwrap();
        let v = vakhnenko_lax().unwrap();
        assert!(pair_implied_by(&got, &v, None).unwrap().holds());
        assert!(pair_implied_by(&v, &got, None).unwrap().holds());
        assert!(!pair_implied_by(&vakhnenko_lax_with("1").unwrap(), &got, None).unwrap().holds());
    }

    #[test]
    fn pairs_yield_their_equations() {
        let rep = verify_yields(&dp_lax().unwrap(), &dp_system("(-1)", "0").unwrap()).unwrap();
        assert!(rep.holds(), "{:#?}", rep);
        let rep = verify_yields(&vakhnenko_lax().unwrap(), &vakhnenko_system().unwrap()).unwrap();
        assert!(rep.holds(), "{:#?}", rep);
        assert!(!verify_yields(&vakhnenko_lax_with("1").unwrap(), &vakhnenko_system().unwrap()).unwrap().holds());
    }
}
