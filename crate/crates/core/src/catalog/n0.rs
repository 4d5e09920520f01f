use super::{ex, lead, substitute_field, CatalogError};
use crate::expr::gcd::gcd;
use crate::expr::{Atom, Poly, Symbol, Q};
use crate::jetspace::JetSpace;
use crate::lax::{transform_lax, GaugeFactor, LaxEquation, LaxKind, LaxPair};
use crate::recip::{ReciprocalTransform, TransformBuilder};
use crate::system::{parse_equation, verify_closed, Equation, OneForm, PDESystem};

/// The exponent k of H_{x2} = alpha^k, either a number or a free parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum K {
    Value(i64),
    Symbolic,
}

impl K {
    pub fn int(k: i64) -> K {
        K::Value(k)
    }

    pub(crate) fn text(&self) -> String {
        match self {
            K::Value(q) => format!("({})", q),
            K::Symbolic => "k".into(),
        }
    }

    /// alpha^(k + shift) as parser input.
    fn alpha_pow(&self, shift: i64) -> String {
        match self {
            K::Value(k) => format!("alpha^({})", k + shift),
            K::Symbolic => format!("alpha^k*alpha^({})", shift),
        }
    }

    /// A1 = (k+1)/3 and A2 = (2-k)/3.
    pub fn a1_a2(&self) -> Option<(Q, Q)> {
        match self {
            K::Value(k) => Some((Q::new((k + 1).into(), 3.into()), Q::new((2 - k).into(), 3.into()))),
            K::Symbolic => None,
        }
    }

    fn params(&self) -> Vec<&'static str> {
        match self {
            K::Value(_) => vec![],
            K::Symbolic => vec!["k"],
        }
    }

    /// Whether k^2 = k + 2.
    pub fn is_integrable(&self) -> bool {
        match self {
            K::Value(k) => k * k == k + 2,
            K::Symbolic => false,
        }
    }
}

impl From<i64> for K {
    fn from(k: i64) -> K {
        K::int(k)
    }
}

fn space(k: &K, extra: &[&str]) -> Result<JetSpace, CatalogError> {
    let mut dep = vec!["H", "Omega"];
    dep.extend_from_slice(extra);
    Ok(JetSpace::with_params(&["x1", "x2", "x3"], &dep, &k.params(), 6)?)
}

/// H_{x1x1x2} + 3 H_{x2} H_{x1} - (k+1)/4 H_{x1x2}^2/H_{x2} = Omega and Omega_{x1} = H_{x2x3}.
pub fn n0_system(k: impl Into<K>) -> Result<PDESystem, CatalogError> {
    let k = k.into();
    let sp = space(&k, &[])?;
    let mut s = PDESystem::new(&format!("n0(k={})", k.text()), &sp);
    s.push_text(
        "n0",
        &format!("H_x1x1x2 + 3*H_x2*H_x1 - ({}+1)/4*H_x1x2^2/H_x2 = Omega", k.text()),
    )?;
    s.push_text("Omega", "Omega_x1 = H_x2x3")?;
    Ok(s)
}

/// phi_{x1x1x1} - phi_{x3} + 3 H_{x1} phi_{x1} - (k-5)/2 H_{x1x1} phi = 0 (solved for phi_{x3}) and
/// phi_{x1x2} + H_{x2} phi + (k-5)/6 H_{x1x2}/H_{x2} phi_{x2} = 0.
pub fn n0_lax(k: impl Into<K>) -> Result<LaxPair, CatalogError> {
    let k = k.into();
    let sp = space(&k, &["phi"])?;
    let kt = k.text();
    let eqs = vec![
        LaxEquation {
            name: "temporal".into(),
            lead: lead("phi", &[("x3", 1)]),
            residual: ex(&sp, &format!("phi_x1x1x1 - phi_x3 + 3*H_x1*phi_x1 - ({}-5)/2*H_x1x1*phi", kt)),
        },
        LaxEquation {
            name: "spatial".into(),
            lead: lead("phi", &[("x1", 1), ("x2", 1)]),
            residual: ex(&sp, &format!("phi_x1x2 + H_x2*phi + ({}-5)/6*H_x1x2/H_x2*phi_x2", kt)),
        },
    ];
    Ok(LaxPair::new(&format!("n0_lax(k={})", kt), &sp, LaxKind::Scalar, &["phi"], eqs)?)
}

pub(crate) fn target_space(k: &K, fields: &[&str]) -> Result<JetSpace, CatalogError> {
    Ok(JetSpace::with_params(&["x", "t", "T"], fields, &k.params(), 7)?)
}

fn equations(sp: &JetSpace, eqs: &[(&str, String)]) -> Result<Vec<Equation>, CatalogError> {
    eqs.iter().map(|(n, t)| Ok(parse_equation(n, t, sp)?)).collect()
}

/// Closure of dx1 = alpha (dx - beta dt - epsilon dT).
fn transf1(k: &K) -> Result<Vec<Equation>, CatalogError> {
    let sp = target_space(k, &["alpha", "beta", "epsilon"])?;
    equations(
        &sp,
        &[
            ("transf1a", "alpha_t + alpha_x*beta + alpha*beta_x = 0".to_string()),
            ("transf1b", "alpha_T + alpha_x*epsilon + alpha*epsilon_x = 0".to_string()),
            ("transf1c", "beta_T - epsilon_t + epsilon*beta_x - epsilon_x*beta = 0".to_string()),
        ],
    )
}

/// x1 becomes a field of (x, t, T) with dx1 = alpha (dx - beta dt - epsilon dT),
/// x2 = t, x3 = T and H_{x2} = alpha^k; x1 and H are eliminated.
pub fn n0_transform(k: impl Into<K>) -> Result<ReciprocalTransform, CatalogError> {
    let k = k.into();
    let src = space(&k, &[])?;
    let mixed = src.add_fields(&["alpha"])?;
    let tsp = target_space(&k, &["alpha", "beta", "epsilon"])?;
    let mut b = TransformBuilder::from_gradient(&src, "x1")
        .target_pivot("x")
        .rename("x2", "t")
        .rename("x3", "T")
        .new_field("x1")
        .target_fields(&["alpha", "beta", "epsilon"])
        .gradient("x", ex(&tsp, "alpha"))
        .gradient("t", ex(&tsp, "-alpha*beta"))
        .gradient("T", ex(&tsp, "-alpha*epsilon"))
        .relation(parse_equation("H_x2", &format!("H_x2 = {}", k.alpha_pow(0)), &mixed)?)
        .eliminate(&["x1", "H"]);
    for eq in transf1(&k)? {
        b = b.adjoin(eq);
    }
    Ok(b.build()?)
}

/// The closed one-form dx1 = alpha dx - alpha beta dt - alpha epsilon dT.
pub fn n0_one_form() -> Result<OneForm, CatalogError> {
    let sp = target_space(&K::Value(0), &["alpha", "beta", "epsilon"])?;
    Ok(OneForm::new(
        "x1",
        vec![("x", ex(&sp, "alpha")), ("t", ex(&sp, "-alpha*beta")), ("T", ex(&sp, "-alpha*epsilon"))],
    )?)
}

/// H_{x1} = (Omega/alpha^k - k alpha_xx/alpha^3 + (2k-1) alpha_x^2/alpha^4)/3.
pub fn n0_h_x1(k: impl Into<K>) -> Result<crate::expr::Expression, CatalogError> {
    let k = k.into();
    let sp = target_space(&k, &["Omega", "alpha"])?;
    let kt = k.text();
    Ok(ex(
        &sp,
        &format!(
            "1/3*(Omega/({}) - {kt}*alpha_xx/alpha^3 + (2*{kt}-1)*alpha_x^2/alpha^4)",
            k.alpha_pow(0),
            kt = kt
        ),
    ))
}

/// The closure conditions d^2 x1 = 0 as a system, one equation per pair of variables.
pub fn n0_closure() -> Result<PDESystem, CatalogError> {
    let k = K::Value(0);
    let sp = target_space(&k, &["alpha", "beta", "epsilon"])?;
    let empty = PDESystem::new("free", &sp).solve()?;
    let rep = verify_closed(&n0_one_form()?, &empty)?;
    let mut s = PDESystem::new("closure of dx1", &sp);
    for c in rep.checks {
        s.equations.push(Equation::zero(&c.name, c.residual));
    }
    Ok(s)
}

/// transf1 alone.
pub fn n0_transf1() -> Result<PDESystem, CatalogError> {
    let k = K::Value(0);
    let mut s = PDESystem::new("transf1", &target_space(&k, &["alpha", "beta", "epsilon"])?);
    s.equations = transf1(&k)?;
    Ok(s)
}

/// The system {transf1, transf2, transf3} in Omega, alpha, beta, epsilon.
pub fn n0_transformed(k: impl Into<K>) -> Result<PDESystem, CatalogError> {
    let k = k.into();
    let sp = target_space(&k, &["Omega", "alpha", "beta", "epsilon"])?;
    let kt = k.text();
    let mut s = PDESystem::new(&format!("n0 transformed (k={})", kt), &sp);
    s.equations = transf1(&k)?;
    s.equations.extend(equations(
        &sp,
        &[
            ("transf2", format!("Omega_x = -{}*{}*epsilon_x", kt, k.alpha_pow(1))),
            (
                "transf3",
                format!(
                    "Omega_t = -beta*Omega_x - {kt}*Omega*beta_x + {p}*(-{kt}*beta_xxx + ({kt}-2)*beta_xx*alpha_x/alpha + 3*{kt}*{q}*alpha_x)",
                    kt = kt,
                    p = k.alpha_pow(-2),
                    q = k.alpha_pow(0)
                ),
            ),
        ],
    )?);
    Ok(s)
}

/// {final1, final2} in Omega, M, beta, epsilon with A1 = (k+1)/3, A2 = (2-k)/3.
pub fn n0_final(k: i64) -> Result<PDESystem, CatalogError> {
    let (a1, a2) = K::Value(k).a1_a2().expect("numeric k");
    n0_final_with(&format!("({})", a1), &format!("({})", a2))
}

/// {final1, final2} with the given A1 and A2 (numbers or parameter names).
pub fn n0_final_with(a1: &str, a2: &str) -> Result<PDESystem, CatalogError> {
    let params: Vec<&str> = [a1, a2].into_iter().filter(|a| !a.starts_with('(')).collect();
    let sp = JetSpace::with_params(&["x", "t", "T"], &["Omega", "M", "beta", "epsilon"], &params, 7)?;
    let mut s = PDESystem::new("n0 final", &sp);
    s.equations = equations(
        &sp,
        &[
            (
                "final1a",
                format!(
                    "{a1}*M*(Omega_t + beta*Omega_x + 2*beta_x*Omega + 2*beta_xxx + 2*M_x/M^2) \
                     + {a2}*(Omega_t + beta*Omega_x - Omega*beta_x - M*beta_xxx - M_x*beta_xx - M_x) = 0",
                    a1 = a1,
                    a2 = a2
                ),
            ),
            ("final1b", format!("{a1}*(Omega_x + 2*epsilon_x/M) + {a2}*(Omega_x - epsilon_x) = 0", a1 = a1, a2 = a2)),
            ("final2a", "M_t = 3*M*beta_x - beta*M_x".to_string()),
            ("final2b", "M_T = 3*M*epsilon_x - epsilon*M_x".to_string()),
            ("final2c", "beta_T - epsilon_t + epsilon*beta_x - epsilon_x*beta = 0".to_string()),
        ],
    )?;
    Ok(s)
}

/// A system in M rewritten in alpha through M = 1/alpha^3.
pub fn in_alpha(sys: &PDESystem) -> Result<PDESystem, CatalogError> {
    let fields: Vec<&str> = sys.space.dep().iter().map(|f| if f.as_str() == "M" { "alpha" } else { f.as_str() }).collect();
    let sp = crate::jetspace::JetSpace::from_symbols(
        sys.space.indep().to_vec(),
        fields.iter().map(|f| crate::expr::Symbol::new(f)).collect(),
        sys.space.params().to_vec(),
        sys.space.order(),
    )?;
    let both = sp.add_fields(&["M"])?;
    let m = ex(&sp, "alpha^(-3)");
    let mut out = PDESystem::new(&format!("{} (M = 1/alpha^3)", sys.name), &sp);
    for eq in &sys.equations {
        out.equations.push(Equation::zero(&eq.name, substitute_field(&both, &eq.residual(), "M", &m)?));
    }
    Ok(out)
}

fn k_coefficients(p: &Poly, k: &Atom, out: &mut Vec<Poly>) {
    match p.vars().iter().find(|v| *v != k && p.contains(v)) {
        None => out.push(p.clone()),
        Some(v) => {
            for c in p.coeffs_in(v) {
                if !c.is_zero() {
                    k_coefficients(&c, k, out);
                }
            }
        }
    }
}

/// With k left symbolic, solve the mapped first n0 equation for H_x and
/// compare with alpha times the displayed H_{x1}. Returns the monic
/// squarefree polynomial in k whose roots make the two agree.
pub fn n0_k_condition() -> Result<Poly, CatalogError> {
    let t = n0_transform(K::Symbolic)?;
    let sys = n0_system(K::Symbolic)?;
    let s = t.elimination_system()?;
    let e1 = &sys.equations[0];
    let r = s.reduce(&t.map_expr(&e1.residual())?)?;
    let hx = lead("H", &[("x", 1)]);
    let rhs = s.solve_for(&e1.name, &r, &hx)?;
    let sp = t.target();
    let alpha = ex(sp, "alpha");
    let diff = rhs - alpha * n0_h_x1(K::Symbolic)?;
    let k = Atom::Param(Symbol::new("k"));
    let mut coeffs = Vec::new();
    k_coefficients(diff.num(), &k, &mut coeffs);
    let c = coeffs.iter().fold(Poly::zero(), |g, c| gcd(&g, c));
    if c.is_zero() {
        return Ok(Poly::zero());
    }
    let sq = c.div_exact(&gcd(&c, &c.partial(&k))).expect("gcd divides");
    Ok(sq.monic())
}

fn psi_space(params: &[&str]) -> Result<JetSpace, CatalogError> {
    Ok(JetSpace::with_params(&["x", "t", "T"], &["Omega", "M", "beta", "epsilon", "psi"], params, 7)?)
}

/// The transformed spectral problem in psi with phi = alpha^{(2k-1)/3} psi,
/// written with M = 1/alpha^3 and the given A1, A2.
pub fn psi_lax_with(a1: &str, a2: &str) -> Result<LaxPair, CatalogError> {
    let params: Vec<&str> = [a1, a2].into_iter().filter(|a| !a.starts_with('(')).collect();
    let sp = psi_space(&params)?;
    let eqs = vec![
        LaxEquation {
            name: "temporal".into(),
            lead: lead("psi", &[("T", 1)]),
            residual: ex(
                &sp,
                &format!(
                    "psi_T - {a1}*(M*psi_xxx + (M*Omega - epsilon)*psi_x) \
                     - {a2}*(M*psi_xxx + 2*M_x*psi_xx + (M_xx + Omega - epsilon)*psi_x)",
                    a1 = a1,
                    a2 = a2
                ),
            ),
        },
        LaxEquation {
            name: "spatial".into(),
            lead: lead("psi", &[("x", 1), ("t", 1)]),
            residual: ex(
                &sp,
                &format!(
                    "psi_xt - {a1}*(-beta*psi_xx + (beta_xx - 1/M)*psi) \
                     - {a2}*(-beta*psi_xx - 2*beta_x*psi_x - (1 + beta_xx)*psi)",
                    a1 = a1,
                    a2 = a2
                ),
            ),
        },
    ];
    Ok(LaxPair::new("psi pair", &sp, LaxKind::Scalar, &["psi"], eqs)?)
}

pub fn psi_lax(k: i64) -> Result<LaxPair, CatalogError> {
    let (a1, a2) = K::Value(k).a1_a2().expect("numeric k");
    psi_lax_with(&format!("({})", a1), &format!("({})", a2))
}

/// A pair in M rewritten in alpha through M = 1/alpha^3.
pub fn lax_in_alpha(lp: &LaxPair) -> Result<LaxPair, CatalogError> {
    let both = lp.space.add_fields(&["alpha"])?;
    let m = ex(&both, "alpha^(-3)");
    let fields: Vec<Symbol> = lp.space.dep().iter().map(|f| if f.as_str() == "M" { Symbol::new("alpha") } else { f.clone() }).collect();
    let sp = JetSpace::from_symbols(lp.space.indep().to_vec(), fields, lp.space.params().to_vec(), lp.space.order())?;
    let mut eqs = Vec::new();
    for eq in &lp.equations {
        let residual = substitute_field(&both, &eq.residual, "M", &m)?;
        eqs.push(LaxEquation { name: eq.name.clone(), lead: eq.lead.clone(), residual });
    }
    let names: Vec<&str> = lp.eigen.iter().map(|e| e.as_str()).collect();
    Ok(LaxPair::new(&lp.name, &sp, lp.kind, &names, eqs)?)
}

/// The gauge alpha^{(2k-1)/3}; (2k-1)/3 is an integer for k = 2 and k = -1.
pub fn n0_gauge(k: i64) -> Result<GaugeFactor, CatalogError> {
    if (2 * k - 1) % 3 != 0 {
        return Err(CatalogError::Unknown(format!("gauge exponent (2k-1)/3 is not an integer for k = {}", k)));
    }
    let sp = target_space(&K::Value(k), &["alpha"])?;
    Ok(GaugeFactor::new(ex(&sp, &format!("alpha^({})", (2 * k - 1) / 3)))?)
}

/// The n0 pair carried through the n0 transform with the n0 gauge.
pub fn n0_lax_transformed(k: i64) -> Result<LaxPair, CatalogError> {
    let t = n0_transform(k)?;
    Ok(transform_lax(&t, &n0_lax(k)?, &n0_gauge(k)?, &["psi"], Some(&n0_system(k)?))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lax::verify_yields;
    use crate::system::systems_equivalent;
    use crate::expr::Expression;

    #[test]
    fn transform_gives_transf_system() {
        for k in [2, -1] {
            let out = n0_transform(k).unwrap().apply(&n0_system(k).unwrap()).unwrap();
            let rep = systems_equivalent(&out, &n0_transformed(k).unwrap()).unwrap();
            assert!(rep.holds(), "k={} {:#?} {:#?}", k, rep, out.notes);
        }
    }

    #[test]
    fn final_forms() {
        for k in [2, -1] {
            let f = in_alpha(&n0_final(k).unwrap()).unwrap();
            let rep = systems_equivalent(&f, &n0_transformed(k).unwrap()).unwrap();
            assert!(rep.holds(), "k={} {:#?}", k, rep);
        }
    }

    #[test]
    fn k_condition() {
        let c = n0_k_condition().unwrap();
        let sp = JetSpace::with_params(&["x"], &["u"], &["k"], 1).unwrap();
        assert_eq!(Expression::from_poly(c), ex(&sp, "k^2 - k - 2"));
    }

    #[test]
    fn equivalence_is_not_vacuous() {
        let f = in_alpha(&n0_final(2).unwrap()).unwrap();
        assert!(!systems_equivalent(&f, &n0_transformed(-1).unwrap()).unwrap().holds());
    }

    #[test]
    fn closure_is_transf1() {
        let c = n0_closure().unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.equations.iter().all(|e| !e.residual().is_zero()));
        let rep = systems_equivalent(&c, &n0_transf1().unwrap()).unwrap();
        assert!(rep.holds(), "{:#?}", rep);
        let solved = n0_transf1().unwrap().solve().unwrap();
        assert!(verify_closed(&n0_one_form().unwrap(), &solved).unwrap().holds());
    }

    #[test]
    fn psi_pair_from_transform() {
        for k in [2, -1] {
            let got = n0_lax_transformed(k).unwrap();
            let shown = lax_in_alpha(&psi_lax(k).unwrap()).unwrap();
            let ctx = n0_transformed(k).unwrap();
            let a = crate::lax::pair_implied_by(&shown, &got, Some(&ctx)).unwrap();
            assert!(a.holds(), "k={} {:#?}", k, a);
            let b = crate::lax::pair_implied_by(&got, &shown, Some(&ctx)).unwrap();
            assert!(b.holds(), "k={} {:#?}", k, b);
            assert_eq!(got.equations.len(), 2);
        }
        let wrong = lax_in_alpha(&psi_lax(-1).unwrap()).unwrap();
        let got = n0_lax_transformed(2).unwrap();
        let ctx = n0_transformed(2).unwrap();
        assert!(!crate::lax::pair_implied_by(&wrong, &got, Some(&ctx)).unwrap().holds());
    }

    #[test]
    fn transformed_pair_yields_transformed_system() {
        for k in [2, -1] {
            let rep = verify_yields(&n0_lax_transformed(k).unwrap(), &n0_transformed(k).unwrap()).unwrap();
            assert!(rep.holds(), "k={} {:#?}", k, rep);
        }
    }

    #[test]
    fn integrable_values() {
        assert!(K::int(2).is_integrable());
        assert!(K::int(-1).is_integrable());
        assert!(!K::int(0).is_integrable());
    }

    #[test]
    fn lax_yields_n0() {
        for k in [2, -1] {
            let rep = verify_yields(&n0_lax(k).unwrap(), &n0_system(k).unwrap()).unwrap();
            assert!(rep.holds(), "k={} {:?}", k, rep);
        }
        assert!(!verify_yields(&n0_lax(0).unwrap(), &n0_system(0).unwrap()).unwrap().holds());
    }
}
