use super::{check_level, ex, jet, strs, substitute_field, zvars, CatalogError};
use crate::expr::{Expression, Q};
use crate::jetspace::JetSpace;
use crate::lax::{LaxPair, MatrixForm};
use super::chh::spectral_sum;
use crate::recip::{potentialize, ReciprocalTransform, TransformBuilder};
use crate::system::{solve_leading, Check, ConservedPair, Equation, OneForm, PDESystem, Ranking, Report, SolvedSystem};

fn space(n: usize) -> Result<JetSpace, CatalogError> {
    let mut dep = vec!["u".to_string(), "delta".to_string()];
    dep.extend((1..=n).map(|i| format!("v{}", i)));
    dep.extend((1..=n).map(|i| format!("omega{}", i)));
    Ok(JetSpace::declare(&["x", "y", "t"], &strs(&dep), 6)?)
}

/// The mCHH(2+1) hierarchy at level n with the couplings (omega_i)_x = u (v_i)_x.
pub fn mchh(n: usize) -> Result<PDESystem, CatalogError> {
    check_level(n)?;
    let sp = space(n)?;
    let mut s = PDESystem::new(&format!("mchh({})", n), &sp);
    s.push_text("u_y", "u_y = -(u_x*omega1 + u*omega1_x)")?;
    for i in 1..=n {
        s.push_text(&format!("omega{}", i), &format!("omega{i}_x = u*v{i}_x", i = i))?;
    }
    for i in 1..n {
        s.push_text(
            &format!("v{}", i),
            &format!("v{i}_xxx - v{i}_x = -(u_x*omega{j} + u*omega{j}_x)", i = i, j = i + 1),
        )?;
    }
    s.push_text(&format!("v{}", n), &format!("u_t = v{n}_xxx - v{n}_x", n = n))?;
    s.push_aux_text("u_t", "u_t = delta_x")?;
    s.push_aux_text("delta_y", "delta_y = -(u_t*omega1 + u*omega1_t)")?;
    Ok(s)
}

pub fn mchh_pair(n: usize) -> Result<ConservedPair, CatalogError> {
    let sp = space(n)?;
    Ok(ConservedPair::new(ex(&sp, "u"), "y", ex(&sp, "-u*omega1"), "x")?)
}

/// dz0 = u dx - u omega_1 dy + delta dt.
pub fn mchh_one_form(n: usize) -> Result<OneForm, CatalogError> {
    let sp = space(n)?;
    Ok(OneForm::new("z0", vec![("x", ex(&sp, "u")), ("y", ex(&sp, "-u*omega1")), ("t", ex(&sp, "delta"))])?)
}

pub fn mchh_transform(n: usize) -> Result<ReciprocalTransform, CatalogError> {
    check_level(n)?;
    let sp = space(n)?;
    let mut b = TransformBuilder::from_pair(&sp, &mchh_pair(n)?, "x")
        .extra("t", ex(&sp, "delta"))
        .target_pivot("z0")
        .rename("y", "z1")
        .rename("t", &format!("z{}", n + 1))
        .new_field("x");
    for i in 2..=n {
        b = b.aux_var(&format!("z{}", i), ex(&sp, &format!("omega{}", i)));
    }
    for i in 1..=n {
        b = b.relation(Equation::new(
            &format!("omega{}", i),
            ex(&sp, &format!("omega{}_x", i)),
            ex(&sp, &format!("u*v{}_x", i)),
        ));
    }
    Ok(b.build()?)
}

fn z(i: usize) -> String {
    format!("z{}", i)
}

fn target_space(n: usize, fields: &[&str]) -> Result<JetSpace, CatalogError> {
    Ok(JetSpace::declare(&strs(&zvars(n)), fields, 7)?)
}

/// D_{z0}(x_{z_{i+1}}/x_{z0} + x_{z_i z0 z0}/x_{z0}) = D_{z_i}(x_{z0}^2/2).
fn pair_i(i: usize) -> Result<ConservedPair, CatalogError> {
    let x0 = jet("x", &[("z0", 1)]);
    let a = (jet("x", &[(&z(i + 1), 1)]) + jet("x", &[("z0", 2), (&z(i), 1)])) / &x0;
    Ok(ConservedPair::new(a, "z0", &x0 * &x0 / 2, &z(i))?)
}

/// The n mCBS equations in x(z0, ..., z_{n+1}).
pub fn mchh_transformed(n: usize) -> Result<PDESystem, CatalogError> {
    check_level(n)?;
    let sp = target_space(n, &["x"])?;
    let mut s = PDESystem::new(&format!("mchh({}) in z", n), &sp);
    for i in 1..=n {
        let p = pair_i(i)?;
        s.equations.push(Equation::new(&format!("x{}", i), sp.d(&p.a, "z0")?, sp.d(&p.a_prime, &z(i))?));
    }
    Ok(s)
}

pub fn mchh_potential_pairs(n: usize) -> Result<Vec<ConservedPair>, CatalogError> {
    check_level(n)?;
    (1..=n).map(pair_i).collect()
}

/// The potential m with m_{z0} = x_{z0}^2/2 and m_{z_i} = x_{z_{i+1}}/x_{z0} + x_{z_i z0 z0}/x_{z0}.
pub fn mchh_potential(sys: &PDESystem, n: usize) -> Result<PDESystem, CatalogError> {
    Ok(potentialize(sys, &mchh_potential_pairs(n)?, "m", &Q::from_integer(1.into()))?)
}

/// The i-th mCBS copy: the equation in x with the defining relations of m.
pub fn mcbs(i: usize, n: usize) -> Result<PDESystem, CatalogError> {
    check_level(n)?;
    if i == 0 || i > n {
        return Err(CatalogError::Copy { i, n });
    }
    let sp = target_space(n, &["x", "m"])?;
    let p = pair_i(i)?;
    let mut s = PDESystem::new(&format!("mcbs({},{})", i, n), &sp);
    s.eliminate = vec!["m".into()];
    s.equations.push(Equation::new(&format!("x{}", i), sp.d(&p.a, "z0")?, sp.d(&p.a_prime, &z(i))?));
    s.equations.push(Equation::new("m_z0", jet("m", &[("z0", 1)]), p.a_prime.clone()));
    s.equations.push(Equation::new(&format!("m_{}", z(i)), jet("m", &[(&z(i), 1)]), p.a.clone()));
    Ok(s)
}

/// The Miura map 4M = x_{z0} - m carries every mCBS copy to the CBS copy.
pub fn verify_miura(n: usize) -> Result<Report, CatalogError> {
    verify_miura_with(n, -1)
}

/// As [`verify_miura`] with 4M = x_{z0} + sign*m.
pub fn verify_miura_with(n: usize, sign: i64) -> Result<Report, CatalogError> {
    let (solved, exprs) = miura_residuals(n, sign)?;
    let mut rep = Report::new(&format!("miura({})", n));
    for (name, e) in exprs {
        let (r, k) = solved.reduce_counted(&e)?;
        rep.push(Check::new(&name, r, k));
    }
    Ok(rep)
}

/// The solved mCBS system and the substituted CBS copies, unreduced.
pub fn miura_residuals(n: usize, sign: i64) -> Result<(SolvedSystem, Vec<(String, Expression)>), CatalogError> {
    check_level(n)?;
    let sp = target_space(n, &["x", "m", "M"])?;
    let mut sys = PDESystem::new(&format!("mcbs({})", n), &sp);
    for i in 1..=n {
        let c = mcbs(i, n)?;
        for eq in c.equations {
            if !sys.equations.iter().any(|e| e.lhs == eq.lhs) {
                sys.equations.push(eq);
            }
        }
    }
    let rk = Ranking::for_space(&sp).eliminating(&["m".into()]);
    let solved = solve_leading(&sys, &rk)?;
    let big_m: Expression = (jet("x", &[("z0", 1)]) + jet("m", &[]) * sign) / 4;
    let mut out = Vec::new();
    for i in 1..=n {
        out.push((format!("cbs{}", i), substitute_field(&sp, &super::chh::cbs_residual(i), "M", &big_m)?));
    }
    Ok((solved, out))
}

/// The 2x2 pair for (phi, phihat): Psi_x = U Psi and
/// Psi_t = lambda^n Psi_y + lambda a Psi_x + I sqrt(lambda)/2 B Psi, written with
/// Psi_x eliminated, so V = lambda a U + I sqrt(lambda)/2 B.
pub fn mchh_lax(n: usize) -> Result<LaxPair, CatalogError> {
    mchh_lax_with(n, false)
}

/// As [`mchh_lax`]; `broken` replaces the second constraint by lambda_t = 0.
pub fn mchh_lax_with(n: usize, broken: bool) -> Result<LaxPair, CatalogError> {
    check_level(n)?;
    let sp = space(n)?.add_fields(&["phi", "phihat", "lambda"])?;
    let a = spectral_sum(n, "omega", "");
    let bx = spectral_sum(n, "v", "_x");
    let bxx = spectral_sum(n, "v", "_xx");
    let e = |s: &str| ex(&sp, s);
    let u = [[e("-1/2"), e("I*sqrt(lambda)*u/2")], [e("I*sqrt(lambda)*u/2"), e("1/2")]];
    let la = e(&format!("lambda*{}", a));
    let half = e("I*sqrt(lambda)/2");
    let off = [&half * e(&format!("{} - {}", bxx, bx)), &half * e(&format!("{} + {}", bxx, bx))];
    let v = [
        [&la * &u[0][0], &la * &u[0][1] + &off[0]],
        [&la * &u[1][0] + &off[1], &la * &u[1][1]],
    ];
    let form = MatrixForm {
        x: "x".into(),
        t: "t".into(),
        u,
        v,
        transport: vec![("y".into(), e(&format!("lambda^{}", n)))],
    };
    let t = if broken { "lambda_t = 0".to_string() } else { format!("lambda_t = lambda^{}*lambda_y", n) };
    Ok(LaxPair::matrix2(&format!("mchh_lax({})", n), &sp, ["phi", "phihat"], form)?
        .with_constraint("lambda_x", "lambda_x = 0")?
        .with_constraint("lambda_t", &t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{systems_equivalent, verify_closed, verify_conserved};

    #[test]
    fn lax_yields_mchh() {
        let lp = mchh_lax(1).unwrap();
        let rep = crate::lax::verify_yields(&lp, &mchh(1).unwrap()).unwrap();
        assert!(rep.holds(), "{:?}", rep);
        let zc = lp.zero_curvature(Some(&mchh(1).unwrap())).unwrap();
        assert!(zc.iter().flatten().all(|e| e.is_zero()), "{:?}", zc);
        let broken = mchh_lax_with(1, true).unwrap();
        assert!(!crate::lax::verify_yields(&broken, &mchh(1).unwrap()).unwrap().holds());
        let rep = crate::lax::verify_yields(&mchh_lax(2).unwrap(), &mchh(2).unwrap()).unwrap();
        assert!(rep.holds(), "{:?}", rep);
    }

    #[test]
    fn counts() {
        for n in 1..=4 {
            assert_eq!(mchh(n).unwrap().len(), 2 * n + 1);
        }
        assert!(mchh(0).is_err());
    }

    #[test]
    fn conserved_and_closed() {
        let s = mchh(1).unwrap();
        let solved = s.solve().unwrap();
        assert!(verify_conserved(&mchh_pair(1).unwrap(), &solved).unwrap().holds());
        assert!(verify_closed(&mchh_one_form(1).unwrap(), &solved).unwrap().holds());
    }

    #[test]
    fn transform_gives_mcbs() {
        for n in 1..=2 {
            let out = mchh_transform(n).unwrap().apply(&mchh(n).unwrap()).unwrap();
            assert_eq!(out.equations.len(), n, "{:?}", out.equations);
            assert!(systems_equivalent(&out, &mchh_transformed(n).unwrap()).unwrap().holds());
        }
    }

    #[test]
    fn round_trip() {
        let t = mchh_transform(1).unwrap();
        let sys = mchh(1).unwrap();
        let back = t.invert().unwrap().apply(&t.apply(&sys).unwrap()).unwrap();
        let rep = systems_equivalent(&back, &sys).unwrap();
        assert!(rep.holds(), "{:?}", rep);
    }

    #[test]
    fn miura() {
        assert!(verify_miura(1).unwrap().holds());
        assert!(!verify_miura_with(1, 1).unwrap().holds());
    }
}
