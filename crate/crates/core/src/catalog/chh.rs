use super::{check_level, ex, jet, lead, strs, zvars, CatalogError};
use crate::expr::{Expression, Q};
use crate::lax::{LaxEquation, LaxKind, LaxPair};
use crate::jetspace::JetSpace;
use crate::recip::{potentialize, ReciprocalTransform, TransformBuilder};
use crate::system::{ConservedPair, Equation, OneForm, PDESystem};

fn space(n: usize) -> Result<JetSpace, CatalogError> {
    let mut dep = vec!["P".to_string(), "Delta".to_string()];
    dep.extend((1..=n).map(|i| format!("Omega{}", i)));
    Ok(JetSpace::declare(&["X", "Y", "T"], &strs(&dep), 6)?)
}

/// The CHH(2+1) hierarchy at level n in the fields P, Delta, Omega_i.
pub fn chh(n: usize) -> Result<PDESystem, CatalogError> {
    check_level(n)?;
    let sp = space(n)?;
    let mut s = PDESystem::new(&format!("chh({})", n), &sp);
    s.push_text("P_Y", "P_Y = -1/2*(P_X*Omega1 + P*Omega1_X)")?;
    for i in 1..n {
        s.push_text(
            &format!("Omega{}", i),
            &format!("Omega{i}_XXX - Omega{i}_X = -P*(P_X*Omega{j} + P*Omega{j}_X)", i = i, j = i + 1),
        )?;
    }
    s.push_text(&format!("Omega{}", n), &format!("2*P*Delta_X = Omega{n}_XXX - Omega{n}_X", n = n))?;
    s.push_aux_text("P_T", "P_T = Delta_X")?;
    s.push_aux_text("Delta_Y", "Delta_Y = -1/2*(P_T*Omega1 + P*Omega1_T)")?;
    Ok(s)
}

/// P on Y against -P Omega_1 / 2 on X.
pub fn chh_pair(n: usize) -> Result<ConservedPair, CatalogError> {
    let sp = space(n)?;
    Ok(ConservedPair::new(ex(&sp, "P"), "Y", ex(&sp, "-1/2*P*Omega1"), "X")?)
}

/// dz0 = P dX - P Omega_1/2 dY + Delta dT.
pub fn chh_one_form(n: usize) -> Result<OneForm, CatalogError> {
    let sp = space(n)?;
    Ok(OneForm::new("z0", vec![("X", ex(&sp, "P")), ("Y", ex(&sp, "-1/2*P*Omega1")), ("T", ex(&sp, "Delta"))])?)
}

/// X becomes a field of z0 (from X), z1 (from Y), z_{n+1} (from T) and the
/// auxiliary z_2..z_n with X_{z_i} = Omega_i/2.
pub fn chh_transform(n: usize) -> Result<ReciprocalTransform, CatalogError> {
    check_level(n)?;
    let sp = space(n)?;
    let mut b = TransformBuilder::from_pair(&sp, &chh_pair(n)?, "X")
        .extra("T", ex(&sp, "Delta"))
        .target_pivot("z0")
        .rename("Y", "z1")
        .rename("T", &format!("z{}", n + 1))
        .new_field("X");
    for i in 2..=n {
        b = b.aux_var(&format!("z{}", i), ex(&sp, &format!("Omega{}/2", i)));
    }
    Ok(b.build()?)
}

fn target_space(n: usize, fields: &[&str]) -> Result<JetSpace, CatalogError> {
    Ok(JetSpace::declare(&strs(&zvars(n)), fields, 7)?)
}

fn z(i: usize) -> String {
    format!("z{}", i)
}

/// The conserved pair of the i-th three-variable equation:
/// D_{z0}(-X_{z_{i+1}}/X_{z0}) = D_{z_i}(W_{z0} - W^2/2), W = X_{z0z0}/X_{z0} + X_{z0}.
fn pair_i(sp: &JetSpace, i: usize) -> Result<ConservedPair, CatalogError> {
    let x0 = jet("X", &[("z0", 1)]);
    let w = jet("X", &[("z0", 2)]) / &x0 + &x0;
    let g = sp.d(&w, "z0")? - (&w * &w) / 2;
    let a = (jet("X", &[(&z(i + 1), 1)]) / &x0).neg();
    Ok(ConservedPair::new(a, "z0", g, &z(i))?)
}

/// The n three-variable equations in X(z0, ..., z_{n+1}).
pub fn chh_transformed(n: usize) -> Result<PDESystem, CatalogError> {
    check_level(n)?;
    let sp = target_space(n, &["X"])?;
    let mut s = PDESystem::new(&format!("chh({}) in z", n), &sp);
    for i in 1..=n {
        let p = pair_i(&sp, i)?;
        s.equations.push(Equation::new(
            &format!("X{}", i),
            sp.d(&p.a, "z0")?,
            sp.d(&p.a_prime, &z(i))?,
        ));
    }
    Ok(s)
}

pub fn chh_potential_pairs(n: usize) -> Result<Vec<ConservedPair>, CatalogError> {
    check_level(n)?;
    let sp = target_space(n, &["X"])?;
    (1..=n).map(|i| pair_i(&sp, i)).collect()
}

/// The potential M with M_{z_i} = -X_{z_{i+1}}/(4 X_{z0}) and M_{z0} = (W_{z0} - W^2/2)/4.
pub fn chh_potential(sys: &PDESystem, n: usize) -> Result<PDESystem, CatalogError> {
    Ok(potentialize(sys, &chh_potential_pairs(n)?, "M", &Q::new(1.into(), 4.into()))?)
}

fn cbs_expr(i: usize) -> Expression {
    let m = |d: &[(&str, u32)]| jet("M", d);
    let (zi, zj) = (z(i), z(i + 1));
    m(&[("z0", 1), (&zj, 1)])
        + m(&[("z0", 3), (&zi, 1)])
        + m(&[(&zi, 1)]) * m(&[("z0", 2)]) * 4
        + m(&[("z0", 1)]) * m(&[("z0", 1), (&zi, 1)]) * 8
}

/// The i-th CBS copy over (z0, z_i, z_{i+1}) inside the level-n space.
pub fn cbs(i: usize, n: usize) -> Result<PDESystem, CatalogError> {
    check_level(n)?;
    if i == 0 || i > n {
        return Err(CatalogError::Copy { i, n });
    }
    let sp = target_space(n, &["M"])?;
    let mut s = PDESystem::new(&format!("cbs({},{})", i, n), &sp);
    s.equations.push(Equation::zero(&format!("cbs{}", i), cbs_expr(i)));
    Ok(s)
}

pub(crate) fn cbs_residual(i: usize) -> Expression {
    cbs_expr(i)
}

pub(crate) fn spectral_sum(n: usize, field: &str, suffix: &str) -> String {
    let terms: Vec<String> = (1..=n).map(|i| format!("lambda^{}*{}{}{}", n - i, field, i, suffix)).collect();
    format!("({})", terms.join(" + "))
}

/// Phi_XX + (lambda P^2 - 1) Phi / 4 = 0 and
/// Phi_T - lambda^n Phi_Y - lambda C Phi_X / 2 + lambda C_X Phi / 4 = 0, C = sum lambda^{n-i} Omega_i,
/// with lambda_X = 0 and lambda_T = lambda^n lambda_Y.
pub fn chh_lax(n: usize) -> Result<LaxPair, CatalogError> {
    chh_lax_with(n, false)
}

/// As [`chh_lax`]; `broken` replaces the second constraint by lambda_T = 0.
pub fn chh_lax_with(n: usize, broken: bool) -> Result<LaxPair, CatalogError> {
    check_level(n)?;
    let sp = space(n)?.add_fields(&["Phi", "lambda"])?;
    let c = spectral_sum(n, "Omega", "");
    let cx = spectral_sum(n, "Omega", "_X");
    let eqs = vec![
        LaxEquation {
            name: "spatial".into(),
            lead: lead("Phi", &[("X", 2)]),
            residual: ex(&sp, "Phi_XX + 1/4*(lambda*P^2 - 1)*Phi"),
        },
        LaxEquation {
            name: "temporal".into(),
            lead: lead("Phi", &[("T", 1)]),
            residual: ex(
                &sp,
                &format!("Phi_T - lambda^{n}*Phi_Y - lambda/2*{c}*Phi_X + lambda/4*{cx}*Phi", n = n, c = c, cx = cx),
            ),
        },
    ];
    let t = if broken { "lambda_T = 0".to_string() } else { format!("lambda_T = lambda^{}*lambda_Y", n) };
    Ok(LaxPair::new(&format!("chh_lax({})", n), &sp, LaxKind::Scalar, &["Phi"], eqs)?
        .with_constraint("lambda_X", "lambda_X = 0")?
        .with_constraint("lambda_T", &t)?)
}
