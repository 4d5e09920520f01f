mod common;

use common::{kernel_space, tree, MPoly};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use recipro::catalog::n0::{in_alpha, n0_closure, n0_final, n0_lax_transformed, n0_transf1, n0_transform, n0_transformed};
use recipro::catalog::reductions::{
    dp_lax_from_reduction, dp_reduction, dp_system, reduce_psi_lax, reduced_system, vakhnenko_lax_from_reduction,
    vakhnenko_reduction, vakhnenko_system,
};
use recipro::catalog::*;
use recipro::expr::parse::parse_expression;
use recipro::expr::{Assignment, Atom, Expression, Q};
use recipro::jetspace::JetSpace;
use recipro::lax::{eigen_coefficients, verify_yields};
use recipro::numeric::sample_zero;
use recipro::recip::ReciprocalTransform;
use recipro::system::{search_conserved, solve_leading, verify_closed, verify_conserved, Equation, OneForm, PDESystem, Ranking};
use std::collections::HashMap;

fn point_values(e: &Expression, u: &MPoly, v: &MPoly, x: f64, t: f64) -> Assignment {
    let mut a = Assignment::new();
    for atom in e.atoms() {
        let val = match &atom {
            Atom::Indep(s) if s.as_str() == "x" => x,
            Atom::Indep(_) => t,
            Atom::Param(_) => 1.3,
            Atom::Jet(j) => {
                let mut p = if j.field.as_str() == "u" { u.clone() } else { v.clone() };
                for (s, k) in j.derivs() {
                    for _ in 0..*k {
                        p = p.deriv(if s.as_str() == "x" { 0 } else { 1 });
                    }
                }
                p.eval(&[x, t])
            }
            other => panic!("unexpected atom {:?}", other),
        };
        a.set(atom, val);
    }
    a
}

fn two_field_system() -> (JetSpace, recipro::system::SolvedSystem) {
    let sp = kernel_space();
    let mut sys = PDESystem::new("pair", &sp);
    sys.push_text("u_t", "u_t = v_x").unwrap();
    sys.push_text("v_t", "v_t = u*u_x + k*v").unwrap();
    let s = solve_leading(&sys, &Ranking::for_space(&sp)).unwrap();
    (sp, s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn is_zero_agrees_with_sampling(a in tree(), b in tree(), seed in any::<u64>()) {
        let sp = kernel_space();
        let e = a.normalize().unwrap().sub(&b.normalize().unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut biggest: f64 = 0.0;
        for _ in 0..50 {
            let mut asg = Assignment::new();
            for atom in e.atoms() {
                asg.set(atom, rand::Rng::gen_range(&mut rng, 1.0..2.0));
            }
            biggest = biggest.max(asg.eval_complex(&e).unwrap().norm());
        }
        prop_assert_eq!(e.is_zero(), biggest < 1e-9);
        let _ = sp;
    }

    #[test]
    fn derivative_is_linear(a in tree(), b in tree(), p in -5i64..5, q in 1i64..4) {
        let sp = kernel_space();
        let (ea, eb) = (a.normalize().unwrap(), b.normalize().unwrap());
        let (al, be) = (Q::new(p.into(), q.into()), Q::new(q.into(), 7.into()));
        for x in ["x", "t"] {
            let lhs = sp.d(&ea.scale(&al).add(&eb.scale(&be)), x).unwrap();
            let rhs = sp.d(&ea, x).unwrap().scale(&al).add(&sp.d(&eb, x).unwrap().scale(&be));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn derivative_matches_finite_differences(a in tree(), seed in any::<u64>()) {
        let sp = kernel_space();
        let e = a.normalize().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (u, v) = (MPoly::random(&mut rng, 2, None), MPoly::random(&mut rng, 2, None));
        let (x, t) = (0.2, 0.15);
        let h = 1e-5;
        for (var, dx, dt) in [("x", h, 0.0), ("t", 0.0, h)] {
            let de = sp.d(&e, var).unwrap();
            let exact = point_values(&de, &u, &v, x, t).eval_real(&de).unwrap();
            let f = |x: f64, t: f64| point_values(&e, &u, &v, x, t).eval_real(&e).unwrap();
            let fd = (f(x + dx, t + dt) - f(x - dx, t - dt)) / (2.0 * h);
            prop_assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0), "{} vs {} for D_{} {}", fd, exact, var, e);
        }
    }

    #[test]
    fn reduce_is_idempotent_and_sound(a in tree(), b in tree()) {
        let (sp, s) = two_field_system();
        let e = sp.d(&a.normalize().unwrap(), "t").unwrap().add(&b.normalize().unwrap());
        let r = s.reduce(&e).unwrap();
        prop_assert_eq!(s.reduce(&r).unwrap(), r.clone());
        prop_assert!(sample_zero(&e.sub(&r), &s, 5, 11, 1e-9).unwrap().holds());
    }

    #[test]
    fn closedness_checks_every_pair(n in 2usize..=6) {
        let vars: Vec<String> = (0..n).map(|i| format!("z{}", i)).collect();
        let names: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
        let sp = JetSpace::declare(&names, &["u"], 3).unwrap();
        let coeffs: Vec<(&str, Expression)> = names.iter().map(|z| (*z, parse_expression(&format!("u_{}", z), &sp).unwrap())).collect();
        let form = OneForm::new("w", coeffs).unwrap();
        let s = PDESystem::new("empty", &sp).solve().unwrap();
        prop_assert_eq!(verify_closed(&form, &s).unwrap().checks.len(), n * (n - 1) / 2);
    }
}

#[test]
fn algebraic_extensions_normalize() {
    let sp = JetSpace::with_params(&["x"], &["u"], &["lambda"], 2).unwrap();
    assert!(parse_expression("sqrt(lambda)^2 - lambda", &sp).unwrap().is_zero());
    assert!(parse_expression("I^2 + 1", &sp).unwrap().is_zero());
}

#[test]
fn searched_pairs_are_conserved() {
    let sp = JetSpace::declare(&["x", "t"], &["u"], 4).unwrap();
    let mut sys = PDESystem::new("kdv", &sp);
    sys.push_text("kdv", "u_t = u_xxx + 6*u*u_x").unwrap();
    let s = sys.solve().unwrap();
    let found = search_conserved(&s, "t", "x", 2, 2).unwrap();
    assert!(!found.is_empty());
    for p in &found.pairs {
        assert!(verify_conserved(p, &s).unwrap().holds(), "{:?}", p);
    }
}

/// The source system rewritten on the target side, with jets of the new
/// field replaced by derivatives of the gradient.
fn target_side(t: &ReciprocalTransform, sys: &PDESystem) -> PDESystem {
    let tg = t.target();
    let mut out = PDESystem::new("target side", tg);
    for eq in sys.equations.iter().chain(&sys.aux) {
        let e = t.map_expr(&eq.residual()).unwrap();
        let mut map = HashMap::new();
        for a in e.atoms() {
            if let Atom::Jet(j) = &a {
                if j.field == *t.new_field() && j.order() > 0 {
                    let z = j.derivs()[0].0.clone();
                    let g = t.map_expr(t.gradient_of(z.as_str()).unwrap()).unwrap();
                    map.insert(a.clone(), tg.derivative_along(&g, j.lower(&z).unwrap().derivs()).unwrap());
                }
            }
        }
        out.equations.push(Equation::zero(&eq.name, Expression::from_poly(e.substitute(&map).unwrap().num().clone())));
    }
    out
}

#[test]
fn closedness_transfers_to_the_inverse() {
    let mut wrong = chh(1).unwrap();
    wrong.equations[0] = recipro::system::parse_equation("P_Y", "P_Y = -1/2*P_X*Omega1", &wrong.space).unwrap();
    let cases = [(chh_transform(1).unwrap(), chh(1).unwrap()), (mchh_transform(1).unwrap(), mchh(1).unwrap()), (chh_transform(1).unwrap(), wrong)];
    let mut verdicts = Vec::new();
    for (t, sys) in &cases {
        let source = verify_closed(&t.one_form().unwrap(), &sys.solve().unwrap()).unwrap().holds();
        let inverse = t.invert().unwrap().one_form().unwrap();
        let target = verify_closed(&inverse, &target_side(t, sys).solve().unwrap()).unwrap().holds();
        assert_eq!(source, target);
        verdicts.push(source);
    }
    assert_eq!(verdicts, [true, true, false]);
}

#[test]
fn gauge_covariance() {
    for k in [2i64, -1, 5] {
        let before = verify_yields(&n0_lax(k).unwrap(), &n0_system(k).unwrap()).unwrap().holds();
        let image = n0_transform(k).unwrap().apply(&n0_system(k).unwrap()).unwrap();
        let after = verify_yields(&n0_lax_transformed(k).unwrap(), &image).unwrap().holds();
        assert_eq!(before, after, "k = {}", k);
        assert_eq!(before, k != 5);
    }
}

#[test]
fn transformed_and_reduced_pairs_stay_linear() {
    let mut pairs = vec![n0_lax_transformed(2).unwrap(), n0_lax_transformed(-1).unwrap(), dp_lax_from_reduction().unwrap(), vakhnenko_lax_from_reduction().unwrap()];
    for (a1, a2) in [("1", "0"), ("0", "1")] {
        pairs.push(reduce_psi_lax(a1, a2, "a0").unwrap());
    }
    for lp in &pairs {
        for eq in &lp.equations {
            let c = eigen_coefficients(&eq.residual, &lp.eigen).unwrap();
            assert!(!c.is_empty(), "{} {}", lp.name, eq.name);
        }
    }
}

#[test]
fn spectral_constraints_are_compatible() {
    for n in 1..=4 {
        for lp in [chh_lax(n).unwrap(), mchh_lax(n).unwrap()] {
            let s = lp.constraints.solve().unwrap();
            assert!(s.critical_pairs(None).unwrap().is_empty(), "{}", lp.name);
        }
    }
}

#[test]
fn catalog_systems_solve() {
    let mut all = Vec::new();
    for n in 1..=4 {
        all.push(chh(n).unwrap());
        all.push(mchh(n).unwrap());
        all.push(chh_transformed(n).unwrap());
        all.push(mchh_transformed(n).unwrap());
        for i in 1..=n {
            all.push(cbs(i, n).unwrap());
            all.push(mcbs(i, n).unwrap());
        }
    }
    for k in [2, -1, 0, 5] {
        all.push(n0_system(k).unwrap());
    }
    for k in [2, -1] {
        all.push(n0_transformed(k).unwrap());
        all.push(in_alpha(&n0_final(k).unwrap()).unwrap());
    }
    all.extend([n0_closure().unwrap(), n0_transf1().unwrap(), dp_system("(-1)", "0").unwrap(), dp_system("a0", "q0").unwrap()]);
    all.extend([vakhnenko_system().unwrap(), dp_reduction().unwrap(), vakhnenko_reduction().unwrap()]);
    for (a1, a2) in [("1", "0"), ("0", "1"), ("A1", "A2")] {
        all.push(reduced_system(a1, a2, "a0").unwrap());
    }
    for s in &all {
        assert!(s.solve().is_ok(), "{}", s.name);
    }
}

#[test]
fn hierarchy_sizes_and_integrable_parameters() {
    for n in 1..=4 {
        assert_eq!(chh(n).unwrap().len(), n + 1);
        assert_eq!(mchh(n).unwrap().len(), 2 * n + 1);
    }
    for k in [2, -1] {
        let (a1, a2) = K::int(k).a1_a2().unwrap();
        assert_eq!(&a1 * &a2, Q::from_integer(0.into()));
        assert_eq!(&a1 + &a2, Q::from_integer(1.into()));
    }
}
