mod common;

use common::{rel, ChainOracle, FD_REL_TOL};
use recipro::catalog::{chh_transform, mchh_transform, n0::n0_transform};
use recipro::recip::ReciprocalTransform;

/// Ten manufactured data sets per transform.
fn check(t: &ReciprocalTransform, seed: u64) {
    for s in 0..10 {
        let (n, err) = ChainOracle::new(t, seed * 100 + s).max_error(3);
        assert!(n > 0);
        assert!(err < FD_REL_TOL, "max relative error {:e} over {} rules", err, n);
    }
}

#[test]
fn chh_rules_match_finite_differences() {
    check(&chh_transform(1).unwrap(), 1);
    check(&chh_transform(2).unwrap(), 2);
}

#[test]
fn mchh_rules_match_finite_differences() {
    check(&mchh_transform(1).unwrap(), 3);
}

#[test]
fn n0_rules_match_finite_differences() {
    check(&n0_transform(2).unwrap(), 4);
}

#[test]
fn inverse_rules_match_finite_differences() {
    check(&chh_transform(1).unwrap().invert().unwrap(), 5);
}

#[test]
fn oracle_detects_a_wrong_rule() {
    let t = chh_transform(1).unwrap();
    let mut o = ChainOracle::new(&t, 6);
    let rules = t.derivative_rules("P", 1).unwrap();
    let (px, rx) = rules.iter().find(|(j, _)| j.count(&"X".into()) == 1).unwrap();
    let (py, ry) = rules.iter().find(|(j, _)| j.count(&"Y".into()) == 1).unwrap();
    let (fx, fy) = (o.fd_jet(px), o.fd_jet(py));
    let (ex, ey) = (o.rule_value(rx), o.rule_value(ry));
    assert!(rel(fx, ex) < FD_REL_TOL && rel(fy, ey) < FD_REL_TOL);
    assert!(rel(fx, ey) > 1e-2 && rel(fy, ex) > 1e-2);
}
