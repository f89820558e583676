//! Frozen reference values. The `s*`, `δ` and Hanner constants were computed
//! with 30-digit arithmetic by independent root solves.

use approx::assert_abs_diff_eq;
use ucx_core::bellman::{hanner_gap, StepFunction};
use ucx_core::certificates::{certificate_for, certificate_ge2};
use ucx_core::domain::{boundary_profile, boundary_value, contains, BoundaryFace, FACE_TOL};
use ucx_core::moduli::{delta, delta_implicit, solve_s_star};
use ucx_core::{Exponent, LambdaPoint, ModulusQuery, Theta};

fn p(v: f64) -> Exponent {
    Exponent::new(v).unwrap()
}

fn q(pv: f64, eps: f64) -> ModulusQuery {
    ModulusQuery::from_raw(pv, eps).unwrap()
}

#[test]
fn p_three_halves_eps_one() {
    let s = solve_s_star(q(1.5, 1.0)).unwrap();
    assert_abs_diff_eq!(s.s_star, 1.715_195_168_119_511_5, epsilon = 1e-11);
    let prof = boundary_profile(s.s_star, p(1.5)).unwrap();
    assert_abs_diff_eq!(prof.f, 0.901_025_019_768_185_1, epsilon = 1e-11);
    assert_abs_diff_eq!(delta(q(1.5, 1.0)).unwrap(), 0.067_122_610_329_016_17, epsilon = 1e-10);
    assert_abs_diff_eq!(delta_implicit(q(1.5, 1.0)).unwrap(), 0.067_122_610_329_016_17, epsilon = 1e-10);
    let cert = certificate_for(p(1.5), Some(1.0)).unwrap();
    assert_abs_diff_eq!(cert.value(LambdaPoint::new(1.0, 1.0, 1.0)), prof.f, epsilon = 1e-12);
}

#[test]
fn closed_form_anchors() {
    assert_abs_diff_eq!(delta(q(2.0, 1.0)).unwrap(), 1.0 - 3f64.sqrt() / 2.0, epsilon = 1e-15);
    assert_abs_diff_eq!(delta(q(4.0, 1.0)).unwrap(), 0.016_005_164_367_284_83, epsilon = 1e-15);
    assert_abs_diff_eq!(solve_s_star(q(2.0, 2f64.sqrt())).unwrap().s_star, 1.0, epsilon = 1e-11);
}

#[test]
fn profile_at_p_two() {
    let prof = boundary_profile(4.0, p(2.0)).unwrap();
    assert_eq!((prof.g, prof.f), (1.0, 2.25));
    assert_abs_diff_eq!(prof.g_prime, 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(prof.f_prime, 0.75, epsilon = 1e-15);
}

#[test]
fn boundary_value_vanishes_at_top() {
    for pv in [1.2f64, 2.0, 3.0, 4.5] {
        let top = LambdaPoint::new(1.0, 1.0, pv.exp2());
        assert_eq!(contains(top, p(pv), FACE_TOL).unwrap(), BoundaryFace::Face3);
        assert_eq!(boundary_value(top, p(pv), Theta::HALF).unwrap(), 0.0);
    }
    let cert = certificate_ge2(p(3.0)).unwrap();
    assert_eq!(cert.value(LambdaPoint::new(1.0, 1.0, 8.0)), 0.0);
}

#[test]
fn hanner_reference() {
    let f = StepFunction::new(vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
    let g = StepFunction::new(vec![0.5, 0.5], vec![1.0, 0.0]).unwrap();
    assert_abs_diff_eq!(hanner_gap(&f, &g, 1.5).unwrap(), 0.108_146_237_715_080_92, epsilon = 1e-14);
}
