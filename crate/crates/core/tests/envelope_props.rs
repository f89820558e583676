use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use ucx_core::bellman::{brute_force_b, moment, Atom, SearchBudget, StepPair};
use ucx_core::certificates::certificate_for;
use ucx_core::envelope::{
    concavify, default_radius, envelope_slice, sample_boundary, EnvelopeError, ObstacleGrid, SANDWICH_LOWER_TOL,
};
use ucx_core::numerics::linspace;
use ucx_core::{Exponent, LambdaPoint, Theta};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(16), failure_persistence: None, ..ProptestConfig::default() }
}

const P: f64 = 1.5;
const EPS: f64 = 1.0;

fn p() -> Exponent {
    Exponent::new(P).unwrap()
}

fn grid() -> &'static ObstacleGrid {
    static GRID: OnceLock<ObstacleGrid> = OnceLock::new();
    GRID.get_or_init(|| sample_boundary(p(), Theta::HALF, 24, default_radius(p(), Some(EPS))).unwrap())
}

/// Random convex combinations of grid points, hence inside the sampled hull.
fn hull_point() -> impl Strategy<Value = LambdaPoint> {
    let n = grid().len();
    prop::collection::vec((0..n, 0.01f64..1.0), 2..6).prop_map(|picks| {
        let total: f64 = picks.iter().map(|(_, w)| w).sum();
        picks.iter().fold(LambdaPoint::default(), |acc, &(i, w)| {
            let y = grid().points()[i];
            let a = w / total;
            LambdaPoint::new(acc.x1 + a * y.x1, acc.x2 + a * y.x2, acc.x3 + a * y.x3)
        })
    })
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn decomposition_is_caratheodory(x in hull_point()) {
        let q = concavify(grid(), x).unwrap();
        prop_assert!(q.active_weights.len() <= 4);
        let total: f64 = q.active_weights.iter().map(|(_, w)| w).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        let mut y = LambdaPoint::default();
        for &(i, w) in &q.active_weights {
            let g = grid().points()[i];
            y = LambdaPoint::new(y.x1 + w * g.x1, y.x2 + w * g.x2, y.x3 + w * g.x3);
        }
        prop_assert!(y.dist_inf(x) <= 1e-8 * x.max_abs().max(1.0));
        let v: f64 = q.active_weights.iter().map(|&(i, w)| w * grid().values()[i]).sum();
        prop_assert!((v - q.result).abs() <= 1e-9 * q.result.abs().max(1.0));
    }

    #[test]
    fn envelope_is_below_certificate(x in hull_point()) {
        let cert = certificate_for(p(), Some(EPS)).unwrap();
        let q = concavify(grid(), x).unwrap();
        prop_assert!(q.result <= cert.value(x) + 1e-9 * x.max_abs().max(1.0));
    }

    #[test]
    fn envelope_is_concave(u in hull_point(), v in hull_point(), lam in 0.0f64..=1.0) {
        let x = LambdaPoint::lerp(v, u, lam);
        let bu = concavify(grid(), u).unwrap().result;
        let bv = concavify(grid(), v).unwrap().result;
        let bx = concavify(grid(), x).unwrap().result;
        prop_assert!(bx >= lam * bu + (1.0 - lam) * bv - 1e-9 * (bu.abs() + bv.abs()).max(1.0));
    }

    #[test]
    fn envelope_is_homogeneous(x in hull_point(), lam in 0.2f64..1.0) {
        let a = concavify(grid(), x.scale(lam)).unwrap().result;
        let b = lam * concavify(grid(), x).unwrap().result;
        prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn envelope_majorizes_obstacle_on_grid() {
    let g = grid();
    for i in (0..g.len()).step_by(7) {
        let q = concavify(g, g.points()[i]).unwrap();
        assert!(q.result >= g.values()[i] - 1e-9 * g.values()[i].max(1.0), "at {}", g.points()[i]);
    }
}

#[test]
fn refinement_never_decreases() {
    let coarse = sample_boundary(p(), Theta::HALF, 12, 16.0).unwrap();
    let s_star = certificate_for(p(), Some(EPS)).unwrap().meta.s_star.unwrap();
    let anchors = [
        ucx_core::domain::slice_point(s_star, p(), false).unwrap(),
        ucx_core::domain::slice_point(s_star, p(), true).unwrap(),
    ];
    let fine = coarse.with_points(&anchors).unwrap();
    for x3 in linspace(0.0, P.exp2(), 9) {
        let x = LambdaPoint::new(1.0, 1.0, x3);
        assert!(concavify(&fine, x).unwrap().result >= concavify(&coarse, x).unwrap().result - 1e-12);
    }
    let at_chord = concavify(&fine, LambdaPoint::new(1.0, 1.0, 1.0)).unwrap().result;
    let f_star = 0.901_025_019_768_185_1;
    assert!((at_chord - f_star).abs() < 1e-9, "{at_chord}");
}

#[test]
fn slices_are_nonincreasing() {
    for pv in [1.5f64, 2.0, 3.0] {
        let pe = Exponent::new(pv).unwrap();
        let g = sample_boundary(pe, Theta::HALF, 20, default_radius(pe, Some(1.0))).unwrap();
        let rows = envelope_slice(pe, Theta::HALF, &linspace(0.0, pv.exp2(), 33), &g).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-9, "p={pv}: {:?}", w);
        }
        assert!(rows.last().unwrap().1.abs() < 1e-9);
    }
}

#[test]
fn sandwich_against_brute_force() {
    let budget = SearchBudget::new(8, 800, 1, 1e8).unwrap();
    let cert = certificate_for(p(), Some(EPS)).unwrap();
    let pairs = [
        vec![Atom::new(0.5, 1.0, 0.2), Atom::new(0.5, -0.3, 0.8)],
        vec![Atom::new(0.3, 1.2, 1.0), Atom::new(0.7, 0.1, -0.5)],
        vec![Atom::new(1.0, 0.7, -0.4)],
    ];
    for atoms in pairs {
        let x = moment(&StepPair::new(atoms).unwrap(), p());
        let env = match concavify(grid(), x) {
            Ok(q) => q.result,
            Err(EnvelopeError::OutsideHull { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        let bf = brute_force_b(x, p(), Theta::HALF, &budget).unwrap();
        assert!(env <= cert.value(x) + 1e-9, "{x}");
        assert!(bf.value - SANDWICH_LOWER_TOL <= env, "{x}: bf {} env {env}", bf.value);
    }
}
