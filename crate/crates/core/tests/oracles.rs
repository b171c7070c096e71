//! Closed-form oracles through the public API.

use std::f64::consts::PI;

use capacity_core::geometry::ConvexBody;
use capacity_core::model::{exterior_equality_model, remark_example_model, WarpedModel};
use capacity_core::radial::{equality_check_remark, hyperbolicity_indicator, warped_ball_capacity};
use capacity_core::report::Verdict;
use capacity_core::solver::{capacity_energy, capacity_flux, solve_annulus, SolveOptions};
use capacity_core::Vec3;
use proptest::prelude::*;

#[test]
fn hyperbolic_ball() {
    let m = WarpedModel::hyperbolic(2).unwrap();
    let cap = warped_ball_capacity(&m, 1.0, f64::INFINITY).unwrap();
    // 4π / ∫₁^∞ sinh⁻² = 4π / (coth 1 − 1)
    let oracle = 4.0 * PI / (1.0 / 1f64.tanh() - 1.0);
    assert!((cap - oracle).abs() <= 1e-10 * oracle, "{cap} {oracle}");
    assert!(hyperbolicity_indicator(&m).unwrap());
    assert!(!hyperbolicity_indicator(&WarpedModel::euclidean(1).unwrap()).unwrap());
}

#[test]
fn equality_models() {
    let r = equality_check_remark(&remark_example_model(2, 1.0, 2.0).unwrap(), 1.0, 2.0).unwrap();
    assert_eq!(r.verdict, Verdict::Equality);
    let e = exterior_equality_model(3, 0.5, 2.0).unwrap();
    let cap = warped_ball_capacity(&e, 0.0, f64::INFINITY).unwrap();
    assert!((cap - 2.0 * 0.5 * 2.0).abs() < 1e-9, "{cap}");
}

#[test]
fn shifted_ball_annulus() {
    // the outer sphere is centred on the symmetry axis, so the potential is not radial
    let b = ConvexBody::ball(Vec3::new(0.0, 0.0, 0.3), 1.0).unwrap();
    let u = solve_annulus(&b, 4.0, 0.05, SolveOptions::default()).unwrap();
    let e = capacity_energy(&u).value;
    let f = capacity_flux(&u, &b, 0.15).unwrap().value;
    assert!((e - f).abs() < 0.02 * e, "{e} {f}");
    // bracketed by the concentric annuli B₁ ⊂ B₃.₇ and B₁ ⊂ B₄.₃
    let conc = |outer: f64| 4.0 * PI / (1.0 - 1.0 / outer);
    assert!(e > 0.99 * conc(4.3) && e < 1.01 * conc(3.7), "{e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn euclidean_annulus_quadrature(a in 0.2f64..3.0, ratio in 1.1f64..20.0) {
        let m = WarpedModel::euclidean(2).unwrap();
        let cap = warped_ball_capacity(&m, a, a * ratio).unwrap();
        let oracle = 4.0 * PI / (1.0 / a - 1.0 / (a * ratio));
        prop_assert!((cap - oracle).abs() <= 1e-10 * oracle);
    }
}
