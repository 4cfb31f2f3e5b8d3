use coframe_core::analysis::{cartan_point, extract_cartan_k_coframe, extract_gfs_invariants, gfs_point};
use coframe_core::catalog::{self, su2_maurer_cartan};
use coframe_core::constructions::*;
use coframe_core::{Chart, CoframeField, Error, Expr, OneFormField, Point3, SafeBox, ScalarField};
use proptest::prelude::*;

fn max_matrix_diff(a: &CoframeField, b: &CoframeField, pts: &[Point3]) -> f64 {
    let mut worst: f64 = 0.0;
    for p in pts {
        let (ma, mb) = (a.matrix(p).unwrap(), b.matrix(p).unwrap());
        for i in 0..3 {
            for k in 0..3 {
                worst = worst.max((ma[i][k] - mb[i][k]).abs());
            }
        }
    }
    worst
}

fn scaled_rows(rows: &[[Expr; 3]; 3], perm: [usize; 3], scale: [f64; 3]) -> [[Expr; 3]; 3] {
    std::array::from_fn(|i| rows[perm[i]].clone().map(|e| scale[i] * e))
}

#[test]
fn gfs_to_cartan_inverts_cartan_to_gfs() {
    let base = catalog::sl2_standard();
    let gfs = catalog::lookup("sl2.pde:C=0").unwrap();
    let pts = base.safe_box.sample(40, 1);
    let (alpha, _) = gfs_to_cartan(&gfs.coframe, &pts, 1e-8).unwrap();
    assert!(max_matrix_diff(&alpha, &base.coframe, &pts) < 1e-8);
    let i: ScalarField = gfs.expected.i.clone().unwrap().into();
    let j: ScalarField = gfs.expected.j.clone().unwrap().into();
    let back = cartan_to_gfs(&alpha, &i, &j, &pts, 1e-6).unwrap();
    assert!(max_matrix_diff(&back, &gfs.coframe, &pts) < 1e-8);
}

#[test]
fn induced_curvature_matches_cross_formula() {
    let e = catalog::lookup("su2.f:u").unwrap();
    let pts = e.safe_box.sample(25, 3);
    let (alpha, kappa) = gfs_to_cartan(&e.coframe, &pts, 1e-8).unwrap();
    let r = extract_cartan_k_coframe(&alpha, &pts, 1e-5).unwrap();
    assert!(r.pass, "{:?}", r.residuals);
    for (p, k) in pts.iter().zip(r.invariant("kappa")) {
        assert!((kappa.eval(p).unwrap() - k).abs() < 1e-5);
    }
}

#[test]
fn unit_flag_required() {
    let e = catalog::lookup("su2.landsberg:K=4").unwrap();
    let pts = e.safe_box.sample(5, 0);
    assert!(matches!(gfs_to_cartan(&e.coframe, &pts, 1e-8), Err(Error::NotUnitFlag { .. })));
}

#[test]
fn trivial_invariants_on_sl2_violate_pde() {
    let base = catalog::sl2_standard();
    let pts = base.safe_box.sample(30, 2);
    let zero = ScalarField::constant(0.0);
    match cartan_to_gfs(&base.coframe, &zero, &zero, &pts, 1e-6) {
        Err(Error::PdeViolation { residuals }) => {
            assert!((residuals[0] - 2.0).abs() < 1e-8);
            assert!(residuals[1] < 1e-12 && residuals[2] < 1e-12);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn landsberg_entries_match_hand_coframes() {
    let b = su2_maurer_cartan();
    let pts = SafeBox::su2(0.9).sample(20, 5);
    let k1 = CoframeField::symbolic(Chart::Su2Hemisphere, scaled_rows(&b, [2, 0, 1], [1.0, 1.0, 1.0]));
    let k4 = CoframeField::symbolic(Chart::Su2Hemisphere, scaled_rows(&b, [2, 0, 1], [0.5, 0.5, 1.0]));
    let e1 = catalog::lookup("su2.landsberg:K=1").unwrap();
    let e4 = catalog::lookup("su2.landsberg:K=4").unwrap();
    assert!(max_matrix_diff(&e1.coframe, &k1, &pts) < 1e-12);
    assert!(max_matrix_diff(&e4.coframe, &k4, &pts) < 1e-12);
}

#[test]
fn landsberg_round_trip() {
    for k in [1.0f64, 4.0] {
        let e = catalog::su2_landsberg(k).unwrap();
        let pts = e.safe_box.sample(10, 6);
        let (alpha, kappa) = landsberg_to_cartan(&e.coframe, &pts, 1e-6).unwrap();
        for p in &pts {
            assert!((kappa.eval(p).unwrap() - k).abs() < 1e-6);
            assert!((cartan_point(&alpha, p).unwrap().kappa - k).abs() < 1e-6);
        }
        let m = ScalarField::constant(1.0 / k.sqrt());
        let back = cartan_to_landsberg(&alpha, &m, &pts, 1e-5).unwrap();
        assert!(max_matrix_diff(&back, &e.coframe, &pts) < 1e-6);
    }
}

#[test]
fn landsberg_preconditions() {
    let e = catalog::lookup("su2.f:u").unwrap();
    let pts = e.safe_box.sample(10, 0);
    match landsberg_to_cartan(&e.coframe, &pts, 1e-6) {
        Err(Error::PreconditionViolation { condition, .. }) => assert_eq!(condition, "J != 0"),
        other => panic!("{:?}", other.map(|_| ())),
    }
    let base = catalog::su2_standard();
    let zero = ScalarField::constant(0.0);
    assert!(matches!(
        cartan_to_landsberg(&base.coframe, &zero, &pts, 1e-6),
        Err(Error::ZeroM { .. })
    ));
    let wrong = ScalarField::constant(2.0);
    assert!(matches!(
        cartan_to_landsberg(&base.coframe, &wrong, &pts, 1e-6),
        Err(Error::PdeViolation { .. })
    ));
}

#[test]
fn phi_construction_on_flat_structure() {
    let base = catalog::e2_standard();
    let pts = base.safe_box.sample(30, 8);
    let [x, _, _] = Expr::vars();
    // d(−x dy) = −dx∧dy = (𝒦 − 1)α¹∧α²
    let phi = OneFormField::symbolic([Expr::zero(), -x.clone(), Expr::zero()]);
    let w = phi_construction(&base.coframe, &phi, &pts, 1e-8).unwrap();
    let r = extract_gfs_invariants(&w, &pts, 1e-8).unwrap();
    assert!(r.pass, "{:?}", r.residuals);
    for k in r.invariant("K") {
        assert!((k - 1.0).abs() < 1e-10);
    }
    let bad = OneFormField::symbolic([Expr::zero(), x, Expr::zero()]);
    assert!(matches!(
        phi_construction(&base.coframe, &bad, &pts, 1e-8),
        Err(Error::PhiConstraintViolation { .. })
    ));
}

#[test]
fn phi_zero_on_unit_structure_is_relabel() {
    let base = catalog::su2_standard();
    let pts = base.safe_box.sample(10, 9);
    let zero = OneFormField::symbolic([Expr::zero(), Expr::zero(), Expr::zero()]);
    let w = phi_construction(&base.coframe, &zero, &pts, 1e-8).unwrap();
    assert!(max_matrix_diff(&w, &catalog::su2_trivial_gfs().coframe, &pts) < 1e-14);
}

#[test]
fn liouville_lifts_have_gauss_curvature() {
    for (s, k) in [
        (SurfaceChart::euclidean(), 0.0),
        (SurfaceChart::hyperbolic(), -1.0),
        (SurfaceChart::round_sphere(2.5), 2.5),
    ] {
        let pts = s.domain.sample(30, 10);
        let w = liouville_lift(&s, &pts, 1e-9).unwrap();
        for p in &pts {
            let cp = cartan_point(&w, p).unwrap();
            assert!((cp.kappa - k).abs() < 1e-9, "{} {}", s.name, cp.kappa);
        }
    }
}

#[test]
fn liouville_positivity() {
    let s = SurfaceChart::euclidean();
    let pts = s.domain.sample(10, 0);
    let [x, y, _] = Expr::vars();
    let ok = PhiForm {
        f: Expr::zero(),
        g: x,
    };
    assert_eq!(ok.positivity(&s).as_const(), Some(1.0));
    let bad = PhiForm { f: y, g: Expr::zero() };
    match liouville_gfs(&s, &bad, &pts, 1e-9) {
        Err(Error::PositivityViolation { min }) => assert_eq!(min, -1.0),
        other => panic!("{:?}", other.map(|_| ())),
    }
}

#[test]
fn liouville_invariants_at_zero_angle() {
    // at θ = 0 the lifted invariants equal the downstairs ones
    let e = catalog::lookup("sl2.translation:m=1,n=2").unwrap();
    let s = SurfaceChart::hyperbolic();
    let y = Expr::var(1);
    let phi = PhiForm {
        f: &y + 2.0,
        g: Expr::zero(),
    };
    let l = liouville_gfs(&s, &phi, &s.domain.sample(10, 0), 1e-9).unwrap();
    for (x0, y0) in [(0.3, 0.7), (-1.0, 2.0)] {
        let p = Point3::new(Chart::Sl2, [x0, y0, 0.0]).unwrap();
        let g = gfs_point(&e.coframe, &p).unwrap();
        assert!((g.i - l.i0.eval(&p.coords)).abs() < 1e-10);
        assert!((g.j - l.j0.eval(&p.coords)).abs() < 1e-10);
    }
}

#[test]
fn zoll_requires_positive_curvature() {
    let w = catalog::sl2_standard().coframe;
    assert!(matches!(
        constant_curvature_zoll_gfs(-1.0, &w),
        Err(Error::NonPositiveCurvature { .. })
    ));
}

#[test]
fn conformal_rescale_rejects_nonpositive() {
    let base = catalog::su2_standard();
    let pts = base.safe_box.sample(5, 0);
    assert!(matches!(
        conformal_rescale(&base.coframe, &ScalarField::constant(-1.0), &pts),
        Err(Error::NonPositiveV { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_rescale_divides_curvature(v in 0.3f64..3.0, seed in 0u64..1000) {
        let base = catalog::su2_standard();
        let pts = base.safe_box.sample(4, seed);
        let w = conformal_rescale(&base.coframe, &ScalarField::constant(v), &pts).unwrap();
        for p in &pts {
            let cp = cartan_point(&w, p).unwrap();
            prop_assert!((cp.kappa - 1.0 / (v * v)).abs() < 1e-9);
            prop_assert!(cp.residuals.iter().all(|r| *r < 1e-9));
        }
    }

    #[test]
    fn varying_rescale_stays_cartan(c in -0.4f64..0.4, seed in 0u64..1000) {
        let base = catalog::e2_standard();
        let pts = base.safe_box.sample(4, seed);
        let [x, y, _] = Expr::vars();
        let v: ScalarField = (1.0 + c * (&x * 0.3).sin() + 0.1 * y.cos()).exp().into();
        let w = conformal_rescale(&base.coframe, &v, &pts).unwrap();
        for p in &pts {
            let cp = cartan_point(&w, p).unwrap();
            prop_assert!(cp.residuals.iter().all(|r| *r < 1e-8), "{:?}", cp.residuals);
        }
    }

    #[test]
    fn sl2_pde_family_round_trips(c0 in -3.0f64..3.0, seed in 0u64..1000) {
        let e = catalog::sl2_pde_gfs(c0).unwrap();
        let pts = e.safe_box.sample(6, seed);
        let (alpha, kappa) = gfs_to_cartan(&e.coframe, &pts, 1e-8).unwrap();
        prop_assert!(max_matrix_diff(&alpha, &catalog::sl2_standard().coframe, &pts) < 1e-8);
        for p in &pts {
            prop_assert!((kappa.eval(p).unwrap() + 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn flat_liouville_unit_flag(c in 0.2f64..3.0, seed in 0u64..1000) {
        let s = SurfaceChart::euclidean();
        let pts = s.domain.sample(6, seed);
        let x = Expr::var(0);
        let l = liouville_gfs(&s, &PhiForm { f: Expr::zero(), g: c * x }, &pts, 1e-9).unwrap();
        for p in &pts {
            let g = gfs_point(&l.coframe, p).unwrap();
            prop_assert!((g.k - 1.0).abs() < 1e-9);
            prop_assert!((g.i - l.i.eval(&p.coords)).abs() < 1e-8);
            prop_assert!((g.j - l.j.eval(&p.coords)).abs() < 1e-8);
        }
    }
}
