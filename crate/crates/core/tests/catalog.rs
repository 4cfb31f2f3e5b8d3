use approx::assert_abs_diff_eq;
use coframe_core::analysis::{cartan_point, gfs_point};
use coframe_core::catalog::*;
use coframe_core::forms::{coframe_directional_derivatives, DEFAULT_STEP};
use coframe_core::{Chart, CoframeField, DerivativeMode, Error, Expr, Point3, Quaternion, SafeBox, ScalarField};
use proptest::prelude::*;

fn chart_point(c: [f64; 3]) -> Point3 {
    Point3::new(Chart::Su2Hemisphere, c).unwrap()
}

/// Jacobian of a chart map by central differences.
fn map_jacobian(f: impl Fn([f64; 3]) -> [f64; 3], x: [f64; 3]) -> [[f64; 3]; 3] {
    let h = 1e-6;
    let mut j = [[0.0; 3]; 3];
    for l in 0..3 {
        let (mut xp, mut xm) = (x, x);
        xp[l] += h;
        xm[l] -= h;
        let (fp, fm) = (f(xp), f(xm));
        for k in 0..3 {
            j[k][l] = (fp[k] - fm[k]) / (2.0 * h);
        }
    }
    j
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|k| (0..3).map(|l| a[i][l] * b[l][k]).sum()))
}

#[test]
fn every_entry_has_consistent_jacobians() {
    for id in ids() {
        let e = lookup(&id).unwrap();
        if !e.coframe.is_symbolic() {
            continue;
        }
        for p in e.safe_box.sample(10, 11) {
            let d = e.coframe.jacobian_discrepancy(&p, DEFAULT_STEP).unwrap();
            assert!(d < 1e-6, "{id}: {d}");
        }
    }
}

#[test]
fn su2_coframe_is_right_invariant() {
    let w = su2_standard().coframe;
    let h = Quaternion::from_chart(&[0.05, -0.1, 0.07]);
    let right = |x: [f64; 3]| (Quaternion::from_chart(&x) * h).to_chart().unwrap();
    for p in SafeBox::su2(0.6).sample(15, 12) {
        let j = map_jacobian(right, p.coords);
        let q = chart_point(right(p.coords));
        let lhs = mat_mul(&w.matrix(&q).unwrap(), &j);
        let rhs = w.matrix(&p).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                assert_abs_diff_eq!(lhs[i][k], rhs[i][k], epsilon = 1e-7);
            }
        }
    }
}

#[test]
fn su2_half_formulas_match_numeric_directional_derivatives() {
    let (u, v) = su2_uv();
    let f = &u + 0.5 * &v;
    let closed = su2_directional_closed_form(&f);
    let w = su2_standard().coframe.with_mode(DerivativeMode::fd());
    let fs: ScalarField = f.into();
    for p in SafeBox::su2_away_from_singular_locus(0.9, 0.05).sample(30, 13) {
        let num = coframe_directional_derivatives(&fs, &w, &p).unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!(num[k], closed[k].eval(&p.coords), epsilon = 1e-7);
        }
    }
}

#[test]
fn su2_invariants_at_reference_point() {
    let e = lookup("su2.standard").unwrap();
    let k = cartan_point(&e.coframe, &chart_point([0.1, 0.2, 0.3])).unwrap().kappa;
    assert_abs_diff_eq!(k, 1.0, epsilon = 1e-12);
    let g = gfs_point(&su2_trivial_gfs().coframe, &chart_point([0.1, 0.2, 0.3])).unwrap();
    assert_abs_diff_eq!(g.i, 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(g.j, 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(g.k, 1.0, epsilon = 1e-12);
}

#[test]
fn sl2_pde_sign() {
    // I = (C − 2x)/y·sinθ at x = y = 1, θ = π/2, C = 0
    let e = lookup("sl2.pde:C=0").unwrap();
    let p = Point3::new(Chart::Sl2, [1.0, 1.0, std::f64::consts::FRAC_PI_2]).unwrap();
    let g = gfs_point(&e.coframe, &p).unwrap();
    assert_abs_diff_eq!(g.i, -2.0, epsilon = 1e-10);
    assert_abs_diff_eq!(g.j, 0.0, epsilon = 1e-10);
}

#[test]
fn e2_pde_entries_satisfy_compatibility() {
    // η_y = f_x + 1 for each (f, η)
    let [x, y, _] = Expr::vars();
    for (f, eta) in [
        (Expr::zero(), y.clone()),
        (Expr::one(), &x + &y),
        (Expr::zero(), &y - 1.0),
        (x.clone(), 2.0 * &y),
    ] {
        for p in SafeBox::e2().sample(5, 14) {
            assert_abs_diff_eq!(eta.diff(1).eval(&p.coords), f.diff(0).eval(&p.coords) + 1.0, epsilon = 1e-14);
        }
    }
}

#[test]
fn lens_curvature_at_chart_origin() {
    let e = lens_family(0.3).unwrap();
    let k = cartan_point(&e.coframe, &Point3::new(Chart::Lens, [0.0; 3]).unwrap()).unwrap().kappa;
    assert_abs_diff_eq!(k, 1.0 / (8.0 * 0.3f64.powi(3)), epsilon = 1e-10);
    assert!((k - 1.0 / 0.504).abs() > 1.0);
}

#[test]
fn lens_weighted_form_is_not_a_connection() {
    // dα¹ = α²∧α³ holds for the weighted α³ only at a = ½
    for (a, ok) in [(0.5, true), (0.3, false)] {
        let [a1, a2, _] = lens_coframe(a).unwrap();
        let w = CoframeField::symbolic(Chart::Lens, [a1, a2, lens_alpha3_weighted(a)]);
        let r = cartan_point(&w, &Point3::new(Chart::Lens, [0.1, 0.2, -0.1]).unwrap()).unwrap();
        assert_eq!(r.residuals[0] < 1e-10, ok, "a = {a}: {:?}", r.residuals);
    }
}

#[test]
fn lens_gfs_has_nonconstant_invariants() {
    let e = lens_gfs(0.3).unwrap();
    let is: Vec<f64> = e
        .safe_box
        .sample(50, 15)
        .iter()
        .map(|p| gfs_point(&e.coframe, p).unwrap().i)
        .collect();
    let spread = is.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - is.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread > 1e-3);
}

#[test]
fn lookup_errors() {
    assert!(matches!(lookup("lens:a=1.5"), Err(Error::OutOfRangeA { .. })));
    assert!(matches!(lookup("su2.landsberg:K=-1"), Err(Error::NonPositiveCurvature { .. })));
    assert!(matches!(lookup("su2.f:w"), Err(Error::UnknownStructure(_))));
    assert!(matches!(lookup("sl2.pde:C="), Err(Error::UnknownStructure(_))));
}

#[test]
fn parametric_ids_round_trip() {
    assert_eq!(lookup("lens:a=0.25").unwrap().id, "lens:a=0.25");
    assert_eq!(lookup("sl2.pde:C=-1.5").unwrap().id, "sl2.pde:C=-1.5");
    assert_eq!(lookup("sl2.translation:m=2,n=3").unwrap().id, "sl2.translation:m=2,n=3");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lens_curvature_formula(a in 0.1f64..0.9, seed in 0u64..1000) {
        let e = lens_family(a).unwrap();
        for p in e.safe_box.sample(3, seed) {
            let cp = cartan_point(&e.coframe, &p).unwrap();
            // D from the ambient moduli, independent of the chart expression
            let z = Quaternion::from_chart(&p.coords);
            let d = a * (z.x0 * z.x0 + z.x1 * z.x1) + (1.0 - a) * (z.y0 * z.y0 + z.y1 * z.y1);
            let k = 1.0 / (8.0 * d.powi(3));
            prop_assert!((cp.kappa - k).abs() < 1e-9 * k.max(1.0));
            prop_assert!(cp.residuals.iter().all(|r| *r < 1e-9));
        }
    }

    #[test]
    fn sl2_pde_closed_form(c0 in -2.0f64..2.0, x in -2.0f64..2.0, y in 0.5f64..3.0, t in 0.0f64..std::f64::consts::TAU) {
        let e = sl2_pde_gfs(c0).unwrap();
        let g = gfs_point(&e.coframe, &Point3::new(Chart::Sl2, [x, y, t]).unwrap()).unwrap();
        let h = (c0 - 2.0 * x) / y;
        prop_assert!((g.i - h * t.sin()).abs() < 1e-9);
        prop_assert!((g.j - h * t.cos()).abs() < 1e-9);
        prop_assert!((g.k - 1.0).abs() < 1e-9);
    }
}
