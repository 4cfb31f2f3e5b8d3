//! Maps between Cartan structures and generalized Finsler coframes.

use crate::analysis::{cartan_point, gfs_invariant_fields, gfs_invariants_with_derivatives, gfs_point, par_points};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::forms::{
    coframe_directional_derivatives, directional_from_matrix, expand_1form_in_matrix, expand_in_matrix,
    richardson_jacobian, symbolic_directional, Chart, CoframeField, OneFormField, Point3, ScalarField,
};
use crate::sampling::SafeBox;

fn max_over(vals: &[[f64; 3]]) -> Vec<f64> {
    (0..3)
        .map(|k| vals.iter().fold(0.0f64, |a, v| if v[k].is_nan() { f64::NAN } else { a.max(v[k]) }))
        .collect()
}

/// A Riemannian surface chart in coordinates (x, y) given by an orthonormal
/// coframe (η¹, η²) with dη¹ = a η¹∧η², dη² = b η¹∧η².
#[derive(Debug, Clone)]
pub struct SurfaceChart {
    pub name: String,
    /// Chart of the lifted (x, y, θ) coordinates.
    pub chart: Chart,
    pub eta1: [Expr; 2],
    pub eta2: [Expr; 2],
    pub a: Expr,
    pub b: Expr,
    pub gauss_k: Expr,
    /// Sampling domain for lifted points.
    pub domain: SafeBox,
}

impl SurfaceChart {
    pub fn euclidean() -> Self {
        SurfaceChart {
            name: "euclidean plane".into(),
            chart: Chart::E2,
            eta1: [Expr::one(), Expr::zero()],
            eta2: [Expr::zero(), Expr::one()],
            a: Expr::zero(),
            b: Expr::zero(),
            gauss_k: Expr::zero(),
            domain: SafeBox::e2(),
        }
    }

    /// Upper half-plane with η¹ = dx/y, η² = dy/y.
    pub fn hyperbolic() -> Self {
        let y = Expr::var(1);
        SurfaceChart {
            name: "hyperbolic half-plane".into(),
            chart: Chart::Sl2,
            eta1: [y.recip(), Expr::zero()],
            eta2: [Expr::zero(), y.recip()],
            a: Expr::one(),
            b: Expr::zero(),
            gauss_k: Expr::c(-1.0),
            domain: SafeBox::sl2(),
        }
    }

    /// Stereographic chart of the round sphere of curvature `k0`.
    pub fn round_sphere(k0: f64) -> Self {
        let [x, y, _] = Expr::vars();
        let lambda = 2.0 / (k0.sqrt() * (1.0 + &x * &x + &y * &y));
        let l2 = lambda.powi(2);
        SurfaceChart {
            name: format!("round sphere K={k0}"),
            chart: Chart::SurfaceChart,
            eta1: [lambda.clone(), Expr::zero()],
            eta2: [Expr::zero(), lambda.clone()],
            a: -(lambda.diff(1) / &l2),
            b: lambda.diff(0) / &l2,
            gauss_k: Expr::c(k0),
            domain: SafeBox::cuboid(Chart::SurfaceChart, [-1.0, -1.0, 0.0], [1.0, 1.0, std::f64::consts::TAU]),
        }
    }

    /// (f_{η1}, f_{η2}) for a function of (x, y).
    pub fn frame_derivatives(&self, f: &Expr) -> [Expr; 2] {
        let (fx, fy) = (f.diff(0), f.diff(1));
        let [n11, n12] = &self.eta1;
        let [n21, n22] = &self.eta2;
        let det = n11 * n22 - n12 * n21;
        [(&fx * n22 - &fy * n21) / &det, (n11 * &fy - n12 * &fx) / &det]
    }

    /// Residuals of dη¹ = aη¹∧η², dη² = bη¹∧η² and of the curvature formula.
    pub fn structure_residuals(&self, x: &[f64; 3]) -> [f64; 3] {
        let [n11, n12] = &self.eta1;
        let [n21, n22] = &self.eta2;
        let det = n11 * n22 - n12 * n21;
        let d1 = n12.diff(0) - n11.diff(1);
        let d2 = n22.diff(0) - n21.diff(1);
        let [_, a2] = self.frame_derivatives(&self.a);
        let [b1, _] = self.frame_derivatives(&self.b);
        let k = a2 - self.a.powi(2) - b1 - self.b.powi(2);
        [
            (d1 - &self.a * &det).eval(x).abs(),
            (d2 - &self.b * &det).eval(x).abs(),
            (k - &self.gauss_k).eval(x).abs(),
        ]
    }

    fn lift(&self, c: &[Expr; 2]) -> [Expr; 3] {
        [c[0].clone(), c[1].clone(), Expr::zero()]
    }
}

/// φ = f η¹ + g η² on a surface chart.
#[derive(Debug, Clone)]
pub struct PhiForm {
    pub f: Expr,
    pub g: Expr,
}

impl PhiForm {
    /// −f_{η2} + af + bg + g_{η1} + K.
    pub fn positivity(&self, s: &SurfaceChart) -> Expr {
        let [_, f2] = s.frame_derivatives(&self.f);
        let [g1, _] = s.frame_derivatives(&self.g);
        -f2 + &s.a * &self.f + &s.b * &self.g + g1 + &s.gauss_k
    }
}

fn comb(terms: &[(Expr, &[Expr; 3])]) -> [Expr; 3] {
    std::array::from_fn(|k| terms.iter().fold(Expr::zero(), |acc, (f, w)| acc + f * &w[k]))
}

/// Liouville–Cartan coframe on the (x, y, θ) chart over `s`.
pub fn liouville_lift(s: &SurfaceChart, points: &[Point3], tolerance: f64) -> Result<CoframeField> {
    let t = Expr::var(2);
    let (c, sn) = (t.cos(), t.sin());
    let e1 = s.lift(&s.eta1);
    let e2 = s.lift(&s.eta2);
    let dtheta = [Expr::zero(), Expr::zero(), Expr::one()];
    let a1 = comb(&[(c.clone(), &e1), (sn.clone(), &e2)]);
    let a2 = comb(&[(-&sn, &e1), (c.clone(), &e2)]);
    let a3 = comb(&[(Expr::c(-1.0), &dtheta), (-&s.a, &e1), (-&s.b, &e2)]);
    let w = CoframeField::symbolic(s.chart, [a1, a2, a3]);
    let worst = par_points(points, |p| {
        let cp = cartan_point(&w, p)?;
        let k = s.gauss_k.eval(&p.coords);
        Ok(cp.residuals.iter().fold((cp.kappa - k).abs(), |a, b| a.max(*b)))
    })?
    .into_iter()
    .fold(0.0f64, f64::max);
    if !(worst < tolerance) {
        return Err(Error::LiftConventionFailure { residual: worst });
    }
    Ok(w)
}

#[derive(Debug, Clone)]
pub struct LiouvilleGfs {
    pub coframe: CoframeField,
    pub v: Expr,
    pub i: Expr,
    pub j: Expr,
    /// Downstairs invariants before the fibre rotation.
    pub i0: Expr,
    pub j0: Expr,
}

/// Generalized Finsler coframe induced by φ on the Liouville lift.
///
/// The closed-form invariants live on the surface; on the lift they are
/// rotated by the fibre angle: (I, J) = R(θ)(I₀, J₀).
pub fn liouville_gfs(s: &SurfaceChart, phi: &PhiForm, points: &[Point3], tolerance: f64) -> Result<LiouvilleGfs> {
    let d = phi.positivity(s);
    let min = points.iter().map(|p| d.eval(&p.coords)).fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::PositivityViolation { min });
    }
    let lift = liouville_lift(s, points, tolerance)?;
    let [a1, a2, a3] = lift.row_exprs().expect("lift is symbolic");
    let sq = d.sqrt();
    let v = sq.recip();
    let e1 = s.lift(&s.eta1);
    let e2 = s.lift(&s.eta2);
    let w1 = comb(&[(sq.clone(), &a1)]);
    let w2 = comb(&[(-&phi.f, &e1), (-&phi.g, &e2), (Expr::c(-1.0), &a3)]);
    let w3 = comb(&[(sq.clone(), &a2)]);
    let [v1, v2] = s.frame_derivatives(&v);
    let i0 = -(&phi.f * &v) - v2;
    let j0 = -(&phi.g * &v) + v1;
    let t = Expr::var(2);
    let (c, sn) = (t.cos(), t.sin());
    let i = &c * &i0 + &sn * &j0;
    let j = -(&sn * &i0) + &c * &j0;
    Ok(LiouvilleGfs {
        coframe: CoframeField::symbolic(s.chart, [w1, w2, w3]),
        v,
        i,
        j,
        i0,
        j0,
    })
}

/// (√K₀ α¹, −α³, √K₀ α²) for a constant-curvature Liouville coframe.
pub fn constant_curvature_zoll_gfs(k0: f64, a: &CoframeField) -> Result<CoframeField> {
    if !(k0 > 0.0) {
        return Err(Error::NonPositiveCurvature { k0 });
    }
    let s = k0.sqrt();
    Ok(CoframeField::new(
        a.chart,
        [a.rows[0].scaled(s), a.rows[2].scaled(-1.0), a.rows[1].scaled(s)],
    )
    .with_mode(a.mode))
}

#[derive(Debug, Clone)]
pub struct CurvatureNormalized {
    pub coframe: CoframeField,
    pub i: Expr,
    pub j: Expr,
}

/// (√𝒦 α¹, −α³, √𝒦 α²) for a 𝒦-Cartan coframe with 𝒦 > 0 and 𝒦_{α3} = 0,
/// with I = 𝒦_{α2}/(2𝒦√𝒦), J = −𝒦_{α1}/(2𝒦√𝒦).
pub fn curvature_normalized_gfs(a: &CoframeField, kappa: &Expr) -> Option<CurvatureNormalized> {
    let rows = a.row_exprs()?;
    let s = kappa.sqrt();
    let dk = symbolic_directional(&rows, kappa);
    let denom = 2.0 * kappa * &s;
    let coframe = CoframeField::symbolic(
        a.chart,
        [
            comb(&[(s.clone(), &rows[0])]),
            comb(&[(Expr::c(-1.0), &rows[2])]),
            comb(&[(s.clone(), &rows[1])]),
        ],
    );
    Some(CurvatureNormalized {
        coframe,
        i: &dk[1] / &denom,
        j: -(&dk[0] / &denom),
    })
}

/// α = (ω¹, ω³, Iω¹ + Jω³ − ω²) and 𝒦 = −I² − J² + J₁ − I₃ + 1.
pub fn gfs_to_cartan(w: &CoframeField, points: &[Point3], tolerance: f64) -> Result<(CoframeField, ScalarField)> {
    let dev = par_points(points, |p| Ok((gfs_point(w, p)?.k - 1.0).abs()))?
        .into_iter()
        .fold(0.0f64, f64::max);
    if !(dev < tolerance) {
        return Err(Error::NotUnitFlag { deviation: dev });
    }
    let [i, j, _] = gfs_invariant_fields(w);
    let a3 = OneFormField::lin_comb(&[
        (i, w.rows[0].clone()),
        (j, w.rows[2].clone()),
        (ScalarField::constant(-1.0), w.rows[1].clone()),
    ]);
    let wc = w.clone();
    let kappa = ScalarField::numeric(move |p| {
        let ([i, j, _], d) = gfs_invariants_with_derivatives(&wc, p)?;
        Ok(-i * i - j * j + d[1][0] - d[0][2] + 1.0)
    });
    let cartan = CoframeField::new(w.chart, [w.rows[0].clone(), w.rows[2].clone(), a3]).with_mode(w.mode);
    Ok((cartan, kappa))
}

/// Residuals of −I₂ + J₁ = 𝒦 − 1, I₃ = −J, J₃ = I with derivatives along `a`.
pub fn pde_residuals_at(a: &CoframeField, i: &ScalarField, j: &ScalarField, p: &Point3) -> Result<[f64; 3]> {
    let kappa = cartan_point(a, p)?.kappa;
    let di = coframe_directional_derivatives(i, a, p)?;
    let dj = coframe_directional_derivatives(j, a, p)?;
    let (iv, jv) = (i.eval(p)?, j.eval(p)?);
    Ok([
        (-di[1] + dj[0] - (kappa - 1.0)).abs(),
        (di[2] + jv).abs(),
        (dj[2] - iv).abs(),
    ])
}

pub fn pde_residuals(a: &CoframeField, i: &ScalarField, j: &ScalarField, points: &[Point3]) -> Result<Vec<f64>> {
    let vals = par_points(points, |p| pde_residuals_at(a, i, j, p))?;
    Ok(max_over(&vals))
}

/// ω = (α¹, Iα¹ + Jα² − α³, α²) after checking the directional PDE system.
pub fn cartan_to_gfs(
    a: &CoframeField,
    i: &ScalarField,
    j: &ScalarField,
    points: &[Point3],
    tolerance: f64,
) -> Result<CoframeField> {
    let residuals = pde_residuals(a, i, j, points)?;
    if !residuals.iter().all(|r| *r < tolerance) {
        return Err(Error::PdeViolation { residuals });
    }
    Ok(cartan_to_gfs_unchecked(a, i, j))
}

pub fn cartan_to_gfs_unchecked(a: &CoframeField, i: &ScalarField, j: &ScalarField) -> CoframeField {
    let w2 = OneFormField::lin_comb(&[
        (i.clone(), a.rows[0].clone()),
        (j.clone(), a.rows[1].clone()),
        (ScalarField::constant(-1.0), a.rows[2].clone()),
    ]);
    CoframeField::new(a.chart, [a.rows[0].clone(), w2, a.rows[1].clone()]).with_mode(a.mode)
}

/// ω = (α¹, φ − α³, α²) for φ with no α³-component and dφ = (𝒦 − 1)α¹∧α².
pub fn phi_construction(a: &CoframeField, phi: &OneFormField, points: &[Point3], tolerance: f64) -> Result<CoframeField> {
    let vals = par_points(points, |p| {
        let m = a.matrix(p)?;
        let kappa = cartan_point(a, p)?.kappa;
        let c = expand_in_matrix(&phi.d(p, a.mode)?, &m, p.coords)?;
        let t = expand_1form_in_matrix(&phi.eval(p)?, &m, p.coords)?;
        Ok([c[0].abs().max(c[1].abs()), (c[2] - (kappa - 1.0)).abs(), t[2].abs()])
    })?;
    let residuals = max_over(&vals);
    if !residuals.iter().all(|r| *r < tolerance) {
        return Err(Error::PhiConstraintViolation { residuals });
    }
    let w2 = OneFormField::lin_comb(&[
        (ScalarField::constant(1.0), phi.clone()),
        (ScalarField::constant(-1.0), a.rows[2].clone()),
    ]);
    Ok(CoframeField::new(a.chart, [a.rows[0].clone(), w2, a.rows[1].clone()]).with_mode(a.mode))
}

/// (vα¹, vα², α³ − *d log v) with *d log v = −(v₂/v)α¹ + (v₁/v)α².
pub fn conformal_rescale(a: &CoframeField, v: &ScalarField, points: &[Point3]) -> Result<CoframeField> {
    let min = par_points(points, |p| v.eval(p))?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::NonPositiveV { min });
    }
    let (c1, c2): (ScalarField, ScalarField) = match (a.row_exprs(), v.expr()) {
        (Some(rows), Some(ve)) => {
            let dv = symbolic_directional(&rows, ve);
            ((&dv[1] / ve).into(), (-(&dv[0] / ve)).into())
        }
        _ => {
            let (a1, v1) = (a.clone(), v.clone());
            let (a2, v2) = (a.clone(), v.clone());
            (
                ScalarField::numeric(move |p| Ok(coframe_directional_derivatives(&v1, &a1, p)?[1] / v1.eval(p)?)),
                ScalarField::numeric(move |p| Ok(-coframe_directional_derivatives(&v2, &a2, p)?[0] / v2.eval(p)?)),
            )
        }
    };
    let a3 = OneFormField::lin_comb(&[
        (ScalarField::constant(1.0), a.rows[2].clone()),
        (c1, a.rows[0].clone()),
        (c2, a.rows[1].clone()),
    ]);
    Ok(CoframeField::new(a.chart, [a.rows[0].scaled(v.clone()), a.rows[1].scaled(v.clone()), a3]).with_mode(a.mode))
}

/// 𝒦-Cartan coframe from an (I, 0, K) coframe with K > 0 and K₁ = 0:
/// α = (ω², ω³/√K, √K ω¹ + K₂/(2K√K) ω³), together with the closed-form
/// 𝒦 = K − (3/4)(1/K)((1/K)K₂² − (2/3)K₂₂).
pub fn landsberg_to_cartan(w: &CoframeField, points: &[Point3], tolerance: f64) -> Result<(CoframeField, ScalarField)> {
    let vals = par_points(points, |p| {
        let ([_, j, k], d) = gfs_invariants_with_derivatives(w, p)?;
        Ok([j.abs(), k, d[2][0].abs()])
    })?;
    let jmax = vals.iter().fold(0.0f64, |a, v| a.max(v[0]));
    let kmin = vals.iter().fold(f64::INFINITY, |a, v| a.min(v[1]));
    let k1max = vals.iter().fold(0.0f64, |a, v| a.max(v[2]));
    if !(jmax < tolerance) {
        return Err(Error::PreconditionViolation {
            condition: "J != 0".into(),
            residual: jmax,
        });
    }
    if !(kmin > 0.0) {
        return Err(Error::PreconditionViolation {
            condition: "K <= 0".into(),
            residual: kmin,
        });
    }
    if !(k1max < tolerance) {
        return Err(Error::PreconditionViolation {
            condition: "K_1 != 0".into(),
            residual: k1max,
        });
    }
    let [_, _, k] = gfs_invariant_fields(w);
    let wk = w.clone();
    let k2 = ScalarField::numeric(move |p| Ok(gfs_invariants_with_derivatives(&wk, p)?.1[2][1]));
    let inv_sqrt_k = k.map(|k| 1.0 / k.sqrt());
    let sqrt_k = k.map(f64::sqrt);
    let (kc, k2c) = (k.clone(), k2.clone());
    let c3 = ScalarField::numeric(move |p| {
        let k = kc.eval(p)?;
        Ok(k2c.eval(p)? / (2.0 * k * k.sqrt()))
    });
    let a3 = OneFormField::lin_comb(&[(sqrt_k, w.rows[0].clone()), (c3, w.rows[2].clone())]);
    let cartan = CoframeField::new(w.chart, [w.rows[1].clone(), w.rows[2].scaled(inv_sqrt_k), a3]).with_mode(w.mode);
    let wk = w.clone();
    let kappa = ScalarField::numeric(move |p| {
        let k = gfs_point(&wk, p)?.k;
        let m = wk.matrix(p)?;
        let k2 = k2.eval(p)?;
        // K₂₂ = (K₂)₂
        let jac = richardson_jacobian::<1, _>(p, wk.mode.step(), |q| Ok([k2_at(&wk, q)?]))?;
        let k22 = directional_from_matrix(&m, &jac[0], p.coords)?[1];
        Ok(k - 0.75 / k * (k2 * k2 / k - 2.0 / 3.0 * k22))
    });
    Ok((cartan, kappa))
}

fn k2_at(w: &CoframeField, p: &Point3) -> Result<f64> {
    Ok(gfs_invariants_with_derivatives(w, p)?.1[2][1])
}

/// ω = (m_{α1}α² + mα³, α¹, α²/m) after checking m_{α3} = 0,
/// m_{α11} = 1/m − m𝒦 and m_{α12} = 0.
pub fn cartan_to_landsberg(a: &CoframeField, m: &ScalarField, points: &[Point3], tolerance: f64) -> Result<CoframeField> {
    let vals = par_points(points, |p| {
        let mv = m.eval(p)?;
        if mv.abs() < 1e-12 {
            return Err(Error::ZeroM { coords: p.coords });
        }
        let kappa = cartan_point(a, p)?.kappa;
        let dm = coframe_directional_derivatives(m, a, p)?;
        let mat = a.matrix(p)?;
        let jac = richardson_jacobian::<1, _>(p, a.mode.step(), |q| Ok([coframe_directional_derivatives(m, a, q)?[0]]))?;
        let d1 = directional_from_matrix(&mat, &jac[0], p.coords)?;
        Ok([dm[2].abs(), (d1[0] - (1.0 / mv - mv * kappa)).abs(), d1[1].abs()])
    })?;
    let residuals = max_over(&vals);
    if !residuals.iter().all(|r| *r < tolerance) {
        return Err(Error::PdeViolation { residuals });
    }
    let m1: ScalarField = match (a.row_exprs(), m.expr()) {
        (Some(rows), Some(me)) => symbolic_directional(&rows, me)[0].clone().into(),
        _ => {
            let (a, m) = (a.clone(), m.clone());
            ScalarField::numeric(move |p| Ok(coframe_directional_derivatives(&m, &a, p)?[0]))
        }
    };
    let inv_m: ScalarField = match m.expr() {
        Some(me) => me.recip().into(),
        None => m.map(|v| 1.0 / v),
    };
    let w1 = OneFormField::lin_comb(&[(m1, a.rows[1].clone()), (m.clone(), a.rows[2].clone())]);
    Ok(CoframeField::new(a.chart, [w1, a.rows[0].clone(), a.rows[1].scaled(inv_m)]).with_mode(a.mode))
}
