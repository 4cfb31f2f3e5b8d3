//! Closed-form structures keyed by stable identifiers.

use std::fmt;

use serde::Serialize;

use crate::analysis::tol;
use crate::constructions::{
    cartan_to_gfs, cartan_to_landsberg, conformal_rescale, constant_curvature_zoll_gfs, curvature_normalized_gfs,
    liouville_gfs, liouville_lift, PhiForm, SurfaceChart,
};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::forms::{Chart, CoframeField, ScalarField};
use crate::groups::{binary_dihedral_8, u_probe, v_probe, w_denominator, QuatFn, QuatProbe, Quaternion, Sl2Matrix};
use crate::sampling::SafeBox;

/// Samples used to check construction preconditions while building entries.
const BUILD_SAMPLES: usize = 48;
const BUILD_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryKind {
    Cartan,
    Gfs,
}

#[derive(Debug, Clone, Default)]
pub struct Expected {
    pub i: Option<Expr>,
    pub j: Option<Expr>,
    pub k: Option<f64>,
    pub kappa: Option<Expr>,
}

#[derive(Clone)]
pub enum GroupCheck {
    Quaternion {
        group: String,
        generators: Vec<Quaternion>,
        probes: Vec<QuatProbe>,
    },
    Mobius {
        group: String,
        generators: Vec<Sl2Matrix>,
        probes: Vec<(String, Expr)>,
        domain: SafeBox,
    },
}

impl GroupCheck {
    pub fn group(&self) -> &str {
        match self {
            GroupCheck::Quaternion { group, .. } | GroupCheck::Mobius { group, .. } => group,
        }
    }
}

impl fmt::Debug for GroupCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupCheck({})", self.group())
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub chart: Chart,
    pub kind: EntryKind,
    pub coframe: CoframeField,
    pub expected: Expected,
    pub groups: Vec<GroupCheck>,
    pub safe_box: SafeBox,
    pub provenance: String,
}

impl CatalogEntry {
    pub fn is_unit_gfs(&self) -> bool {
        self.kind == EntryKind::Gfs && self.expected.k == Some(1.0)
    }
}

fn build_points(b: &SafeBox) -> Vec<crate::forms::Point3> {
    b.sample(BUILD_SAMPLES, BUILD_SEED)
}

/// a₀ = √(1 − a₁² − b₀² − b₁²) on the hemisphere chart (a₁, b₀, b₁).
pub fn su2_a0() -> Expr {
    let [a1, b0, b1] = Expr::vars();
    (1.0 - a1.powi(2) - b0.powi(2) - b1.powi(2)).sqrt()
}

/// Pulls c₀da₀ + c₁da₁ + c₂db₀ + c₃db₁ back to the chart.
fn pullback(c: [Expr; 4]) -> [Expr; 3] {
    let da0 = su2_a0().grad();
    std::array::from_fn(|k| &c[0] * &da0[k] + &c[k + 1])
}

/// Right-invariant coframe normalized so that dβ¹ = β²∧β³, dβ² = β³∧β¹,
/// dβ³ = β¹∧β². It is twice the coefficient forms of dg·g⁻¹.
pub fn su2_maurer_cartan() -> [[Expr; 3]; 3] {
    let a0 = su2_a0();
    let [a1, b0, b1] = Expr::vars();
    let two = |e: Expr| 2.0 * e;
    [
        pullback([two(-&b0), two(b1.clone()), two(a0.clone()), two(-&a1)]),
        pullback([two(-&b1), two(-&b0), two(a1.clone()), two(a0.clone())]),
        pullback([two(-&a1), two(a0.clone()), two(-&b1), two(b0.clone())]),
    ]
}

pub fn su2_standard() -> CatalogEntry {
    CatalogEntry {
        id: "su2.standard".into(),
        chart: Chart::Su2Hemisphere,
        kind: EntryKind::Cartan,
        coframe: CoframeField::symbolic(Chart::Su2Hemisphere, su2_maurer_cartan()),
        expected: Expected {
            kappa: Some(Expr::one()),
            ..Default::default()
        },
        groups: vec![],
        safe_box: SafeBox::su2(0.9),
        provenance: "right-invariant Maurer-Cartan coframe of SU(2), 1-Cartan".into(),
    }
}

/// (α¹, −α³, α²) of the standard structure, a (0,0,1) coframe.
pub fn su2_trivial_gfs() -> CatalogEntry {
    let [a1, a2, a3] = su2_maurer_cartan();
    CatalogEntry {
        id: "su2.trivial".into(),
        chart: Chart::Su2Hemisphere,
        kind: EntryKind::Gfs,
        coframe: CoframeField::symbolic(Chart::Su2Hemisphere, [a1, a3.map(|e| -e), a2]),
        expected: Expected {
            i: Some(Expr::zero()),
            j: Some(Expr::zero()),
            k: Some(1.0),
            kappa: None,
        },
        groups: vec![],
        safe_box: SafeBox::su2(0.9),
        provenance: "standard SU(2) coframe relabeled as a (0,0,1) structure".into(),
    }
}

/// Φ(u, v) = cu·u + cv·v + cv2·v².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiSpec {
    pub cu: f64,
    pub cv: f64,
    pub cv2: f64,
}

impl PhiSpec {
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.cu * u + self.cv * v + self.cv2 * v * v
    }

    pub fn expr(&self, u: &Expr, v: &Expr) -> Expr {
        self.cu * u + self.cv * v + self.cv2 * v.powi(2)
    }

    fn uses_v(&self) -> bool {
        self.cv != 0.0 || self.cv2 != 0.0
    }
}

/// u = b₀² + b₁² and v = arctan((a₀b₀ + a₁b₁)/(a₀b₁ − a₁b₀)) on the chart.
pub fn su2_uv() -> (Expr, Expr) {
    let a0 = su2_a0();
    let [a1, b0, b1] = Expr::vars();
    let u = b0.powi(2) + b1.powi(2);
    let num = &a0 * &b0 + &a1 * &b1;
    let den = &a0 * &b1 - &a1 * &b0;
    (u, (num / den).atan())
}

/// Closed-form directional derivatives (f_{α1}, f_{α2}, f_{α3}) in terms of
/// the chart partials of f.
pub fn su2_directional_closed_form(f: &Expr) -> [Expr; 3] {
    let a0 = su2_a0();
    let [a1, b0, b1] = Expr::vars();
    let [fa1, fb0, fb1] = f.grad();
    [
        0.5 * (&fa1 * &b1 - &fb1 * &a1 + &fb0 * &a0),
        0.5 * (&fb0 * &a1 - &fa1 * &b0 + &fb1 * &a0),
        0.5 * (&fa1 * &a0 - &fb0 * &b1 + &fb1 * &b0),
    ]
}

pub fn su2_f_deformed(id: &str, phi: PhiSpec) -> CatalogEntry {
    let (u, v) = su2_uv();
    let f = phi.expr(&u, &v);
    let [b1, b2, b3] = su2_maurer_cartan();
    let df = f.grad();
    let w2: [Expr; 3] = std::array::from_fn(|k| &df[k] - &b3[k]);
    let closed = su2_directional_closed_form(&f);
    let f_probe: QuatFn = std::sync::Arc::new(move |g: &Quaternion| {
        let (u, v) = (u_probe()(g), v_probe()(g));
        phi.eval(u, v)
    });
    let avoid = Some((w_denominator(), 0.05));
    let mut groups = vec![];
    if !phi.uses_v() && phi.cu != 0.0 {
        groups.push(GroupCheck::Quaternion {
            group: "C5".into(),
            generators: vec![Quaternion::cyclic_generator(5)],
            probes: vec![
                QuatProbe {
                    name: "u".into(),
                    f: u_probe(),
                    up_to_sign: false,
                    chart_only: true,
                    avoid: None,
                },
                QuatProbe {
                    name: "f".into(),
                    f: f_probe,
                    up_to_sign: false,
                    chart_only: true,
                    avoid: None,
                },
            ],
        });
    } else if phi.cv != 0.0 {
        groups.push(GroupCheck::Quaternion {
            group: "C2".into(),
            generators: vec![Quaternion::cyclic_generator(2)],
            probes: ["u", "v", "f"]
                .into_iter()
                .zip([u_probe(), v_probe(), f_probe])
                .map(|(n, f)| QuatProbe {
                    name: n.into(),
                    f,
                    up_to_sign: false,
                    chart_only: false,
                    avoid: avoid.clone(),
                })
                .collect(),
        });
    } else if phi.cv2 != 0.0 && phi.cu == 0.0 {
        let d8 = binary_dihedral_8();
        groups.push(GroupCheck::Quaternion {
            group: "D8*".into(),
            generators: vec![d8[2], d8[4]],
            probes: vec![
                QuatProbe {
                    name: "|v|".into(),
                    f: v_probe(),
                    up_to_sign: true,
                    chart_only: true,
                    avoid: avoid.clone(),
                },
                QuatProbe {
                    name: "f".into(),
                    f: f_probe,
                    up_to_sign: false,
                    chart_only: true,
                    avoid,
                },
            ],
        });
    }
    let safe_box = if phi.uses_v() {
        SafeBox::su2_away_from_singular_locus(0.9, 0.05)
    } else {
        SafeBox::su2(0.9)
    };
    CatalogEntry {
        id: id.into(),
        chart: Chart::Su2Hemisphere,
        kind: EntryKind::Gfs,
        coframe: CoframeField::symbolic(Chart::Su2Hemisphere, [b1, w2, b2]),
        expected: Expected {
            i: Some(closed[0].clone()),
            j: Some(closed[1].clone()),
            k: Some(1.0),
            kappa: None,
        },
        groups,
        safe_box,
        provenance: format!(
            "SU(2) coframe (a1, df - a3, a2) with f = {}u + {}v + {}v^2",
            phi.cu, phi.cv, phi.cv2
        ),
    }
}

fn rotation_frame() -> (Expr, Expr) {
    let t = Expr::var(2);
    (t.cos(), t.sin())
}

pub fn e2_standard() -> CatalogEntry {
    let (c, s) = rotation_frame();
    let z = Expr::zero;
    CatalogEntry {
        id: "e2.standard".into(),
        chart: Chart::E2,
        kind: EntryKind::Cartan,
        coframe: CoframeField::symbolic(
            Chart::E2,
            [[c.clone(), s.clone(), z()], [-&s, c, z()], [z(), z(), Expr::c(-1.0)]],
        ),
        expected: Expected {
            kappa: Some(Expr::zero()),
            ..Default::default()
        },
        groups: vec![],
        safe_box: SafeBox::e2(),
        provenance: "left-invariant coframe of the universal cover of E(2), 0-Cartan".into(),
    }
}

pub fn sl2_standard() -> CatalogEntry {
    let (c, s) = rotation_frame();
    let y = Expr::var(1);
    let z = Expr::zero;
    CatalogEntry {
        id: "sl2.standard".into(),
        chart: Chart::Sl2,
        kind: EntryKind::Cartan,
        coframe: CoframeField::symbolic(
            Chart::Sl2,
            [
                [&c / &y, &s / &y, z()],
                [-(&s / &y), &c / &y, z()],
                [-(y.recip()), z(), Expr::c(-1.0)],
            ],
        ),
        expected: Expected {
            kappa: Some(Expr::c(-1.0)),
            ..Default::default()
        },
        groups: vec![],
        safe_box: SafeBox::sl2(),
        provenance: "coframe on the universal cover of SL(2,R) over the half-plane, (-1)-Cartan".into(),
    }
}

fn gfs_entry(id: &str, chart: Chart, coframe: CoframeField, i: Expr, j: Expr, safe_box: SafeBox, provenance: String) -> CatalogEntry {
    CatalogEntry {
        id: id.into(),
        chart,
        kind: EntryKind::Gfs,
        coframe,
        expected: Expected {
            i: Some(i),
            j: Some(j),
            k: Some(1.0),
            kappa: None,
        },
        groups: vec![],
        safe_box,
        provenance,
    }
}

/// (I, J) = R(θ)(η, f) on the standard E(2) structure; requires η_y = f_x + 1.
pub fn e2_pde_gfs(id: &str, f: Expr, eta: Expr) -> Result<CatalogEntry> {
    let base = e2_standard();
    let (c, s) = rotation_frame();
    let i = &c * &eta + &s * &f;
    let j = -(&s * &eta) + &c * &f;
    let pts = build_points(&base.safe_box);
    let w = cartan_to_gfs(&base.coframe, &i.clone().into(), &j.clone().into(), &pts, tol::FINITE_DIFFERENCE)?;
    Ok(gfs_entry(
        id,
        Chart::E2,
        w,
        i,
        j,
        base.safe_box,
        format!("E(2) structure with rotated invariants built from eta = {eta}, f = {f}"),
    ))
}

/// Liouville construction over the flat plane with φ = f dx + g dy.
pub fn e2_torus_gfs(id: &str, f: Expr, g: Expr) -> Result<CatalogEntry> {
    let s = SurfaceChart::euclidean();
    let pts = build_points(&s.domain);
    let phi = PhiForm { f, g };
    let l = liouville_gfs(&s, &phi, &pts, tol::ANALYTIC_CARTAN)?;
    Ok(gfs_entry(
        id,
        Chart::E2,
        l.coframe,
        l.i,
        l.j,
        s.domain,
        format!("flat-plane Liouville construction with f = {}, g = {}", phi.f, phi.g),
    ))
}

/// I = (C − 2x)/y·sinθ, J = (C − 2x)/y·cosθ on the standard SL(2) structure.
pub fn sl2_pde_gfs(c0: f64) -> Result<CatalogEntry> {
    let base = sl2_standard();
    let (c, s) = rotation_frame();
    let [x, y, _] = Expr::vars();
    let h = (c0 - 2.0 * &x) / &y;
    let i = &h * &s;
    let j = &h * &c;
    let pts = build_points(&base.safe_box);
    let w = cartan_to_gfs(&base.coframe, &i.clone().into(), &j.clone().into(), &pts, tol::FINITE_DIFFERENCE)?;
    Ok(gfs_entry(
        &format!("sl2.pde:C={}", fmt_num(c0)),
        Chart::Sl2,
        w,
        i,
        j,
        base.safe_box,
        format!("SL(2) structure with I, J solving the directional system, C = {c0}"),
    ))
}

/// Half-plane Liouville construction with f = m·y + n and g = g(y).
pub fn sl2_translation_gfs(m: f64, n: f64, g: Expr) -> Result<CatalogEntry> {
    let s = SurfaceChart::hyperbolic();
    let pts = build_points(&s.domain);
    let y = Expr::var(1);
    let phi = PhiForm {
        f: m * &y + n,
        g: g.clone(),
    };
    let l = liouville_gfs(&s, &phi, &pts, tol::ANALYTIC_CARTAN)?;
    let mut e = gfs_entry(
        &format!("sl2.translation:m={},n={}", fmt_num(m), fmt_num(n)),
        Chart::Sl2,
        l.coframe,
        l.i,
        l.j,
        s.domain.clone(),
        format!("half-plane Liouville construction, translation invariant, f = {m}y + {n}, g = {g}"),
    );
    e.groups.push(GroupCheck::Mobius {
        group: "A1 translations".into(),
        generators: vec![Sl2Matrix::translation(1.0), Sl2Matrix::translation(-0.5)],
        probes: vec![("f".into(), phi.f), ("g".into(), phi.g)],
        domain: s.domain,
    });
    Ok(e)
}

/// Half-plane Liouville construction with f = 0 and g = ḡ(x/y).
pub fn sl2_dilatation_gfs(id: &str, gbar: impl Fn(&Expr) -> Expr) -> Result<CatalogEntry> {
    let s = SurfaceChart::hyperbolic();
    let pts = build_points(&s.domain);
    let [x, y, _] = Expr::vars();
    let g = gbar(&(&x / &y));
    let phi = PhiForm {
        f: Expr::zero(),
        g: g.clone(),
    };
    let l = liouville_gfs(&s, &phi, &pts, tol::ANALYTIC_CARTAN)?;
    let mut e = gfs_entry(
        id,
        Chart::Sl2,
        l.coframe,
        l.i,
        l.j,
        s.domain.clone(),
        format!("half-plane Liouville construction, dilatation invariant, g = {g}"),
    );
    e.groups.push(GroupCheck::Mobius {
        group: "A2 dilatations".into(),
        generators: vec![Sl2Matrix::dilatation(1.5), Sl2Matrix::dilatation(0.8)],
        probes: vec![("g".into(), g)],
        domain: s.domain,
    });
    Ok(e)
}

/// D = a|z₁|² + (1 − a)|z₂|² on the hemisphere chart.
pub fn lens_d(a: f64) -> Expr {
    let a0 = su2_a0();
    let [a1, b0, b1] = Expr::vars();
    a * (a0.powi(2) + a1.powi(2)) + (1.0 - a) * (b0.powi(2) + b1.powi(2))
}

/// 𝒦 = 1/(8D³) of the lens family with its true connection form.
pub fn lens_kappa(a: f64) -> Expr {
    (8.0 * lens_d(a).powi(3)).recip()
}

/// 1/(8a(1 − a)D), which differs from the curvature unless a = ½.
pub fn lens_kappa_weighted(a: f64) -> Expr {
    (8.0 * a * (1.0 - a) * lens_d(a)).recip()
}

/// Re[(1/(ai)) z̄₁dz₁ + (1/((1 − a)i)) z̄₂dz₂] = ξ₁/a + ξ₂/(1 − a).
pub fn lens_alpha3_weighted(a: f64) -> [Expr; 3] {
    let a0 = su2_a0();
    let [a1, b0, b1] = Expr::vars();
    pullback([-&a1 / a, &a0 / a, -&b1 / (1.0 - a), &b0 / (1.0 - a)])
}

/// α¹ + iα² = 4(a z₁dz₂ − (1 − a) z₂dz₁) with z₁ = a₀ + ia₁, z₂ = b₀ + ib₁,
/// and connection form η = (ξ₁ + ξ₂)/D where ξ₁ = a₀da₁ − a₁da₀,
/// ξ₂ = b₀db₁ − b₁db₀.
pub fn lens_coframe(a: f64) -> Result<[[Expr; 3]; 3]> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::OutOfRangeA { a });
    }
    let a0 = su2_a0();
    let [a1, b0, b1] = Expr::vars();
    let ca = 4.0 * a;
    let cb = 4.0 * (1.0 - a);
    // Re(z₁dz₂) = a₀db₀ − a₁db₁, Im(z₁dz₂) = a₀db₁ + a₁db₀
    // Re(z₂dz₁) = b₀da₀ − b₁da₁, Im(z₂dz₁) = b₀da₁ + b₁da₀
    let al1 = pullback([-cb * &b0, cb * &b1, ca * &a0, -ca * &a1]);
    let al2 = pullback([-cb * &b1, -cb * &b0, ca * &a1, ca * &a0]);
    let d = lens_d(a);
    let eta = pullback([-&a1 / &d, &a0 / &d, -&b1 / &d, &b0 / &d]);
    Ok([al1, al2, eta])
}

pub fn lens_family(a: f64) -> Result<CatalogEntry> {
    Ok(CatalogEntry {
        id: format!("lens:a={}", fmt_num(a)),
        chart: Chart::Lens,
        kind: EntryKind::Cartan,
        coframe: CoframeField::symbolic(Chart::Lens, lens_coframe(a)?),
        expected: Expected {
            kappa: Some(lens_kappa(a)),
            ..Default::default()
        },
        groups: vec![],
        safe_box: SafeBox::lens(0.9),
        provenance: format!("Cartan structure on S^3 from 4(a z1 dz2 - (1-a) z2 dz1), a = {a}"),
    })
}

pub fn lens_gfs(a: f64) -> Result<CatalogEntry> {
    let base = lens_family(a)?;
    let kappa = lens_kappa(a);
    let n = curvature_normalized_gfs(&base.coframe, &kappa).expect("lens coframe is symbolic");
    Ok(gfs_entry(
        &format!("lens.gfs:a={}", fmt_num(a)),
        Chart::Lens,
        n.coframe,
        n.i,
        n.j,
        base.safe_box,
        format!("(sqrt(K) a1, -a3, sqrt(K) a2) over the lens family, a = {a}"),
    ))
}

pub fn sphere_lift(k0: f64) -> Result<CatalogEntry> {
    let s = SurfaceChart::round_sphere(k0);
    let pts = build_points(&s.domain);
    let w = liouville_lift(&s, &pts, tol::ANALYTIC_CARTAN)?;
    Ok(CatalogEntry {
        id: format!("sphere.lift:K={}", fmt_num(k0)),
        chart: Chart::SurfaceChart,
        kind: EntryKind::Cartan,
        coframe: w,
        expected: Expected {
            kappa: Some(Expr::c(k0)),
            ..Default::default()
        },
        groups: vec![],
        safe_box: s.domain,
        provenance: format!("Liouville-Cartan coframe of a stereographic round-sphere chart, K = {k0}"),
    })
}

pub fn sphere_zoll(k0: f64) -> Result<CatalogEntry> {
    let base = sphere_lift(k0)?;
    let w = constant_curvature_zoll_gfs(k0, &base.coframe)?;
    Ok(gfs_entry(
        &format!("sphere.zoll:K={}", fmt_num(k0)),
        Chart::SurfaceChart,
        w,
        Expr::zero(),
        Expr::zero(),
        base.safe_box,
        format!("(sqrt(K) a1, -a3, sqrt(K) a2) over the round sphere, K = {k0}"),
    ))
}

/// (0, 0, K) coframe: Landsberg form of the standard structure rescaled by 1/√K.
pub fn su2_landsberg(k: f64) -> Result<CatalogEntry> {
    if !(k > 0.0) {
        return Err(Error::NonPositiveCurvature { k0: k });
    }
    let base = su2_standard();
    let pts = build_points(&base.safe_box);
    let v = ScalarField::constant(1.0 / k.sqrt());
    let scaled = conformal_rescale(&base.coframe, &v, &pts)?;
    let w = cartan_to_landsberg(&scaled, &v, &pts, tol::NESTED)?;
    Ok(CatalogEntry {
        id: format!("su2.landsberg:K={}", fmt_num(k)),
        chart: Chart::Su2Hemisphere,
        kind: EntryKind::Gfs,
        coframe: w,
        expected: Expected {
            i: Some(Expr::zero()),
            j: Some(Expr::zero()),
            k: Some(k),
            kappa: None,
        },
        groups: vec![],
        safe_box: base.safe_box,
        provenance: format!("(0,0,K) coframe from the rescaled standard SU(2) structure, K = {k}"),
    })
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

/// Identifiers listed by the registry, in sorted order.
pub fn ids() -> Vec<String> {
    let mut v: Vec<String> = [
        "e2.pde:f=0,g=0",
        "e2.pde:f=0,g=1",
        "e2.pde:f=1,g=0",
        "e2.pde:f=x,g=0",
        "e2.standard",
        "e2.torus:g=2x",
        "e2.torus:g=x",
        "lens.gfs:a=0.3",
        "lens.gfs:a=0.5",
        "lens:a=0.3",
        "lens:a=0.5",
        "sl2.dilatation:g=2t",
        "sl2.pde:C=0",
        "sl2.pde:C=1",
        "sl2.standard",
        "sl2.translation:m=0,n=2",
        "sl2.translation:m=1,n=2",
        "sphere.lift:K=1",
        "sphere.lift:K=4",
        "sphere.zoll:K=4",
        "su2.f:const",
        "su2.f:u",
        "su2.f:u+0.5v",
        "su2.f:v",
        "su2.f:v2",
        "su2.landsberg:K=1",
        "su2.landsberg:K=4",
        "su2.standard",
        "su2.trivial",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    v.sort();
    v
}

fn param<'a>(s: &'a str, key: &str) -> Option<&'a str> {
    s.split(',').find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

fn num(s: Option<&str>, id: &str) -> Result<f64> {
    s.and_then(|v| v.parse::<f64>().ok())
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::UnknownStructure(id.to_string()))
}

/// Resolves an identifier, including parametric families such as
/// `lens:a=<a>`, `sl2.pde:C=<c>` and `sl2.translation:m=<m>,n=<n>`.
pub fn lookup(id: &str) -> Result<CatalogEntry> {
    let unknown = || Error::UnknownStructure(id.to_string());
    let (head, params) = id.split_once(':').unwrap_or((id, ""));
    let [x, y, _] = Expr::vars();
    let su2f = |cu, cv, cv2| Ok(su2_f_deformed(id, PhiSpec { cu, cv, cv2 }));
    match (head, params) {
        ("su2.standard", "") => Ok(su2_standard()),
        ("su2.trivial", "") => Ok(su2_trivial_gfs()),
        ("su2.f", "const") => su2f(0.0, 0.0, 0.0),
        ("su2.f", "u") => su2f(1.0, 0.0, 0.0),
        ("su2.f", "v") => su2f(0.0, 1.0, 0.0),
        ("su2.f", "u+0.5v") => su2f(1.0, 0.5, 0.0),
        ("su2.f", "v2") => su2f(0.0, 0.0, 1.0),
        ("su2.landsberg", p) => su2_landsberg(num(param(p, "K"), id)?),
        ("e2.standard", "") => Ok(e2_standard()),
        ("sl2.standard", "") => Ok(sl2_standard()),
        ("e2.pde", "f=0,g=0") => e2_pde_gfs(id, Expr::zero(), y),
        ("e2.pde", "f=1,g=0") => e2_pde_gfs(id, Expr::one(), &x + &y),
        ("e2.pde", "f=0,g=1") => e2_pde_gfs(id, Expr::zero(), &y - 1.0),
        ("e2.pde", "f=x,g=0") => e2_pde_gfs(id, x, 2.0 * &y),
        ("e2.torus", "g=x") => e2_torus_gfs(id, Expr::zero(), x),
        ("e2.torus", "g=2x") => e2_torus_gfs(id, Expr::zero(), 2.0 * &x),
        ("e2.torus", "f=y,g=0") => e2_torus_gfs(id, y, Expr::zero()),
        ("sl2.pde", p) => sl2_pde_gfs(num(param(p, "C"), id)?),
        ("sl2.translation", p) => sl2_translation_gfs(num(param(p, "m"), id)?, num(param(p, "n"), id)?, Expr::zero()),
        ("sl2.dilatation", "g=2t") => sl2_dilatation_gfs(id, |t| 2.0 * t),
        ("sl2.dilatation", "g=t/2") => sl2_dilatation_gfs(id, |t| 0.5 * t),
        ("lens", p) => lens_family(num(param(p, "a"), id)?),
        ("lens.gfs", p) => lens_gfs(num(param(p, "a"), id)?),
        ("sphere.lift", p) => sphere_lift(num(param(p, "K"), id)?),
        ("sphere.zoll", p) => sphere_zoll(num(param(p, "K"), id)?),
        _ => Err(unknown()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::Point3;
    use approx::assert_abs_diff_eq;

    #[test]
    fn su2_origin_matrix() {
        let w = su2_standard().coframe;
        let m = w.matrix(&Point3::new(Chart::Su2Hemisphere, [0.0; 3]).unwrap()).unwrap();
        // twice the rows (0,1,0), (0,0,1), (1,0,0)
        assert_eq!(m, [[0.0, 2.0, 0.0], [0.0, 0.0, 2.0], [2.0, 0.0, 0.0]]);
    }

    #[test]
    fn sl2_matrix_at_reference_point() {
        let w = sl2_standard().coframe;
        let m = w.matrix(&Point3::new(Chart::Sl2, [0.0, 1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(m, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 0.0, -1.0]]);
    }

    #[test]
    fn lens_origin_curvature() {
        let p = [0.0; 3];
        // D = a at z₁ = 1, z₂ = 0
        assert_abs_diff_eq!(lens_kappa(0.3).eval(&p), 1.0 / (8.0 * 0.027), epsilon = 1e-12);
        assert_abs_diff_eq!(lens_kappa_weighted(0.3).eval(&p), 1.0 / 0.504, epsilon = 1e-12);
        assert!(matches!(lens_family(1.2), Err(Error::OutOfRangeA { .. })));
    }

    #[test]
    fn lens_half_is_standard() {
        let a = lens_coframe(0.5).unwrap();
        let b = su2_maurer_cartan();
        for p in SafeBox::su2(0.9).sample(20, 4) {
            for i in 0..3 {
                for k in 0..3 {
                    assert_abs_diff_eq!(a[i][k].eval(&p.coords), b[i][k].eval(&p.coords), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn registry_is_sorted_and_resolves() {
        let v = ids();
        let mut s = v.clone();
        s.sort();
        assert_eq!(v, s);
        for id in &v {
            let e = lookup(id).unwrap_or_else(|e| panic!("{id}: {e}"));
            assert_eq!(&e.id, id);
        }
        assert!(matches!(lookup("nosuch"), Err(Error::UnknownStructure(_))));
        assert!(matches!(lookup("lens:a=abc"), Err(Error::UnknownStructure(_))));
    }

    #[test]
    fn negative_controls() {
        assert!(matches!(lookup("e2.torus:f=y,g=0"), Err(Error::PositivityViolation { .. })));
        assert!(matches!(lookup("sl2.dilatation:g=t/2"), Err(Error::PositivityViolation { .. })));
    }
}
