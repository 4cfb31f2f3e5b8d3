//! Pointwise checkers and invariant extractors.

use std::collections::BTreeMap;

use nalgebra::{SMatrix, SVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{
    directional_from_matrix, expand_in_matrix, pair_wedges, richardson_jacobian, wedge12, CoframeField,
    DerivativeMode, OneFormField, OneFormValue, Point3, ScalarField, TwoFormValue,
};

pub mod tol {
    /// Analytic-mode residuals of Cartan structures.
    pub const ANALYTIC_CARTAN: f64 = 1e-10;
    /// Analytic-mode residuals of generalized Finsler structures.
    pub const ANALYTIC_GFS: f64 = 1e-8;
    /// First derivatives differenced at h = 1e-4.
    pub const FINITE_DIFFERENCE: f64 = 1e-6;
    /// Second derivatives obtained by nested differencing.
    pub const NESTED: f64 = 1e-5;
    /// Extracted against closed-form invariants.
    pub const INVARIANT_MATCH: f64 = 1e-6;
    /// Minimum admissible volume coefficient.
    pub const NONDEGENERACY: f64 = 1e-6;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureKind {
    Contact,
    TautCircle,
    Cartan,
    KCartan,
    Gfs,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub kind: StructureKind,
    /// Per-sample values of extracted invariants.
    pub invariants: BTreeMap<String, Vec<f64>>,
    /// Max over samples of each residual.
    pub residuals: BTreeMap<String, f64>,
    /// Min over samples of the relevant volume coefficient, when one applies.
    pub nondegeneracy: Option<f64>,
    pub samples: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl StructureReport {
    fn new(kind: StructureKind, samples: usize, tolerance: f64) -> Self {
        StructureReport {
            kind,
            invariants: BTreeMap::new(),
            residuals: BTreeMap::new(),
            nondegeneracy: None,
            samples,
            tolerance,
            pass: false,
        }
    }

    fn finish(mut self) -> Self {
        let res_ok = self.residuals.values().all(|r| *r < self.tolerance);
        let vol_ok = self.nondegeneracy.is_none_or(|m| m > tol::NONDEGENERACY);
        self.pass = res_ok && vol_ok;
        self
    }

    fn set_max(&mut self, name: &str, values: impl Iterator<Item = f64>) {
        let m = values.fold(0.0f64, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) });
        self.residuals.insert(name.to_string(), m);
    }

    pub fn residual(&self, name: &str) -> f64 {
        self.residuals[name]
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.values().fold(0.0, |a: f64, b| a.max(*b))
    }

    pub fn invariant(&self, name: &str) -> &[f64] {
        &self.invariants[name]
    }
}

pub(crate) fn par_points<T, F>(points: &[Point3], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Point3) -> Result<T> + Sync + Send,
{
    points.par_iter().map(f).collect()
}

fn min_abs(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(f64::INFINITY, |a, b| a.min(b.abs()))
}

pub fn check_contact(alpha: &OneFormField, points: &[Point3], mode: DerivativeMode) -> Result<StructureReport> {
    let vals = par_points(points, |p| {
        let a = alpha.eval(p)?;
        Ok(wedge12(&a, &alpha.d(p, mode)?).c)
    })?;
    let mut r = StructureReport::new(StructureKind::Contact, points.len(), 0.0);
    r.nondegeneracy = Some(min_abs(vals.iter().copied()));
    r.invariants.insert("alpha_wedge_dalpha".into(), vals);
    Ok(r.finish())
}

/// The four wedge pairings α^a ∧ dα^b of a pair of 1-forms.
#[derive(Debug, Clone, Copy)]
pub struct PairWedges {
    pub v11: f64,
    pub v22: f64,
    pub v12: f64,
    pub v21: f64,
}

pub fn pair_wedges_at(a1: &OneFormField, a2: &OneFormField, p: &Point3, mode: DerivativeMode) -> Result<PairWedges> {
    let (x1, x2) = (a1.eval(p)?, a2.eval(p)?);
    let (d1, d2) = (a1.d(p, mode)?, a2.d(p, mode)?);
    Ok(PairWedges {
        v11: wedge12(&x1, &d1).c,
        v22: wedge12(&x2, &d2).c,
        v12: wedge12(&x1, &d2).c,
        v21: wedge12(&x2, &d1).c,
    })
}

pub fn check_taut_contact_circle(
    a1: &OneFormField,
    a2: &OneFormField,
    points: &[Point3],
    mode: DerivativeMode,
    tolerance: f64,
) -> Result<StructureReport> {
    let w = par_points(points, |p| pair_wedges_at(a1, a2, p, mode))?;
    let mut r = StructureReport::new(StructureKind::TautCircle, points.len(), tolerance);
    r.set_max("volume_mismatch", w.iter().map(|x| (x.v11 - x.v22).abs()));
    r.set_max("mixed", w.iter().map(|x| (x.v12 + x.v21).abs()));
    r.nondegeneracy = Some(min_abs(w.iter().map(|x| x.v11)));
    Ok(r.finish())
}

pub fn check_cartan_structure(
    a1: &OneFormField,
    a2: &OneFormField,
    points: &[Point3],
    mode: DerivativeMode,
    tolerance: f64,
) -> Result<StructureReport> {
    let w = par_points(points, |p| pair_wedges_at(a1, a2, p, mode))?;
    let mut r = StructureReport::new(StructureKind::Cartan, points.len(), tolerance);
    r.set_max("a1_wedge_da2", w.iter().map(|x| x.v12.abs()));
    r.set_max("a2_wedge_da1", w.iter().map(|x| x.v21.abs()));
    r.set_max("volume_mismatch", w.iter().map(|x| (x.v11 - x.v22).abs()));
    r.nondegeneracy = Some(min_abs(w.iter().map(|x| x.v11)));
    Ok(r.finish())
}

fn cross_matrix(a: &OneFormValue) -> [[f64; 3]; 3] {
    // S(a)·x = a × x
    let a = a.c;
    [[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]]
}

/// Linear system A·η = b encoding dα¹ = α²∧η and dα² = η∧α¹.
pub fn connection_system(
    a1: &OneFormValue,
    a2: &OneFormValue,
    da1: &TwoFormValue,
    da2: &TwoFormValue,
) -> (SMatrix<f64, 6, 3>, SVector<f64, 6>) {
    let s2 = cross_matrix(a2);
    let s1 = cross_matrix(a1);
    let a = SMatrix::<f64, 6, 3>::from_fn(|i, j| if i < 3 { s2[i][j] } else { -s1[i - 3][j] });
    let b = SVector::<f64, 6>::from_fn(|i, _| if i < 3 { da1.c[i] } else { da2.c[i - 3] });
    (a, b)
}

#[derive(Debug, Clone, Copy)]
pub struct ConnectionFit {
    pub eta: OneFormValue,
    pub residual: f64,
}

/// Least-squares fit of the connection form at `p`.
pub fn connection_form(
    a1: &OneFormField,
    a2: &OneFormField,
    p: &Point3,
    mode: DerivativeMode,
    tolerance: f64,
) -> Result<ConnectionFit> {
    let (x1, x2) = (a1.eval(p)?, a2.eval(p)?);
    let (d1, d2) = (a1.d(p, mode)?, a2.d(p, mode)?);
    let (a, b) = connection_system(&x1, &x2, &d1, &d2);
    let svd = a.svd(true, true);
    let eta = svd
        .solve(&b, 1e-14)
        .map_err(|_| Error::IllConditioned { residual: f64::INFINITY, tolerance })?;
    let smin = svd.singular_values.min();
    let residual = (a * eta - b).norm();
    if residual > tolerance || smin < 1e-12 {
        return Err(Error::IllConditioned { residual, tolerance });
    }
    Ok(ConnectionFit {
        eta: OneFormValue::new([eta[0], eta[1], eta[2]]),
        residual,
    })
}

/// Connection form of a Cartan pair as a numeric 1-form field.
pub fn connection_field(a1: &OneFormField, a2: &OneFormField, mode: DerivativeMode, tolerance: f64) -> OneFormField {
    let (a1, a2) = (a1.clone(), a2.clone());
    OneFormField::numeric(move |p| Ok(connection_form(&a1, &a2, p, mode, tolerance)?.eta.c))
}

pub const CARTAN_RESIDUAL_NAMES: [&str; 4] = ["d_alpha1_structure", "d_alpha2_structure", "d_eta_23", "d_eta_31"];

#[derive(Debug, Clone, Copy)]
pub struct CartanPoint {
    pub kappa: f64,
    pub residuals: [f64; 4],
}

/// Expands dα¹, dα², dα³ in the coframe (α¹, α², α³) and reads off 𝒦.
pub fn cartan_point(w: &CoframeField, p: &Point3) -> Result<CartanPoint> {
    let m = w.matrix(p)?;
    let d = w.differentials(p)?;
    let c1 = expand_in_matrix(&d[0], &m, p.coords)?;
    let c2 = expand_in_matrix(&d[1], &m, p.coords)?;
    let c3 = expand_in_matrix(&d[2], &m, p.coords)?;
    let norm = |v: [f64; 3]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(CartanPoint {
        kappa: c3[2],
        residuals: [
            norm([c1[0] - 1.0, c1[1], c1[2]]),
            norm([c2[0], c2[1] - 1.0, c2[2]]),
            c3[0].abs(),
            c3[1].abs(),
        ],
    })
}

pub fn extract_cartan_k(
    a1: &OneFormField,
    a2: &OneFormField,
    eta: &OneFormField,
    points: &[Point3],
    mode: DerivativeMode,
    tolerance: f64,
) -> Result<StructureReport> {
    let Some(first) = points.first() else {
        return Ok(StructureReport::new(StructureKind::KCartan, 0, tolerance).finish());
    };
    let w = CoframeField::new(first.chart, [a1.clone(), a2.clone(), eta.clone()]).with_mode(mode);
    extract_cartan_k_coframe(&w, points, tolerance)
}

pub fn extract_cartan_k_coframe(w: &CoframeField, points: &[Point3], tolerance: f64) -> Result<StructureReport> {
    let vals = par_points(points, |p| cartan_point(w, p))?;
    let mut r = StructureReport::new(StructureKind::KCartan, points.len(), tolerance);
    for (i, name) in CARTAN_RESIDUAL_NAMES.iter().enumerate() {
        r.set_max(name, vals.iter().map(|v| v.residuals[i]));
    }
    r.invariants.insert("kappa".into(), vals.iter().map(|v| v.kappa).collect());
    Ok(r.finish())
}

/// 𝒦 of a coframe (α¹, α², α³) as a field.
pub fn cartan_kappa_field(w: &CoframeField) -> ScalarField {
    let w = w.clone();
    ScalarField::numeric(move |p| Ok(cartan_point(&w, p)?.kappa))
}

pub const GFS_RESIDUAL_NAMES: [&str; 7] = [
    "d_omega1_23_minus_1",
    "d_omega1_12",
    "d_omega2_23",
    "d_omega2_31_minus_1",
    "d_omega2_12",
    "d_omega3_23",
    "reconstruction",
];

#[derive(Debug, Clone, Copy)]
pub struct GfsPoint {
    pub i: f64,
    pub j: f64,
    pub k: f64,
    pub residuals: [f64; 7],
}

/// Reads I, J, K from the expansions of dω¹, dω², dω³.
///
/// In the basis (ω²∧ω³, ω³∧ω¹, ω¹∧ω²) the structure equations say
/// dω¹ = (1, I, 0), dω² = (0, 1, 0), dω³ = (0, J, K).
pub fn gfs_point(w: &CoframeField, p: &Point3) -> Result<GfsPoint> {
    let m = w.matrix(p)?;
    let d = w.differentials(p)?;
    let mut c = [[0.0; 3]; 3];
    let mut recon: f64 = 0.0;
    for i in 0..3 {
        c[i] = expand_in_matrix(&d[i], &m, p.coords)?;
        let back = crate::forms::assemble_2form(&c[i], &m);
        let scale = d[i].norm().max(1.0);
        recon = recon.max((back - d[i]).norm() / scale);
    }
    Ok(GfsPoint {
        i: c[0][1],
        j: c[2][1],
        k: c[2][2],
        residuals: [
            (c[0][0] - 1.0).abs(),
            c[0][2].abs(),
            c[1][0].abs(),
            (c[1][1] - 1.0).abs(),
            c[1][2].abs(),
            c[2][0].abs(),
            recon,
        ],
    })
}

pub fn extract_gfs_invariants(w: &CoframeField, points: &[Point3], tolerance: f64) -> Result<StructureReport> {
    let vals = par_points(points, |p| gfs_point(w, p))?;
    let mut r = StructureReport::new(StructureKind::Gfs, points.len(), tolerance);
    for (i, name) in GFS_RESIDUAL_NAMES.iter().enumerate() {
        r.set_max(name, vals.iter().map(|v| v.residuals[i]));
    }
    r.invariants.insert("I".into(), vals.iter().map(|v| v.i).collect());
    r.invariants.insert("J".into(), vals.iter().map(|v| v.j).collect());
    r.invariants.insert("K".into(), vals.iter().map(|v| v.k).collect());
    Ok(r.finish())
}

/// Extracted I, J, K as fields, re-extracted at every evaluation point.
pub fn gfs_invariant_fields(w: &CoframeField) -> [ScalarField; 3] {
    let make = |idx: usize| {
        let w = w.clone();
        ScalarField::numeric(move |p| {
            let g = gfs_point(&w, p)?;
            Ok([g.i, g.j, g.k][idx])
        })
    };
    [make(0), make(1), make(2)]
}

/// Directional derivatives of several functions at once: `out[a][i] = (f_a)_i`.
fn directional_of_vector<const N: usize, F>(w: &CoframeField, p: &Point3, f: F) -> Result<[[f64; 3]; N]>
where
    F: Fn(&Point3) -> Result<[f64; N]>,
{
    let jac = richardson_jacobian::<N, _>(p, w.mode.step(), f)?;
    let m = w.matrix(p)?;
    let mut out = [[0.0; 3]; N];
    for a in 0..N {
        out[a] = directional_from_matrix(&m, &jac[a], p.coords)?;
    }
    Ok(out)
}

/// I, J, K and their coframe derivatives at `p`; rows of the second entry are dI, dJ, dK.
pub fn gfs_invariants_with_derivatives(w: &CoframeField, p: &Point3) -> Result<([f64; 3], [[f64; 3]; 3])> {
    let g = gfs_point(w, p)?;
    let d = directional_of_vector::<3, _>(w, p, |q| {
        let g = gfs_point(w, q)?;
        Ok([g.i, g.j, g.k])
    })?;
    Ok(([g.i, g.j, g.k], d))
}

pub fn check_bianchi(w: &CoframeField, points: &[Point3], tolerance: f64) -> Result<StructureReport> {
    let vals = par_points(points, |p| {
        let ([i, j, k], d) = gfs_invariants_with_derivatives(w, p)?;
        let (i2, j2, k3) = (d[0][1], d[1][1], d[2][2]);
        Ok([(j - i2).abs(), (k3 + k * i + j2).abs()])
    })?;
    let mut r = StructureReport::new(StructureKind::Gfs, points.len(), tolerance);
    r.set_max("j_minus_i2", vals.iter().map(|v| v[0]));
    r.set_max("k3_plus_ki_plus_j2", vals.iter().map(|v| v[1]));
    Ok(r.finish())
}

/// Residuals of the three commutation identities for second coframe derivatives
/// f_ij = (f_i)_j.
pub fn ricci_point(f: &ScalarField, w: &CoframeField, p: &Point3) -> Result<[f64; 3]> {
    let first = |q: &Point3| -> Result<[f64; 3]> {
        let g = f.grad(q, w.mode)?;
        directional_from_matrix(&w.matrix(q)?, &g, q.coords)
    };
    let fi = first(p)?;
    let fij = directional_of_vector::<3, _>(w, p, first)?;
    let g = gfs_point(w, p)?;
    Ok([
        (fij[1][0] - fij[0][1] + g.k * fi[2]).abs(),
        (fij[2][1] - fij[1][2] + fi[0]).abs(),
        (fij[2][0] - fij[0][2] - (g.i * fi[0] + fi[1] + g.j * fi[2])).abs(),
    ])
}

pub fn check_ricci(f: &ScalarField, w: &CoframeField, points: &[Point3], tolerance: f64) -> Result<StructureReport> {
    let vals = par_points(points, |p| ricci_point(f, w, p))?;
    let mut r = StructureReport::new(StructureKind::Gfs, points.len(), tolerance);
    r.set_max("f21_minus_f12_plus_kf3", vals.iter().map(|v| v[0]));
    r.set_max("f32_minus_f23_plus_f1", vals.iter().map(|v| v[1]));
    r.set_max("f31_minus_f13_minus_rhs", vals.iter().map(|v| v[2]));
    Ok(r.finish())
}

/// Volume coefficient ω¹∧ω²∧ω³ at `p`.
pub fn volume(w: &CoframeField, p: &Point3) -> Result<f64> {
    let m = w.matrix(p)?;
    Ok(wedge12(&OneFormValue::new(m[0]), &pair_wedges(&m)[0]).c)
}
