//! Verification campaigns over catalog entries and their JSON reports.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::analysis::{
    cartan_point, check_bianchi, check_cartan_structure, check_taut_contact_circle, connection_form,
    extract_cartan_k_coframe, extract_gfs_invariants, gfs_point, par_points, tol, StructureReport,
};
use crate::catalog::{lookup, CatalogEntry, EntryKind, GroupCheck};
use crate::error::Result;
use crate::forms::{DerivativeMode, Point3, DEFAULT_STEP};
use crate::groups::{invariance_check, surface_invariance_check};

/// Tolerance for exact group invariance of closed-form probes.
pub const INVARIANCE: f64 = 1e-10;
/// Threshold on max|I| separating I ≡ 0 from I ≢ 0.
pub const VANISHING_I: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Analytic,
    Fd,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub id: String,
    pub samples: usize,
    pub step: f64,
    pub tol: Option<f64>,
    pub seed: u64,
    pub mode: ModeArg,
}

impl VerifyConfig {
    pub fn new(id: &str) -> Self {
        VerifyConfig {
            id: id.to_string(),
            samples: 200,
            step: DEFAULT_STEP,
            tol: None,
            seed: 0,
            mode: ModeArg::Analytic,
        }
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        match self.mode {
            ModeArg::Analytic => DerivativeMode::Analytic,
            ModeArg::Fd => DerivativeMode::FiniteDifference { step: self.step },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    /// Passes when residual < tolerance.
    Upper,
    /// Passes when residual > tolerance.
    Lower,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    pub fn upper(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            residual,
            tolerance,
            bound: Bound::Upper,
            pass: residual < tolerance,
            error: None,
        }
    }

    pub fn lower(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            residual,
            tolerance,
            bound: Bound::Lower,
            pass: residual > tolerance,
            error: None,
        }
    }

    pub fn failed(name: impl Into<String>, tolerance: f64, err: &crate::error::Error) -> Self {
        Check {
            name: name.into(),
            residual: f64::NAN,
            tolerance,
            bound: Bound::Upper,
            pass: false,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    pub fn of(v: &[f64]) -> Self {
        let n = v.len().max(1) as f64;
        Summary {
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: v.iter().sum::<f64>() / n,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub id: String,
    pub kind: EntryKind,
    pub seed: u64,
    pub samples: usize,
    pub mode: ModeArg,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub invariant_summaries: BTreeMap<String, Summary>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Builder {
    checks: Vec<Check>,
    summaries: BTreeMap<String, Summary>,
    tol_override: Option<f64>,
}

impl Builder {
    fn tol(&self, default: f64) -> f64 {
        self.tol_override.unwrap_or(default)
    }

    fn upper(&mut self, name: &str, residual: f64, default: f64) {
        let t = self.tol(default);
        self.checks.push(Check::upper(name, residual, t));
    }

    fn report(&mut self, prefix: &str, r: Result<StructureReport>) -> Option<StructureReport> {
        match r {
            Ok(r) => {
                for (k, v) in &r.residuals {
                    self.checks.push(Check::upper(format!("{prefix}.{k}"), *v, r.tolerance));
                }
                if let Some(m) = r.nondegeneracy {
                    self.checks.push(Check::lower(format!("{prefix}.nondegeneracy"), m, tol::NONDEGENERACY));
                }
                Some(r)
            }
            Err(e) => {
                self.checks.push(Check::failed(prefix, self.tol(0.0), &e));
                None
            }
        }
    }

    fn summarize(&mut self, r: &StructureReport) {
        for (k, v) in &r.invariants {
            self.summaries.insert(k.clone(), Summary::of(v));
        }
    }
}

fn max_abs_diff(a: &[f64], b: impl Iterator<Item = f64>) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| {
        let d = (x - y).abs();
        if d.is_nan() {
            f64::NAN
        } else {
            m.max(d)
        }
    })
}

/// Default structural tolerance for a coframe in the given mode.
pub fn structure_tolerance(entry: &CatalogEntry, mode: DerivativeMode) -> f64 {
    match (entry.kind, mode.is_analytic() && entry.coframe.is_symbolic()) {
        (EntryKind::Cartan, true) => tol::ANALYTIC_CARTAN,
        (EntryKind::Gfs, true) => tol::ANALYTIC_GFS,
        _ => tol::FINITE_DIFFERENCE,
    }
}

fn verify_cartan(b: &mut Builder, e: &CatalogEntry, pts: &[Point3], mode: DerivativeMode) {
    let w = e.coframe.clone().with_mode(mode);
    let t = b.tol(structure_tolerance(e, mode));
    let [a1, a2, eta] = w.rows.clone();
    b.report("cartan", check_cartan_structure(&a1, &a2, pts, mode, t));
    let fits = par_points(pts, |p| {
        let fit = connection_form(&a1, &a2, p, mode, f64::INFINITY)?;
        let eta_p = eta.eval(p)?;
        Ok((fit.residual, (fit.eta - eta_p).norm()))
    });
    match fits {
        Ok(v) => {
            b.upper("connection.least_squares", v.iter().fold(0.0, |m, x| m.max(x.0)), t);
            b.upper("connection.matches_third_row", v.iter().fold(0.0, |m, x| m.max(x.1)), t);
        }
        Err(err) => b.checks.push(Check::failed("connection", t, &err)),
    }
    let k = b.report("k_cartan", extract_cartan_k_coframe(&w, pts, t));
    if let (Some(k), Some(expected)) = (k, &e.expected.kappa) {
        let d = max_abs_diff(k.invariant("kappa"), pts.iter().map(|p| expected.eval(&p.coords)));
        b.upper("kappa.closed_form", d, t);
        b.summarize(&k);
    }
}

fn verify_gfs(b: &mut Builder, e: &CatalogEntry, pts: &[Point3], mode: DerivativeMode) {
    let w = e.coframe.clone().with_mode(mode);
    let t = b.tol(structure_tolerance(e, mode));
    let Some(g) = b.report("gfs", extract_gfs_invariants(&w, pts, t)) else {
        return;
    };
    b.summarize(&g);
    if let Some(k) = e.expected.k {
        let d = max_abs_diff(g.invariant("K"), std::iter::repeat(k));
        b.upper("K.expected", d, tol::INVARIANT_MATCH);
    }
    for (name, ex) in [("I", &e.expected.i), ("J", &e.expected.j)] {
        if let Some(ex) = ex {
            let d = max_abs_diff(g.invariant(name), pts.iter().map(|p| ex.eval(&p.coords)));
            b.upper(&format!("{name}.closed_form"), d, tol::INVARIANT_MATCH);
        }
    }
    let nested = b.tol(tol::NESTED);
    b.report("bianchi", check_bianchi(&w, pts, nested));

    let [w1, w2, w3] = w.rows.clone();
    let unit_k = e.expected.k == Some(1.0);
    match check_taut_contact_circle(&w1, &w3, pts, mode, t) {
        Ok(r) if unit_k => {
            b.report("taut_w1_w3", Ok(r));
        }
        Ok(r) => {
            // K ≢ 1 forces the volume forms of ω¹ and ω³ apart.
            b.checks
                .push(Check::lower("taut_w1_w3.volume_mismatch_detects_k", r.residual("volume_mismatch"), 1e-3));
        }
        Err(err) => b.checks.push(Check::failed("taut_w1_w3", t, &err)),
    }
    match check_taut_contact_circle(&w1, &w2, pts, mode, t) {
        Ok(r) => {
            let max_i = g.invariant("I").iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let i_vanishes = max_i < VANISHING_I;
            let agree = r.pass == i_vanishes;
            b.checks.push(Check {
                name: "taut_w1_w2.iff_i_vanishes".into(),
                residual: r.residual("mixed"),
                tolerance: t,
                bound: if i_vanishes { Bound::Upper } else { Bound::Lower },
                pass: agree,
                error: None,
            });
        }
        Err(err) => b.checks.push(Check::failed("taut_w1_w2", t, &err)),
    }
}

fn verify_groups(b: &mut Builder, e: &CatalogEntry, samples: usize, seed: u64) {
    for gc in &e.groups {
        match gc {
            GroupCheck::Quaternion { group, generators, probes } => {
                for p in probes {
                    let name = format!("invariance.{group}.{}", p.name);
                    match invariance_check(p, generators, samples, seed) {
                        Ok(r) => b.checks.push(Check::upper(name, r.max_deviation, INVARIANCE)),
                        Err(err) => b.checks.push(Check::failed(name, INVARIANCE, &err)),
                    }
                }
            }
            GroupCheck::Mobius {
                group,
                generators,
                probes,
                domain,
            } => {
                for (pname, f) in probes {
                    let name = format!("invariance.{group}.{pname}");
                    match surface_invariance_check(pname, f, generators, domain, samples, seed) {
                        Ok(r) => b.checks.push(Check::upper(name, r.max_deviation, INVARIANCE)),
                        Err(err) => b.checks.push(Check::failed(name, INVARIANCE, &err)),
                    }
                }
            }
        }
    }
}

/// Runs the full check suite for one entry.
pub fn verify_entry(e: &CatalogEntry, cfg: &VerifyConfig) -> VerifyReport {
    let mode = cfg.derivative_mode();
    let pts = e.safe_box.sample(cfg.samples, cfg.seed);
    let mut b = Builder {
        checks: vec![],
        summaries: BTreeMap::new(),
        tol_override: cfg.tol,
    };
    match e.kind {
        EntryKind::Cartan => verify_cartan(&mut b, e, &pts, mode),
        EntryKind::Gfs => verify_gfs(&mut b, e, &pts, mode),
    }
    verify_groups(&mut b, e, cfg.samples, cfg.seed);
    VerifyReport {
        id: e.id.clone(),
        kind: e.kind,
        seed: cfg.seed,
        samples: cfg.samples,
        mode: cfg.mode,
        pass: b.checks.iter().all(|c| c.pass),
        checks: b.checks,
        invariant_summaries: b.summaries,
    }
}

/// Resolves `cfg.id` and verifies it; unknown identifiers are errors.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    Ok(verify_entry(&lookup(&cfg.id)?, cfg))
}

#[derive(Debug, Clone, Serialize)]
pub struct PointValue {
    pub name: String,
    pub extracted: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub difference: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointInvariants {
    pub id: String,
    pub coords: [f64; 3],
    pub values: Vec<PointValue>,
}

/// Extracted invariants at one point next to their closed forms.
pub fn invariants_at(id: &str, coords: [f64; 3], mode: DerivativeMode) -> Result<PointInvariants> {
    let e = lookup(id)?;
    let p = Point3::new(e.chart, coords)?;
    let w = e.coframe.clone().with_mode(mode);
    let value = |name: &str, x: f64, c: Option<f64>| PointValue {
        name: name.into(),
        extracted: x,
        closed_form: c,
        difference: c.map(|c| x - c),
    };
    let values = match e.kind {
        EntryKind::Cartan => {
            let k = cartan_point(&w, &p)?.kappa;
            vec![value("kappa", k, e.expected.kappa.as_ref().map(|x| x.eval(&coords)))]
        }
        EntryKind::Gfs => {
            let g = gfs_point(&w, &p)?;
            let ex = &e.expected;
            vec![
                value("I", g.i, ex.i.as_ref().map(|x| x.eval(&coords))),
                value("J", g.j, ex.j.as_ref().map(|x| x.eval(&coords))),
                value("K", g.k, ex.k),
            ]
        }
    };
    Ok(PointInvariants { id: e.id, coords, values })
}
