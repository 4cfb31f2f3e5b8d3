//! Pointwise exterior algebra on three-dimensional charts.
//!
//! 2-forms use the basis (dx²∧dx³, dx³∧dx¹, dx¹∧dx²), so `wedge11` is the
//! cross product and `wedge12` the dot product.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{solve_transpose3, Expr, Tape};

pub const DEFAULT_STEP: f64 = 1e-4;
pub const SINGULAR_DET: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    /// (a₁, b₀, b₁) with a₀ = √(1 − a₁² − b₀² − b₁²) > 0.
    Su2Hemisphere,
    /// (x, y, θ).
    E2,
    /// (x, y, θ) with y > 0.
    Sl2,
    /// (x, y, θ) over a surface chart.
    SurfaceChart,
    /// Same coordinates as the hemisphere chart.
    Lens,
}

impl Chart {
    pub fn admissible(&self, x: &[f64; 3]) -> bool {
        if !x.iter().all(|v| v.is_finite()) {
            return false;
        }
        match self {
            Chart::Su2Hemisphere | Chart::Lens => x[0] * x[0] + x[1] * x[1] + x[2] * x[2] < 1.0,
            Chart::Sl2 => x[1] > 0.0,
            Chart::E2 | Chart::SurfaceChart => true,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Chart::Su2Hemisphere => "su2-hemisphere",
            Chart::E2 => "e2",
            Chart::Sl2 => "sl2",
            Chart::SurfaceChart => "surface-chart",
            Chart::Lens => "lens",
        }
    }

    pub fn coordinate_names(&self) -> [&'static str; 3] {
        match self {
            Chart::Su2Hemisphere | Chart::Lens => ["a1", "b0", "b1"],
            _ => ["x", "y", "theta"],
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub chart: Chart,
    pub coords: [f64; 3],
}

impl Point3 {
    pub fn new(chart: Chart, coords: [f64; 3]) -> Result<Self> {
        if chart.admissible(&coords) {
            Ok(Point3 { chart, coords })
        } else {
            Err(Error::PointOutOfChart { coords })
        }
    }

    /// Moves to another point of the same chart without checking admissibility.
    pub fn with_coords(&self, coords: [f64; 3]) -> Self {
        Point3 {
            chart: self.chart,
            coords,
        }
    }
}

macro_rules! vec_value {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
        pub struct $name {
            pub c: [f64; 3],
        }

        impl $name {
            pub const ZERO: Self = Self { c: [0.0; 3] };

            pub fn new(c: [f64; 3]) -> Self {
                Self { c }
            }

            pub fn norm(&self) -> f64 {
                self.c.iter().map(|v| v * v).sum::<f64>().sqrt()
            }

            pub fn is_finite(&self) -> bool {
                self.c.iter().all(|v| v.is_finite())
            }
        }

        impl Add for $name {
            type Output = Self;
            fn add(self, o: Self) -> Self {
                Self::new(std::array::from_fn(|i| self.c[i] + o.c[i]))
            }
        }

        impl Sub for $name {
            type Output = Self;
            fn sub(self, o: Self) -> Self {
                Self::new(std::array::from_fn(|i| self.c[i] - o.c[i]))
            }
        }

        impl Neg for $name {
            type Output = Self;
            fn neg(self) -> Self {
                Self::new(self.c.map(|v| -v))
            }
        }

        impl Mul<$name> for f64 {
            type Output = $name;
            fn mul(self, o: $name) -> $name {
                $name::new(o.c.map(|v| self * v))
            }
        }
    };
}

vec_value!(OneFormValue);
vec_value!(TwoFormValue);

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ThreeFormValue {
    pub c: f64,
}

pub fn wedge11(a: &OneFormValue, b: &OneFormValue) -> TwoFormValue {
    let (a, b) = (a.c, b.c);
    TwoFormValue::new([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}

pub fn wedge12(a: &OneFormValue, b: &TwoFormValue) -> ThreeFormValue {
    ThreeFormValue {
        c: a.c[0] * b.c[0] + a.c[1] * b.c[1] + a.c[2] * b.c[2],
    }
}

/// Curl of a coordinate Jacobian `jac[i][k] = ∂c_i/∂x^k`.
pub fn curl(jac: &[[f64; 3]; 3]) -> TwoFormValue {
    TwoFormValue::new([
        jac[2][1] - jac[1][2],
        jac[0][2] - jac[2][0],
        jac[1][0] - jac[0][1],
    ])
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub enum DerivativeMode {
    #[default]
    Analytic,
    FiniteDifference { step: f64 },
}

impl DerivativeMode {
    pub fn fd() -> Self {
        DerivativeMode::FiniteDifference { step: DEFAULT_STEP }
    }

    /// Step used whenever a derivative has to be differenced.
    pub fn step(&self) -> f64 {
        match self {
            DerivativeMode::Analytic => DEFAULT_STEP,
            DerivativeMode::FiniteDifference { step } => *step,
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, DerivativeMode::Analytic)
    }
}

/// Central differences at steps h and h/2 combined by one Richardson step.
///
/// Returns `out[i][k] = ∂f_i/∂x^k`.
pub fn richardson_jacobian<const N: usize, F>(p: &Point3, h: f64, f: F) -> Result<[[f64; 3]; N]>
where
    F: Fn(&Point3) -> Result<[f64; N]>,
{
    let mut out = [[0.0; 3]; N];
    for k in 0..3 {
        let eval_at = |delta: f64| -> Result<[f64; N]> {
            let mut x = p.coords;
            x[k] += delta;
            if !p.chart.admissible(&x) {
                return Err(Error::StepOutOfChart { coords: x });
            }
            f(&p.with_coords(x))
        };
        let (fp, fm) = (eval_at(h)?, eval_at(-h)?);
        let (fph, fmh) = (eval_at(0.5 * h)?, eval_at(-0.5 * h)?);
        for i in 0..N {
            let d1 = (fp[i] - fm[i]) / (2.0 * h);
            let d2 = (fph[i] - fmh[i]) / h;
            out[i][k] = (4.0 * d2 - d1) / 3.0;
        }
    }
    Ok(out)
}

fn check_finite(p: &Point3, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteValue { coords: p.coords })
    }
}

type NumericScalar = dyn Fn(&Point3) -> Result<f64> + Send + Sync;
type NumericOneForm = dyn Fn(&Point3) -> Result<[f64; 3]> + Send + Sync;

enum ScalarRepr {
    Symbolic {
        expr: Expr,
        grad: [Expr; 3],
        // value followed by the three partials
        tape: Tape,
    },
    Numeric(Box<NumericScalar>),
}

/// Scalar function on a chart. Symbolic fields carry exact gradients.
#[derive(Clone)]
pub struct ScalarField(Arc<ScalarRepr>);

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            ScalarRepr::Symbolic { expr, .. } => write!(f, "ScalarField({expr})"),
            ScalarRepr::Numeric(_) => f.write_str("ScalarField(<numeric>)"),
        }
    }
}

impl ScalarField {
    pub fn symbolic(expr: Expr) -> Self {
        let grad = expr.grad();
        let tape = Tape::compile(&[expr.clone(), grad[0].clone(), grad[1].clone(), grad[2].clone()]);
        ScalarField(Arc::new(ScalarRepr::Symbolic { expr, grad, tape }))
    }

    pub fn constant(v: f64) -> Self {
        Self::symbolic(Expr::c(v))
    }

    pub fn numeric<F>(f: F) -> Self
    where
        F: Fn(&Point3) -> Result<f64> + Send + Sync + 'static,
    {
        ScalarField(Arc::new(ScalarRepr::Numeric(Box::new(f))))
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &*self.0 {
            ScalarRepr::Symbolic { expr, .. } => Some(expr),
            ScalarRepr::Numeric(_) => None,
        }
    }

    pub fn grad_exprs(&self) -> Option<&[Expr; 3]> {
        match &*self.0 {
            ScalarRepr::Symbolic { grad, .. } => Some(grad),
            ScalarRepr::Numeric(_) => None,
        }
    }

    pub fn eval(&self, p: &Point3) -> Result<f64> {
        let v = match &*self.0 {
            ScalarRepr::Symbolic { tape, .. } => {
                let mut out = [0.0; 4];
                tape.eval_into(&p.coords, &mut out);
                out[0]
            }
            ScalarRepr::Numeric(f) => f(p)?,
        };
        check_finite(p, &[v])?;
        Ok(v)
    }

    /// Coordinate gradient: exact for symbolic fields in analytic mode,
    /// Richardson-extrapolated central differences otherwise.
    pub fn grad(&self, p: &Point3, mode: DerivativeMode) -> Result<[f64; 3]> {
        let g = match (&*self.0, mode) {
            (ScalarRepr::Symbolic { tape, .. }, DerivativeMode::Analytic) => {
                let mut out = [0.0; 4];
                tape.eval_into(&p.coords, &mut out);
                [out[1], out[2], out[3]]
            }
            _ => {
                let j = richardson_jacobian::<1, _>(p, mode.step(), |q| Ok([self.eval(q)?]))?;
                j[0]
            }
        };
        check_finite(p, &g)?;
        Ok(g)
    }

    pub fn map<F>(&self, f: F) -> ScalarField
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let s = self.clone();
        ScalarField::numeric(move |p| Ok(f(s.eval(p)?)))
    }
}

impl From<Expr> for ScalarField {
    fn from(e: Expr) -> Self {
        ScalarField::symbolic(e)
    }
}

impl From<f64> for ScalarField {
    fn from(v: f64) -> Self {
        ScalarField::constant(v)
    }
}

enum OneFormRepr {
    Symbolic {
        c: [Expr; 3],
        // three components followed by the row-major Jacobian
        tape: Tape,
    },
    Numeric(Box<NumericOneForm>),
}

/// A 1-form field given by its coordinate components.
#[derive(Clone)]
pub struct OneFormField(Arc<OneFormRepr>);

impl fmt::Debug for OneFormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            OneFormRepr::Symbolic { c, .. } => write!(f, "OneFormField({}, {}, {})", c[0], c[1], c[2]),
            OneFormRepr::Numeric(_) => f.write_str("OneFormField(<numeric>)"),
        }
    }
}

impl OneFormField {
    pub fn symbolic(c: [Expr; 3]) -> Self {
        let mut outs: Vec<Expr> = c.to_vec();
        for ci in &c {
            outs.extend(ci.grad());
        }
        let tape = Tape::compile(&outs);
        OneFormField(Arc::new(OneFormRepr::Symbolic { c, tape }))
    }

    pub fn numeric<F>(f: F) -> Self
    where
        F: Fn(&Point3) -> Result<[f64; 3]> + Send + Sync + 'static,
    {
        OneFormField(Arc::new(OneFormRepr::Numeric(Box::new(f))))
    }

    /// dx^k.
    pub fn coordinate(k: usize) -> Self {
        let mut c = [Expr::zero(), Expr::zero(), Expr::zero()];
        c[k] = Expr::one();
        Self::symbolic(c)
    }

    /// Exact form df of a symbolic function.
    pub fn exact(f: &Expr) -> Self {
        Self::symbolic(f.grad())
    }

    pub fn components(&self) -> Option<&[Expr; 3]> {
        match &*self.0 {
            OneFormRepr::Symbolic { c, .. } => Some(c),
            OneFormRepr::Numeric(_) => None,
        }
    }

    pub fn eval(&self, p: &Point3) -> Result<OneFormValue> {
        let v = match &*self.0 {
            OneFormRepr::Symbolic { tape, .. } => {
                let mut out = [0.0; 12];
                tape.eval_into(&p.coords, &mut out);
                [out[0], out[1], out[2]]
            }
            OneFormRepr::Numeric(f) => f(p)?,
        };
        check_finite(p, &v)?;
        Ok(OneFormValue::new(v))
    }

    /// `jac[i][k] = ∂c_i/∂x^k`.
    pub fn jacobian(&self, p: &Point3, mode: DerivativeMode) -> Result<[[f64; 3]; 3]> {
        let j = match (&*self.0, mode) {
            (OneFormRepr::Symbolic { tape, .. }, DerivativeMode::Analytic) => {
                let mut out = [0.0; 12];
                tape.eval_into(&p.coords, &mut out);
                std::array::from_fn(|i| std::array::from_fn(|k| out[3 + 3 * i + k]))
            }
            _ => richardson_jacobian::<3, _>(p, mode.step(), |q| Ok(self.eval(q)?.c))?,
        };
        check_finite(p, j.as_flattened())?;
        Ok(j)
    }

    pub fn d(&self, p: &Point3, mode: DerivativeMode) -> Result<TwoFormValue> {
        Ok(curl(&self.jacobian(p, mode)?))
    }

    /// Σ fᵢ·θᵢ; stays symbolic when every input is symbolic.
    pub fn lin_comb(terms: &[(ScalarField, OneFormField)]) -> OneFormField {
        let symbolic: Option<Vec<(Expr, [Expr; 3])>> = terms
            .iter()
            .map(|(f, w)| Some((f.expr()?.clone(), w.components()?.clone())))
            .collect();
        if let Some(sym) = symbolic {
            let c = std::array::from_fn(|k| {
                sym.iter()
                    .fold(Expr::zero(), |acc, (f, w)| acc + f * &w[k])
            });
            return OneFormField::symbolic(c);
        }
        let terms = terms.to_vec();
        OneFormField::numeric(move |p| {
            let mut acc = [0.0; 3];
            for (f, w) in &terms {
                let fv = f.eval(p)?;
                let wv = w.eval(p)?;
                for (a, c) in acc.iter_mut().zip(wv.c) {
                    *a += fv * c;
                }
            }
            Ok(acc)
        })
    }

    pub fn scaled(&self, f: impl Into<ScalarField>) -> OneFormField {
        Self::lin_comb(&[(f.into(), self.clone())])
    }
}

/// Three 1-forms evaluated as a matrix with rows = forms.
#[derive(Clone, Debug)]
pub struct CoframeField {
    pub chart: Chart,
    pub rows: [OneFormField; 3],
    pub mode: DerivativeMode,
}

impl CoframeField {
    pub fn new(chart: Chart, rows: [OneFormField; 3]) -> Self {
        CoframeField {
            chart,
            rows,
            mode: DerivativeMode::Analytic,
        }
    }

    pub fn symbolic(chart: Chart, m: [[Expr; 3]; 3]) -> Self {
        let [r0, r1, r2] = m;
        Self::new(
            chart,
            [
                OneFormField::symbolic(r0),
                OneFormField::symbolic(r1),
                OneFormField::symbolic(r2),
            ],
        )
    }

    /// Coordinate coframe (dx¹, dx², dx³).
    pub fn identity(chart: Chart) -> Self {
        Self::new(
            chart,
            [
                OneFormField::coordinate(0),
                OneFormField::coordinate(1),
                OneFormField::coordinate(2),
            ],
        )
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn row_exprs(&self) -> Option<[[Expr; 3]; 3]> {
        Some([
            self.rows[0].components()?.clone(),
            self.rows[1].components()?.clone(),
            self.rows[2].components()?.clone(),
        ])
    }

    pub fn is_symbolic(&self) -> bool {
        self.rows.iter().all(|r| r.components().is_some())
    }

    pub fn forms(&self, p: &Point3) -> Result<[OneFormValue; 3]> {
        Ok([
            self.rows[0].eval(p)?,
            self.rows[1].eval(p)?,
            self.rows[2].eval(p)?,
        ])
    }

    pub fn matrix(&self, p: &Point3) -> Result<[[f64; 3]; 3]> {
        Ok(self.forms(p)?.map(|f| f.c))
    }

    pub fn differentials(&self, p: &Point3) -> Result<[TwoFormValue; 3]> {
        Ok([
            self.rows[0].d(p, self.mode)?,
            self.rows[1].d(p, self.mode)?,
            self.rows[2].d(p, self.mode)?,
        ])
    }

    pub fn det(&self, p: &Point3) -> Result<f64> {
        Ok(det3(&self.matrix(p)?))
    }

    /// Sanity check of the Jacobian: analytic against differenced, max abs error.
    pub fn jacobian_discrepancy(&self, p: &Point3, step: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for r in &self.rows {
            let a = r.jacobian(p, DerivativeMode::Analytic)?;
            let f = r.jacobian(p, DerivativeMode::FiniteDifference { step })?;
            for i in 0..3 {
                for k in 0..3 {
                    let scale = a[i][k].abs().max(1.0);
                    worst = worst.max((a[i][k] - f[i][k]).abs() / scale);
                }
            }
        }
        Ok(worst)
    }
}

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn to_na(m: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j])
}

pub fn d_scalar(f: &ScalarField, p: &Point3, mode: DerivativeMode) -> Result<OneFormValue> {
    Ok(OneFormValue::new(f.grad(p, mode)?))
}

pub fn d_oneform(field: &OneFormField, p: &Point3, mode: DerivativeMode) -> Result<TwoFormValue> {
    field.d(p, mode)
}

/// Solves Mᵀ·(f₁,f₂,f₃) = ∇f.
pub fn directional_from_matrix(m: &[[f64; 3]; 3], grad: &[f64; 3], coords: [f64; 3]) -> Result<[f64; 3]> {
    let det = det3(m);
    if det.abs() < SINGULAR_DET {
        return Err(Error::SingularCoframe { coords, det });
    }
    let sol = to_na(m)
        .transpose()
        .lu()
        .solve(&Vector3::from_row_slice(grad))
        .ok_or(Error::SingularCoframe { coords, det })?;
    Ok([sol[0], sol[1], sol[2]])
}

pub fn coframe_directional_derivatives(f: &ScalarField, w: &CoframeField, p: &Point3) -> Result<[f64; 3]> {
    let g = f.grad(p, w.mode)?;
    let m = w.matrix(p)?;
    directional_from_matrix(&m, &g, p.coords)
}

/// Basis 2-forms (ω²∧ω³, ω³∧ω¹, ω¹∧ω²) for coframe rows `m`.
pub fn pair_wedges(m: &[[f64; 3]; 3]) -> [TwoFormValue; 3] {
    let w: [OneFormValue; 3] = m.map(OneFormValue::new);
    [wedge11(&w[1], &w[2]), wedge11(&w[2], &w[0]), wedge11(&w[0], &w[1])]
}

/// Coefficients of `b` in the basis from `pair_wedges(m)`.
pub fn expand_in_matrix(b: &TwoFormValue, m: &[[f64; 3]; 3], coords: [f64; 3]) -> Result<[f64; 3]> {
    let det = det3(m);
    if det.abs() < SINGULAR_DET {
        return Err(Error::SingularCoframe { coords, det });
    }
    let pw = pair_wedges(m);
    let p = Matrix3::from_fn(|i, j| pw[j].c[i]);
    let sol = p
        .lu()
        .solve(&Vector3::from_row_slice(&b.c))
        .ok_or(Error::SingularCoframe { coords, det })?;
    Ok([sol[0], sol[1], sol[2]])
}

/// Inverse of `expand_in_matrix`.
pub fn assemble_2form(c: &[f64; 3], m: &[[f64; 3]; 3]) -> TwoFormValue {
    let pw = pair_wedges(m);
    c[0] * pw[0] + c[1] * pw[1] + c[2] * pw[2]
}

pub fn expand_2form_in_coframe(b: &TwoFormValue, w: &CoframeField, p: &Point3) -> Result<[f64; 3]> {
    expand_in_matrix(b, &w.matrix(p)?, p.coords)
}

/// Components of a 1-form in the coframe basis: θ = Σ tᵢ ωⁱ.
pub fn expand_1form_in_matrix(theta: &OneFormValue, m: &[[f64; 3]; 3], coords: [f64; 3]) -> Result<[f64; 3]> {
    directional_from_matrix(m, &theta.c, coords)
}

/// Symbolic directional derivatives of `f` with respect to coframe rows `m`.
pub fn symbolic_directional(m: &[[Expr; 3]; 3], f: &Expr) -> [Expr; 3] {
    solve_transpose3(m, &f.grad())
}
