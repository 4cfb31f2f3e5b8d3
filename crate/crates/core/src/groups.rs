//! Quaternions, the universal cover of the Euclidean motion group, PSL₂ Möbius
//! actions and invariance probes.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Mul, Neg};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::sampling::{stream_rng, SafeBox};

/// g = x₀ + i x₁ + j y₀ + k y₁.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quaternion {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Quaternion { x0, x1, y0, y1 }
    }

    pub fn norm(&self) -> f64 {
        (self.x0 * self.x0 + self.x1 * self.x1 + self.y0 * self.y0 + self.y1 * self.y1).sqrt()
    }

    /// Point of the hemisphere chart (a₁, b₀, b₁) with a₀ > 0.
    pub fn from_chart(c: &[f64; 3]) -> Self {
        let a0 = (1.0 - c[0] * c[0] - c[1] * c[1] - c[2] * c[2]).sqrt();
        Quaternion::new(a0, c[0], c[1], c[2])
    }

    pub fn to_chart(&self) -> Option<[f64; 3]> {
        (self.x0 > 0.0).then_some([self.x1, self.y0, self.y1])
    }

    /// Image under the isomorphism with SU(2) ⊂ GL₂(ℂ).
    pub fn to_matrix(&self) -> [[Complex64; 2]; 2] {
        [
            [Complex64::new(self.x0, self.x1), Complex64::new(self.y0, self.y1)],
            [Complex64::new(-self.y0, self.y1), Complex64::new(self.x0, -self.x1)],
        ]
    }

    pub fn components(&self) -> [f64; 4] {
        [self.x0, self.x1, self.y0, self.y1]
    }

    pub fn distance(&self, o: &Quaternion) -> f64 {
        let (a, b) = (self.components(), o.components());
        (0..4).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt()
    }

    /// Generator cos(2π/m) + i sin(2π/m) of the cyclic group C_m.
    pub fn cyclic_generator(m: u32) -> Self {
        let t = TAU / m as f64;
        Quaternion::new(t.cos(), t.sin(), 0.0, 0.0)
    }

    /// Haar-uniform unit quaternion.
    pub fn random_unit<R: Rng>(rng: &mut R) -> Self {
        loop {
            let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-3 && n <= 1.0 {
                return Quaternion::new(v[0] / n, v[1] / n, v[2] / n, v[3] / n);
            }
        }
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i + {}j + {}k", self.x0, self.x1, self.y0, self.y1)
    }
}

pub fn hamilton_product(g: &Quaternion, h: &Quaternion) -> Quaternion {
    let (a0, a1, b0, b1) = (g.x0, g.x1, g.y0, g.y1);
    let (c0, c1, d0, d1) = (h.x0, h.x1, h.y0, h.y1);
    Quaternion::new(
        a0 * c0 - a1 * c1 - b0 * d0 - b1 * d1,
        a0 * c1 + a1 * c0 + b0 * d1 - b1 * d0,
        a0 * d0 - a1 * d1 + b0 * c0 + b1 * c1,
        a0 * d1 + a1 * d0 - b0 * c1 + b1 * c0,
    )
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        hamilton_product(&self, &o)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.x0, -self.x1, -self.y0, -self.y1)
    }
}

pub fn quat_inverse(g: &Quaternion) -> Result<Quaternion> {
    let n = g.norm();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnit { norm: n });
    }
    Ok(Quaternion::new(g.x0, -g.x1, -g.y0, -g.y1))
}

/// {±1, ±i, ±j, ±k}.
pub fn binary_dihedral_8() -> Vec<Quaternion> {
    let base = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
    base.iter().flat_map(|q| [*q, -*q]).collect()
}

pub fn cyclic_group(m: u32) -> Vec<Quaternion> {
    let g = Quaternion::cyclic_generator(m);
    let mut out = vec![Quaternion::ONE];
    for _ in 1..m {
        out.push(*out.last().unwrap() * g);
    }
    out
}

/// Element (x, y, θ) of the universal cover of the Euclidean motion group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct E2Element {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl E2Element {
    pub const IDENTITY: E2Element = E2Element {
        x: 0.0,
        y: 0.0,
        theta: 0.0,
    };

    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        E2Element { x, y, theta }
    }

    /// Homogeneous 3x3 matrix of the underlying planar motion.
    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        let (s, c) = self.theta.sin_cos();
        [[c, -s, self.x], [s, c, self.y], [0.0, 0.0, 1.0]]
    }
}

/// (x₁, y₁, θ₁)·(x₂, y₂, θ₂) = (R(θ₁)(x₂, y₂) + (x₁, y₁), θ₁ + θ₂).
pub fn e2_compose(p: &E2Element, q: &E2Element) -> E2Element {
    let (s, c) = p.theta.sin_cos();
    E2Element {
        x: c * q.x - s * q.y + p.x,
        y: s * q.x + c * q.y + p.y,
        theta: p.theta + q.theta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sl2Matrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Sl2Matrix {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if (det - 1.0).abs() > 1e-10 {
            return Err(Error::PreconditionViolation {
                condition: "ad - bc = 1".into(),
                residual: (det - 1.0).abs(),
            });
        }
        Ok(Sl2Matrix { a, b, c, d })
    }

    /// Parabolic translation z ↦ z + s.
    pub fn translation(s: f64) -> Self {
        Sl2Matrix { a: 1.0, b: s, c: 0.0, d: 1.0 }
    }

    /// Hyperbolic dilatation z ↦ λ²z.
    pub fn dilatation(lambda: f64) -> Self {
        Sl2Matrix {
            a: lambda,
            b: 0.0,
            c: 0.0,
            d: 1.0 / lambda,
        }
    }

    /// Elliptic element z ↦ −1/z.
    pub fn rotation() -> Self {
        Sl2Matrix {
            a: 0.0,
            b: 1.0,
            c: -1.0,
            d: 0.0,
        }
    }

    pub fn compose(&self, o: &Sl2Matrix) -> Sl2Matrix {
        Sl2Matrix {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

pub fn mobius_apply(m: &Sl2Matrix, z: Complex64) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(Error::NonHyperbolicPoint { im: z.im });
    }
    Ok((m.a * z + m.b) / (m.c * z + m.d))
}

/// Scalar function on SU(2) probed for invariance.
pub type QuatFn = Arc<dyn Fn(&Quaternion) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct QuatProbe {
    pub name: String,
    pub f: QuatFn,
    /// Compare |f(g·x)| with |f(g)|.
    pub up_to_sign: bool,
    /// Require g and g·x to lie in the hemisphere chart. Probes given by global
    /// formulas on S³ can skip this.
    pub chart_only: bool,
    /// Skip draws where this function is below the threshold (singular loci).
    pub avoid: Option<(QuatFn, f64)>,
}

impl fmt::Debug for QuatProbe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuatProbe")
            .field("name", &self.name)
            .field("up_to_sign", &self.up_to_sign)
            .field("chart_only", &self.chart_only)
            .finish()
    }
}

/// u(g) = b₀² + b₁².
pub fn u_probe() -> QuatFn {
    Arc::new(|g: &Quaternion| g.y0 * g.y0 + g.y1 * g.y1)
}

/// a₀b₁ − a₁b₀, the denominator of w.
pub fn w_denominator() -> QuatFn {
    Arc::new(|g: &Quaternion| g.x0 * g.y1 - g.x1 * g.y0)
}

/// v(g) = arctan((a₀b₀ + a₁b₁)/(a₀b₁ − a₁b₀)).
pub fn v_probe() -> QuatFn {
    Arc::new(|g: &Quaternion| ((g.x0 * g.y0 + g.x1 * g.y1) / (g.x0 * g.y1 - g.x1 * g.y0)).atan())
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub probe: String,
    pub max_deviation: f64,
    pub samples: usize,
    pub rejected: usize,
}

/// max |f(g·x) − f(g)| over random g and the generators x.
pub fn invariance_check(probe: &QuatProbe, generators: &[Quaternion], samples: usize, seed: u64) -> Result<InvarianceReport> {
    const MAX_ATTEMPTS: usize = 10_000;
    let mut worst: f64 = 0.0;
    let mut rejected = 0;
    for (gi, x) in generators.iter().enumerate() {
        for s in 0..samples {
            let mut rng = stream_rng(seed, ((gi as u64) << 32) | s as u64);
            let mut attempts = 0;
            let (g, gx) = loop {
                if attempts >= MAX_ATTEMPTS {
                    return Err(Error::ChartExit { attempts });
                }
                attempts += 1;
                let g = Quaternion::random_unit(&mut rng);
                let gx = g * *x;
                if probe.chart_only && (g.x0 <= 0.0 || gx.x0 <= 0.0) {
                    rejected += 1;
                    continue;
                }
                if let Some((h, thr)) = &probe.avoid {
                    if h(&g).abs() < *thr || h(&gx).abs() < *thr {
                        rejected += 1;
                        continue;
                    }
                }
                break (g, gx);
            };
            let (a, b) = ((probe.f)(&gx), (probe.f)(&g));
            let dev = if probe.up_to_sign {
                (a.abs() - b.abs()).abs()
            } else {
                (a - b).abs()
            };
            worst = if dev.is_nan() { f64::NAN } else { worst.max(dev) };
        }
    }
    Ok(InvarianceReport {
        probe: probe.name.clone(),
        max_deviation: worst,
        samples: samples * generators.len(),
        rejected,
    })
}

/// max |f(A·z) − f(z)| for a function of (x, y) on the upper half-plane.
pub fn surface_invariance_check(
    name: &str,
    f: &Expr,
    generators: &[Sl2Matrix],
    domain: &SafeBox,
    samples: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    let mut worst: f64 = 0.0;
    let pts = domain.sample(samples, seed);
    for a in generators {
        for p in &pts {
            let z = Complex64::new(p.coords[0], p.coords[1]);
            let w = mobius_apply(a, z)?;
            if !(w.im > 0.0) {
                return Err(Error::ChartExit { attempts: 1 });
            }
            let dev = (f.eval(&[w.re, w.im, 0.0]) - f.eval(&p.coords)).abs();
            worst = if dev.is_nan() { f64::NAN } else { worst.max(dev) };
        }
    }
    Ok(InvarianceReport {
        probe: name.to_string(),
        max_deviation: worst,
        samples: samples * generators.len(),
        rejected: 0,
    })
}
