//! Small symbolic expression type over three chart coordinates.
//!
//! Expressions are immutable DAGs. `diff` produces exact partial derivatives,
//! and `Tape` flattens a set of expressions into a straight-line program so
//! shared subexpressions are evaluated once.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

#[derive(Debug)]
enum Node {
    Const(f64),
    Var(usize),
    Add(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Powi(Expr, i32),
    Sqrt(Expr),
    Sin(Expr),
    Cos(Expr),
    Atan(Expr),
    Exp(Expr),
    Ln(Expr),
}

#[derive(Clone, Debug)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn wrap(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn c(v: f64) -> Self {
        Self::wrap(Node::Const(v))
    }

    pub fn zero() -> Self {
        Self::c(0.0)
    }

    pub fn one() -> Self {
        Self::c(1.0)
    }

    /// Coordinate `x^k`, `k` in 0..3.
    pub fn var(k: usize) -> Self {
        assert!(k < 3, "only three coordinates are supported");
        Self::wrap(Node::Var(k))
    }

    pub fn vars() -> [Expr; 3] {
        [Self::var(0), Self::var(1), Self::var(2)]
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    fn ptr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn powi(&self, n: i32) -> Expr {
        if let Some(v) = self.as_const() {
            return Self::c(v.powi(n));
        }
        match n {
            0 => Self::one(),
            1 => self.clone(),
            _ => Self::wrap(Node::Powi(self.clone(), n)),
        }
    }

    pub fn sqrt(&self) -> Expr {
        match self.as_const() {
            Some(v) => Self::c(v.sqrt()),
            None => Self::wrap(Node::Sqrt(self.clone())),
        }
    }

    pub fn sin(&self) -> Expr {
        match self.as_const() {
            Some(v) => Self::c(v.sin()),
            None => Self::wrap(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Expr {
        match self.as_const() {
            Some(v) => Self::c(v.cos()),
            None => Self::wrap(Node::Cos(self.clone())),
        }
    }

    pub fn atan(&self) -> Expr {
        match self.as_const() {
            Some(v) => Self::c(v.atan()),
            None => Self::wrap(Node::Atan(self.clone())),
        }
    }

    pub fn exp(&self) -> Expr {
        match self.as_const() {
            Some(v) => Self::c(v.exp()),
            None => Self::wrap(Node::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> Expr {
        match self.as_const() {
            Some(v) => Self::c(v.ln()),
            None => Self::wrap(Node::Ln(self.clone())),
        }
    }

    pub fn recip(&self) -> Expr {
        Self::one() / self
    }

    /// Direct recursive evaluation. Use `Tape` in hot loops.
    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        match &*self.0 {
            Node::Const(v) => *v,
            Node::Var(k) => x[*k],
            Node::Add(a, b) => a.eval(x) + b.eval(x),
            Node::Mul(a, b) => a.eval(x) * b.eval(x),
            Node::Div(a, b) => a.eval(x) / b.eval(x),
            Node::Neg(a) => -a.eval(x),
            Node::Powi(a, n) => a.eval(x).powi(*n),
            Node::Sqrt(a) => a.eval(x).sqrt(),
            Node::Sin(a) => a.eval(x).sin(),
            Node::Cos(a) => a.eval(x).cos(),
            Node::Atan(a) => a.eval(x).atan(),
            Node::Exp(a) => a.eval(x).exp(),
            Node::Ln(a) => a.eval(x).ln(),
        }
    }

    /// Partial derivative with respect to coordinate `k`.
    pub fn diff(&self, k: usize) -> Expr {
        let mut memo = HashMap::new();
        self.diff_memo(k, &mut memo)
    }

    pub fn grad(&self) -> [Expr; 3] {
        [self.diff(0), self.diff(1), self.diff(2)]
    }

    fn diff_memo(&self, k: usize, memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(d) = memo.get(&self.ptr()) {
            return d.clone();
        }
        let d = match &*self.0 {
            Node::Const(_) => Self::zero(),
            Node::Var(j) => {
                if *j == k {
                    Self::one()
                } else {
                    Self::zero()
                }
            }
            Node::Add(a, b) => a.diff_memo(k, memo) + b.diff_memo(k, memo),
            Node::Mul(a, b) => {
                let da = a.diff_memo(k, memo);
                let db = b.diff_memo(k, memo);
                da * b + a * db
            }
            Node::Div(a, b) => {
                let da = a.diff_memo(k, memo);
                let db = b.diff_memo(k, memo);
                da / b - a * db / b.powi(2)
            }
            Node::Neg(a) => -a.diff_memo(k, memo),
            Node::Powi(a, n) => {
                let da = a.diff_memo(k, memo);
                Self::c(*n as f64) * a.powi(n - 1) * da
            }
            Node::Sqrt(a) => {
                let da = a.diff_memo(k, memo);
                da / (Self::c(2.0) * self)
            }
            Node::Sin(a) => a.cos() * a.diff_memo(k, memo),
            Node::Cos(a) => -(a.sin() * a.diff_memo(k, memo)),
            Node::Atan(a) => a.diff_memo(k, memo) / (Self::one() + a.powi(2)),
            Node::Exp(a) => self * a.diff_memo(k, memo),
            Node::Ln(a) => a.diff_memo(k, memo) / a,
        };
        memo.insert(self.ptr(), d.clone());
        d
    }

    /// Number of distinct nodes in the DAG.
    pub fn node_count(&self) -> usize {
        Tape::compile(std::slice::from_ref(self)).len()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(v) => write!(f, "{v}"),
            Node::Var(k) => write!(f, "x{}", k + 1),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Mul(a, b) => write!(f, "{a}*{b}"),
            Node::Div(a, b) => write!(f, "{a}/({b})"),
            Node::Neg(a) => write!(f, "-({a})"),
            Node::Powi(a, n) => write!(f, "({a})^{n}"),
            Node::Sqrt(a) => write!(f, "sqrt({a})"),
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
            Node::Atan(a) => write!(f, "atan({a})"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Ln(a) => write!(f, "ln({a})"),
        }
    }
}

fn add(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::c(x + y),
        (Some(0.0), _) => b.clone(),
        (_, Some(0.0)) => a.clone(),
        _ => Expr::wrap(Node::Add(a.clone(), b.clone())),
    }
}

fn mul(a: &Expr, b: &Expr) -> Expr {
    if a.is_zero() || b.is_zero() {
        return Expr::zero();
    }
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::c(x * y),
        _ if a.is_one() => b.clone(),
        _ if b.is_one() => a.clone(),
        (Some(-1.0), _) => neg(b),
        (_, Some(-1.0)) => neg(a),
        _ => Expr::wrap(Node::Mul(a.clone(), b.clone())),
    }
}

fn div(a: &Expr, b: &Expr) -> Expr {
    if a.is_zero() {
        return Expr::zero();
    }
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::c(x / y),
        _ if b.is_one() => a.clone(),
        _ => Expr::wrap(Node::Div(a.clone(), b.clone())),
    }
}

fn neg(a: &Expr) -> Expr {
    match &*a.0 {
        Node::Const(v) => Expr::c(-v),
        Node::Neg(inner) => inner.clone(),
        _ => Expr::wrap(Node::Neg(a.clone())),
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $f(&self, &rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $f(&self, rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $f(self, &rhs)
            }
        }
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $f(self, rhs)
            }
        }
        impl $tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                $f(&self, &Expr::c(rhs))
            }
        }
        impl $tr<f64> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                $f(self, &Expr::c(rhs))
            }
        }
        impl $tr<Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $f(&Expr::c(self), &rhs)
            }
        }
        impl $tr<&Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $f(&Expr::c(self), rhs)
            }
        }
    };
}

fn sub(a: &Expr, b: &Expr) -> Expr {
    add(a, &neg(b))
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(&self)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self)
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::c(v)
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Var(usize),
    Add(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Neg(usize),
    Powi(usize, i32),
    Sqrt(usize),
    Sin(usize),
    Cos(usize),
    Atan(usize),
    Exp(usize),
    Ln(usize),
}

/// Straight-line program evaluating several expressions with shared nodes.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    outputs: Vec<usize>,
}

impl Tape {
    pub fn compile(exprs: &[Expr]) -> Tape {
        let mut tape = Tape {
            ops: Vec::new(),
            outputs: Vec::with_capacity(exprs.len()),
        };
        let mut seen: HashMap<usize, usize> = HashMap::new();
        for e in exprs {
            let slot = tape.push(e, &mut seen);
            tape.outputs.push(slot);
        }
        tape
    }

    fn push(&mut self, e: &Expr, seen: &mut HashMap<usize, usize>) -> usize {
        if let Some(&s) = seen.get(&e.ptr()) {
            return s;
        }
        let op = match &*e.0 {
            Node::Const(v) => Op::Const(*v),
            Node::Var(k) => Op::Var(*k),
            Node::Add(a, b) => {
                let (i, j) = (self.push(a, seen), self.push(b, seen));
                Op::Add(i, j)
            }
            Node::Mul(a, b) => {
                let (i, j) = (self.push(a, seen), self.push(b, seen));
                Op::Mul(i, j)
            }
            Node::Div(a, b) => {
                let (i, j) = (self.push(a, seen), self.push(b, seen));
                Op::Div(i, j)
            }
            Node::Neg(a) => Op::Neg(self.push(a, seen)),
            Node::Powi(a, n) => Op::Powi(self.push(a, seen), *n),
            Node::Sqrt(a) => Op::Sqrt(self.push(a, seen)),
            Node::Sin(a) => Op::Sin(self.push(a, seen)),
            Node::Cos(a) => Op::Cos(self.push(a, seen)),
            Node::Atan(a) => Op::Atan(self.push(a, seen)),
            Node::Exp(a) => Op::Exp(self.push(a, seen)),
            Node::Ln(a) => Op::Ln(self.push(a, seen)),
        };
        self.ops.push(op);
        let slot = self.ops.len() - 1;
        seen.insert(e.ptr(), slot);
        slot
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Evaluates every output, writing into `out` (length `n_outputs`).
    pub fn eval_into(&self, x: &[f64; 3], out: &mut [f64]) {
        let mut r: Vec<f64> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Const(v) => v,
                Op::Var(k) => x[k],
                Op::Add(a, b) => r[a] + r[b],
                Op::Mul(a, b) => r[a] * r[b],
                Op::Div(a, b) => r[a] / r[b],
                Op::Neg(a) => -r[a],
                Op::Powi(a, n) => f64::powi(r[a], n),
                Op::Sqrt(a) => f64::sqrt(r[a]),
                Op::Sin(a) => f64::sin(r[a]),
                Op::Cos(a) => f64::cos(r[a]),
                Op::Atan(a) => f64::atan(r[a]),
                Op::Exp(a) => f64::exp(r[a]),
                Op::Ln(a) => f64::ln(r[a]),
            };
            r.push(v);
        }
        for (o, &s) in out.iter_mut().zip(&self.outputs) {
            *o = r[s];
        }
    }

    pub fn eval(&self, x: &[f64; 3]) -> Vec<f64> {
        let mut out = vec![0.0; self.outputs.len()];
        self.eval_into(x, &mut out);
        out
    }
}

/// Determinant of a symbolic 3x3 matrix.
pub fn det3(m: &[[Expr; 3]; 3]) -> Expr {
    &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
        - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
}

/// Solves `m^T f = g` symbolically by Cramer's rule.
///
/// With `m` holding coframe rows and `g` a coordinate gradient this gives the
/// directional derivatives of the underlying function.
pub fn solve_transpose3(m: &[[Expr; 3]; 3], g: &[Expr; 3]) -> [Expr; 3] {
    let det = det3(m);
    std::array::from_fn(|i| {
        // replace row i of m (column i of m^T) with g
        let mut mi = m.clone();
        mi[i] = g.clone();
        det3(&mi) / &det
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn folding() {
        let x = Expr::var(0);
        assert!((&x * 0.0).is_zero());
        assert_eq!((Expr::c(2.0) + 3.0).as_const(), Some(5.0));
        assert_eq!((&x * 1.0).ptr(), x.ptr());
        assert_eq!((-(-&x)).ptr(), x.ptr());
    }

    #[test]
    fn derivatives_match_hand_computation() {
        let [x, y, z] = Expr::vars();
        let f = (&x * &y).sin() + z.powi(3) / &x + (&y * &y + 1.0).sqrt() + (&x / &z).atan();
        let p = [0.7, -0.4, 1.3];
        let (px, py, pz): (f64, f64, f64) = (p[0], p[1], p[2]);
        let fx = py * (px * py).cos() - pz.powi(3) / (px * px) + (1.0 / pz) / (1.0 + (px / pz).powi(2));
        let fy = px * (px * py).cos() + py / (py * py + 1.0).sqrt();
        let fz = 3.0 * pz * pz / px - (px / (pz * pz)) / (1.0 + (px / pz).powi(2));
        assert_abs_diff_eq!(f.diff(0).eval(&p), fx, epsilon = 1e-13);
        assert_abs_diff_eq!(f.diff(1).eval(&p), fy, epsilon = 1e-13);
        assert_abs_diff_eq!(f.diff(2).eval(&p), fz, epsilon = 1e-13);
    }

    #[test]
    fn exp_ln_roundtrip() {
        let x = Expr::var(0);
        let f = x.exp().ln();
        assert_abs_diff_eq!(f.diff(0).eval(&[0.3, 0.0, 0.0]), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn tape_agrees_with_recursive_eval() {
        let [x, y, z] = Expr::vars();
        let s = (&x * &x + &y * &y).sqrt();
        let e1 = &s * &z + s.cos();
        let e2 = (&s / (&z + 2.0)).exp() - &s;
        let tape = Tape::compile(&[e1.clone(), e2.clone(), e1.diff(1)]);
        let p = [0.1, 0.2, 0.3];
        let v = tape.eval(&p);
        assert_abs_diff_eq!(v[0], e1.eval(&p), epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], e2.eval(&p), epsilon = 1e-15);
        assert_abs_diff_eq!(v[2], e1.diff(1).eval(&p), epsilon = 1e-15);
        // shared nodes are stored once
        assert_eq!(Tape::compile(&[s.clone(), s.clone()]).len(), s.node_count());
        assert!(tape.len() < e1.node_count() + e2.node_count() + e1.diff(1).node_count());
    }

    #[test]
    fn cramer_solve() {
        let m = [
            [Expr::c(2.0), Expr::c(0.0), Expr::c(1.0)],
            [Expr::c(1.0), Expr::c(3.0), Expr::c(0.0)],
            [Expr::c(0.0), Expr::c(1.0), Expr::c(4.0)],
        ];
        let g = [Expr::c(1.0), Expr::c(2.0), Expr::c(3.0)];
        let f = solve_transpose3(&m, &g);
        let fv: Vec<f64> = f.iter().map(|e| e.as_const().unwrap()).collect();
        // m^T f = g
        for j in 0..3 {
            let s: f64 = (0..3).map(|i| m[i][j].as_const().unwrap() * fv[i]).sum();
            assert_abs_diff_eq!(s, g[j].as_const().unwrap(), epsilon = 1e-14);
        }
    }
}
