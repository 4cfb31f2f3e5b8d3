//! Deterministic rejection sampling in compact safe boxes.
//!
//! Point `i` of a campaign is drawn from its own ChaCha8 stream, so results do
//! not depend on evaluation order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::forms::{Chart, Point3};

const MAX_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SafeBox {
    pub chart: Chart,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    /// Keep x₁² + x₂² + x₃² ≤ r².
    pub ball_radius: Option<f64>,
    /// Keep |a₀b₁ − a₁b₀| ≥ this value (hemisphere charts only).
    pub min_abs_b: Option<f64>,
}

impl SafeBox {
    pub fn su2(radius: f64) -> Self {
        SafeBox {
            chart: Chart::Su2Hemisphere,
            lo: [-radius; 3],
            hi: [radius; 3],
            ball_radius: Some(radius),
            min_abs_b: None,
        }
    }

    pub fn su2_away_from_singular_locus(radius: f64, min_abs_b: f64) -> Self {
        SafeBox {
            min_abs_b: Some(min_abs_b),
            ..Self::su2(radius)
        }
    }

    pub fn lens(radius: f64) -> Self {
        SafeBox {
            chart: Chart::Lens,
            ..Self::su2(radius)
        }
    }

    pub fn e2() -> Self {
        Self::cuboid(Chart::E2, [-2.0, -2.0, 0.0], [2.0, 2.0, std::f64::consts::TAU])
    }

    pub fn sl2() -> Self {
        Self::cuboid(Chart::Sl2, [-2.0, 0.5, 0.0], [2.0, 3.0, std::f64::consts::TAU])
    }

    pub fn cuboid(chart: Chart, lo: [f64; 3], hi: [f64; 3]) -> Self {
        SafeBox {
            chart,
            lo,
            hi,
            ball_radius: None,
            min_abs_b: None,
        }
    }

    pub fn contains(&self, x: &[f64; 3]) -> bool {
        if !(0..3).all(|k| x[k] >= self.lo[k] && x[k] <= self.hi[k]) {
            return false;
        }
        if let Some(r) = self.ball_radius {
            if x.iter().map(|v| v * v).sum::<f64>() > r * r {
                return false;
            }
        }
        if let Some(m) = self.min_abs_b {
            let a0 = (1.0 - x.iter().map(|v| v * v).sum::<f64>()).sqrt();
            if (a0 * x[2] - x[0] * x[1]).abs() < m {
                return false;
            }
        }
        self.chart.admissible(x)
    }

    /// Point `index` of the campaign with the given seed.
    pub fn sample_one(&self, seed: u64, index: u64) -> Point3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        for _ in 0..MAX_ATTEMPTS {
            let x: [f64; 3] = std::array::from_fn(|k| rng.random_range(self.lo[k]..=self.hi[k]));
            if self.contains(&x) {
                return Point3 {
                    chart: self.chart,
                    coords: x,
                };
            }
        }
        panic!("safe box {self:?} rejected {MAX_ATTEMPTS} candidates");
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<Point3> {
        (0..n as u64).map(|i| self.sample_one(seed, i)).collect()
    }
}

/// Independent generator for auxiliary draws (group elements, perturbations).
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_order_independent() {
        let b = SafeBox::sl2();
        let all = b.sample(50, 7);
        assert_eq!(all, b.sample(50, 7));
        assert_eq!(all[17], b.sample_one(7, 17));
        assert_ne!(all, b.sample(50, 8));
    }

    #[test]
    fn respects_constraints() {
        let b = SafeBox::su2_away_from_singular_locus(0.9, 0.05);
        for p in b.sample(300, 1) {
            let x = p.coords;
            assert!(x.iter().map(|v| v * v).sum::<f64>() <= 0.81);
            let a0 = (1.0 - x.iter().map(|v| v * v).sum::<f64>()).sqrt();
            assert!((a0 * x[2] - x[0] * x[1]).abs() >= 0.05);
        }
        for p in SafeBox::sl2().sample(300, 2) {
            assert!(p.coords[1] >= 0.5 && p.coords[1] <= 3.0);
        }
    }
}
