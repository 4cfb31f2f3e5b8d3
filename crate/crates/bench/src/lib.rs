//! Fixtures shared by the benchmarks.

use coframe_core::{lookup, CatalogEntry, Point3};

pub const SEED: u64 = 1;

/// Catalog entry and a deterministic sample of its safe box.
pub fn fixture(id: &str, samples: usize) -> (CatalogEntry, Vec<Point3>) {
    let e = lookup(id).expect("catalog id");
    let pts = e.safe_box.sample(samples, SEED);
    (e, pts)
}
