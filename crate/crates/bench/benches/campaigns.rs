use std::hint::black_box;

use coframe_bench::fixture;
use coframe_core::analysis::{check_bianchi, extract_cartan_k_coframe, extract_gfs_invariants};
use coframe_core::verify::{verify_entry, VerifyConfig};
use coframe_core::{DerivativeMode, ModeArg};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn extraction(c: &mut Criterion) {
    let mut g = c.benchmark_group("extract");
    for id in ["su2.standard", "sl2.standard", "lens:a=0.3"] {
        let (e, pts) = fixture(id, 200);
        for (name, mode) in [("analytic", DerivativeMode::Analytic), ("fd", DerivativeMode::fd())] {
            let w = e.coframe.clone().with_mode(mode);
            g.bench_with_input(BenchmarkId::new(format!("cartan/{name}"), id), &pts, |b, pts| {
                b.iter(|| extract_cartan_k_coframe(black_box(&w), pts, 1e-6).unwrap())
            });
        }
    }
    for id in ["su2.f:u+0.5v", "sl2.pde:C=0", "lens.gfs:a=0.3"] {
        let (e, pts) = fixture(id, 200);
        g.bench_with_input(BenchmarkId::new("gfs", id), &pts, |b, pts| {
            b.iter(|| extract_gfs_invariants(black_box(&e.coframe), pts, 1e-6).unwrap())
        });
    }
    g.finish();
}

fn nested(c: &mut Criterion) {
    let mut g = c.benchmark_group("bianchi");
    g.sample_size(20);
    for id in ["sl2.translation:m=1,n=2", "su2.f:u"] {
        let (e, pts) = fixture(id, 50);
        g.bench_with_input(BenchmarkId::from_parameter(id), &pts, |b, pts| {
            b.iter(|| check_bianchi(black_box(&e.coframe), pts, 1e-5).unwrap())
        });
    }
    g.finish();
}

fn campaign(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify");
    g.sample_size(10);
    for id in ["su2.standard", "su2.f:v2", "sl2.dilatation:g=2t"] {
        let (e, _) = fixture(id, 0);
        for mode in [ModeArg::Analytic, ModeArg::Fd] {
            let mut cfg = VerifyConfig::new(id);
            cfg.mode = mode;
            g.bench_function(BenchmarkId::new(format!("{mode:?}"), id), |b| b.iter(|| verify_entry(&e, &cfg)));
        }
    }
    g.finish();
}

criterion_group!(benches, extraction, nested, campaign);
criterion_main!(benches);
