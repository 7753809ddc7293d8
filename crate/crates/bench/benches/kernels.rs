use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use mhd_invariants::calculus::{curl, grad, interpolate, Kernel};
use mhd_invariants::lagrange::map_geometry;
use mhd_invariants::noether::{pv_residual, Controls, PvVariant, TimeSample};
use mhd_invariants::solver::{mhd_rhs, rk4_stages};
use mhd_invariants::Eos;
use mhd_invariants_bench::{ot_coupled, ot_state, SIZES};

fn stencils(c: &mut Criterion) {
    let mut g = c.benchmark_group("stencil");
    for n in SIZES {
        let s = ot_state(n);
        g.bench_with_input(BenchmarkId::new("grad", n), &s, |b, s| b.iter(|| grad(black_box(&s.rho))));
        g.bench_with_input(BenchmarkId::new("curl", n), &s, |b, s| b.iter(|| curl(black_box(&s.u))));
    }
    g.finish();
}

fn solver(c: &mut Criterion) {
    let eos = Eos::default();
    let mut g = c.benchmark_group("solver");
    g.sample_size(20);
    for n in SIZES {
        let s = ot_state(n);
        g.bench_with_input(BenchmarkId::new("rhs", n), &s, |b, s| b.iter(|| mhd_rhs(black_box(s), &eos).unwrap()));
        g.bench_with_input(BenchmarkId::new("rk4", n), &s, |b, s| {
            b.iter(|| rk4_stages(black_box(s), &eos, 1e-3).unwrap())
        });
    }
    g.finish();
}

fn interpolation(c: &mut Criterion) {
    let mut g = c.benchmark_group("interpolate");
    for n in SIZES {
        let s = ot_state(n);
        let pts: Vec<[f64; 3]> = (0..n * n).map(|k| [0.37 * k as f64 % 6.0, 0.91 * k as f64 % 6.0, 0.0]).collect();
        for kernel in [Kernel::Linear, Kernel::Cubic] {
            g.bench_with_input(BenchmarkId::new(format!("{kernel:?}"), n), &pts, |b, pts| {
                b.iter(|| interpolate(&s.rho, kernel, black_box(pts)).unwrap())
            });
        }
    }
    g.finish();
}

fn reports(c: &mut Criterion) {
    let eos = Eos::default();
    let mut g = c.benchmark_group("reports");
    g.sample_size(20);
    for n in SIZES {
        let cpl = ot_coupled(n, 4);
        let k = mhd_rhs(&cpl.state, &eos).unwrap();
        g.bench_with_input(BenchmarkId::new("pv-mhd", n), &cpl, |b, cpl| {
            b.iter(|| {
                let sample = TimeSample::SemiDiscrete { state: &cpl.state, k: &k };
                pv_residual(sample, &eos, "psi", PvVariant::Mhd, &Controls::default()).unwrap()
            })
        });
        g.bench_with_input(BenchmarkId::new("map-geometry", n), &cpl, |b, cpl| {
            b.iter(|| map_geometry(black_box(&cpl.map)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, stencils, solver, interpolation, reports);
criterion_main!(benches);
