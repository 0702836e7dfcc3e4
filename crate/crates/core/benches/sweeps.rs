//! Sequential vs rayon for the three sweeps the crate parallelises: seeded
//! identity instances, spectra across angles, and curve grid points.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ncbrane::background::build_background;
use ncbrane::condensation::recombined_eigenvalues;
use ncbrane::identities::{background_cross_term, check_expansion, random_instance};
use ncbrane::spectrum::{build_mass_operator_fock, numeric_spectrum};
use ncbrane::sweep;
use ncbrane::Params;

fn identity_job(&(seed, n): &(u64, usize)) -> f64 {
    let inst = random_instance(seed, n).unwrap();
    let a = inst.a.blocks();
    check_expansion(&inst.x, &a, None).unwrap().residual + background_cross_term(&inst.x, &a, None).unwrap().residual
}

fn spectrum_job(&theta: &f64) -> usize {
    let bg = build_background(Params::new(theta, 1.0, 1.0).unwrap(), 16).unwrap();
    numeric_spectrum(&build_mass_operator_fock(&bg).unwrap(), 4).unwrap().trusted().count()
}

fn curve_job(&x0: &f64) -> f64 {
    recombined_eigenvalues(x0, &Params::new(1.0, 1.0, 1.0).unwrap()).agreement
}

fn run<T: Sync, U: Send>(c: &mut Criterion, name: &str, items: &[T], f: fn(&T) -> U) {
    let mut g = c.benchmark_group(name);
    g.bench_with_input(BenchmarkId::new("sequential", items.len()), items, |b, xs| {
        b.iter(|| black_box(sweep::map_seq(xs, f)))
    });
    #[cfg(feature = "parallel")]
    g.bench_with_input(BenchmarkId::new("rayon", items.len()), items, |b, xs| {
        b.iter(|| black_box(sweep::map_par(xs, f)))
    });
    g.finish();
}

fn sweeps(c: &mut Criterion) {
    let ids: Vec<(u64, usize)> = (0..64).map(|i| (i, 2 + (i as usize) % 7)).collect();
    run(c, "identity_sweep", &ids, identity_job);

    let angles: Vec<f64> = (0..8).map(|i| 1.4 * i as f64 / 7.0).collect();
    run(c, "angle_spectra", &angles, spectrum_job);

    let grid: Vec<f64> = (0..2001).map(|i| -10.0 + 0.01 * i as f64).collect();
    run(c, "curve_grid", &grid, curve_job);
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
