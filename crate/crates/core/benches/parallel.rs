use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use mcnls::grid::{make_grid, Field};
use mcnls::groundstate::petviashvili_solve;
use mcnls::profiles::{extract_profiles_with, ProfileOptions};
use mcnls::propagator::{evolve, stability_sweep, Nonlinearity, SolverConfig};
use mcnls::symmetry::{apply_enlarged, EnlargedElement, GroupElement};
use mcnls::Exec;

fn profile_search(c: &mut Criterion) {
    let g = make_grid(1, 512, 16.0).unwrap();
    let q = petviashvili_solve(g, 1e-11, 2000).unwrap();
    let planted = EnlargedElement { base: GroupElement::new(0.7, vec![1.5], vec![-1.2], 1.3).unwrap(), t0: 0.37 };
    let u = apply_enlarged(&planted, &q.field).unwrap();
    let mut group = c.benchmark_group("profile_extraction");
    group.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        let mut opts = ProfileOptions::with_ground_state(g).unwrap();
        opts.exec = exec;
        opts.max_profiles = 1;
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &opts, |b, opts| {
            b.iter(|| extract_profiles_with(&u, opts).unwrap())
        });
    }
    group.finish();
}

fn stability(c: &mut Criterion) {
    let g = make_grid(1, 256, 16.0).unwrap();
    let u0 = Field::from_real_fn(g, |x| (-x[0] * x[0] / 2.0).exp());
    let cfg = SolverConfig::new(Nonlinearity::Defocusing, 1, 1e-3).with_store_every(0.05);
    let u = evolve(&u0, (0.0, 0.5), &cfg).unwrap();
    let direction = Field::from_fn(g, |x| Complex64::new(0.0, (-x[0] * x[0]).exp()));
    let deltas: Vec<f64> = (0..8).map(|k| 1e-4 * 2f64.powi(k)).collect();
    let mut group = c.benchmark_group("stability_sweep");
    group.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        group.bench_function(format!("{exec:?}"), |b| b.iter(|| stability_sweep(&u, &direction, &deltas, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, profile_search, stability);
criterion_main!(benches);
