use std::f64::consts::FRAC_PI_4;
use std::hint::black_box;

use chiral_core::markov::{linspace, peak_summary, ChiralMarkovParams};
use chiral_core::par;
use chiral_core::quantum::two_qubit_basis_state;
use chiral_core::tcl::{TclConfig, TclEngine};
use criterion::{criterion_group, criterion_main, Criterion};

fn drive_cells(c: &mut Criterion) {
    let grid = linspace(0.0, 4.0, 8);
    let cells: Vec<(f64, f64)> = grid.iter().flat_map(|a| grid.iter().map(move |b| (*a, *b))).collect();
    let base = ChiralMarkovParams::chiral(0.0, 1.0, 0.0);
    let rho0 = two_qubit_basis_state("gg").unwrap();
    let work = |&(o1, o2): &(f64, f64)| peak_summary(&base.with_drives(o1, o2), &rho0, 5.0, 0.01).unwrap();

    let mut g = c.benchmark_group("markov_sweep_8x8");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| black_box(par::map(&cells, work))));
    g.bench_function("sequential", |b| b.iter(|| black_box(par::sequential_map(&cells, work))));
    g.finish();
}

fn tcl_distances(c: &mut Criterion) {
    let distances: Vec<i64> = (1..=8).collect();
    let work = |d: &i64| {
        let mut cfg = TclConfig::new(0.063, 0.0, 0.14, 0.30, *d, FRAC_PI_4);
        cfg.t_max = 20.0;
        cfg.dt = 0.1;
        TclEngine::new(&cfg).unwrap().peak().unwrap()
    };

    let mut g = c.benchmark_group("tcl_distances_8");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| black_box(par::map(&distances, work))));
    g.bench_function("sequential", |b| b.iter(|| black_box(par::sequential_map(&distances, work))));
    g.finish();
}

criterion_group!(benches, drive_cells, tcl_distances);
criterion_main!(benches);
