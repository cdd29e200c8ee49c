use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polydg::analysis::random_vector;
use polydg::assembly::{assemble_sipg, DEFAULT_C_SIGMA};
use polydg::hierarchy::{build_hierarchy, DEFAULT_TARGET_FACTOR};
use polydg::mesh::{generate_voronoi_lloyd, DEFAULT_LLOYD_ITERS};
use polydg::solvers::{build_levels, CycleKind, Multigrid, DEFAULT_LAMBDA_SAFETY};
use polydg::{DGSpace, PenaltyParams, PolyMesh};
use std::hint::black_box;
use std::sync::Arc;

const CELLS: usize = 512;

fn mesh() -> Arc<PolyMesh> {
    Arc::new(generate_voronoi_lloyd(CELLS, DEFAULT_LLOYD_ITERS, 1).expect("mesh"))
}

fn assembly(c: &mut Criterion) {
    let mesh = mesh();
    let mut g = c.benchmark_group("assemble_sipg");
    g.sample_size(10);
    for p in [1, 2, 3] {
        let space = DGSpace::new(mesh.clone(), p).unwrap();
        let params = PenaltyParams::new(DEFAULT_C_SIGMA, p).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, _| {
            b.iter(|| assemble_sipg(black_box(&space), &params).unwrap())
        });
    }
    g.finish();
}

fn matvec(c: &mut Criterion) {
    let mesh = mesh();
    let mut g = c.benchmark_group("matvec");
    for p in [1, 3] {
        let space = DGSpace::new(mesh.clone(), p).unwrap();
        let a = assemble_sipg(&space, &PenaltyParams::new(DEFAULT_C_SIGMA, p).unwrap()).unwrap();
        let x = random_vector(a.n_cols(), 3);
        let mut y = vec![0.0; a.n_rows()];
        g.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, _| {
            b.iter(|| a.matvec_into(black_box(&x), &mut y))
        });
    }
    g.finish();
}

fn cycles(c: &mut Criterion) {
    let h = build_hierarchy(mesh(), 3, 1, DEFAULT_TARGET_FACTOR, 1).unwrap();
    let mg = Multigrid::new(build_levels(&h, DEFAULT_C_SIGMA, DEFAULT_LAMBDA_SAFETY).unwrap()).unwrap();
    let tl = mg.top(2).unwrap();
    let rhs = random_vector(mg.fine().a.n_rows(), 5);
    let mut g = c.benchmark_group("cycle_p1_m3");
    g.bench_function("two_level", |b| {
        b.iter(|| {
            let mut z = vec![0.0; rhs.len()];
            tl.cycle(black_box(&rhs), &mut z, CycleKind::TwoLevel, 3, 3);
            z
        })
    });
    g.bench_function("w_cycle_3", |b| {
        b.iter(|| {
            let mut z = vec![0.0; rhs.len()];
            mg.cycle(black_box(&rhs), &mut z, CycleKind::WCycle, 3, 3);
            z
        })
    });
    g.finish();
}

criterion_group!(benches, assembly, matvec, cycles);
criterion_main!(benches);
