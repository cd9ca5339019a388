//! Criterion benchmarks for the reconstruction pipeline hot spots:
//! Delaunay tetrahedralization, max-flow on a reconstruction graph, and
//! chamfer distance between dense samplings.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use viewcut_core::delaunay::tetrahedralize;
use viewcut_core::geom::Vec3;
use viewcut_core::metrics::{calibrate, chamfer, sample_mesh};
use viewcut_core::recon::{build_graph, max_flow, ReconParams};
use viewcut_core::synth::sphere_mesh;
use viewcut_core::visibility::{SightRay, SightRaySet};

fn bench_delaunay(c: &mut Criterion) {
    let gt = sphere_mesh(Vec3::ZERO, 1.0, 4).unwrap();
    let mut group = c.benchmark_group("delaunay");
    for n in [1_000usize, 5_000] {
        let cloud = sample_mesh(&gt, n, 0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &cloud, |b, cloud| {
            b.iter(|| tetrahedralize(cloud).unwrap())
        });
    }
    group.finish();
}

fn bench_max_flow(c: &mut Criterion) {
    let gt = sphere_mesh(Vec3::ZERO, 1.0, 4).unwrap();
    let cloud = sample_mesh(&gt, 3_000, 0).unwrap();
    let mesh = tetrahedralize(&cloud).unwrap();
    let cameras = [
        Vec3::new(3.0, 0.0, 0.0),
        Vec3::new(-3.0, 0.0, 0.0),
        Vec3::new(0.0, 3.0, 0.0),
        Vec3::new(0.0, -3.0, 0.0),
        Vec3::new(0.0, 0.0, 3.0),
        Vec3::new(0.0, 0.0, -3.0),
    ];
    let rays = SightRaySet {
        rays: cameras
            .iter()
            .flat_map(|&cam| {
                (0..cloud.len() as u32).map(move |p| SightRay {
                    camera: cam,
                    point_index: p,
                })
            })
            .collect(),
    };
    let graph = build_graph(&mesh, &rays, &ReconParams::default()).unwrap();
    c.bench_function("max_flow/sphere_3k_6views", |b| {
        b.iter(|| max_flow(&graph))
    });
}

fn bench_chamfer(c: &mut Criterion) {
    let gt = sphere_mesh(Vec3::ZERO, 1.0, 4).unwrap();
    let cal = calibrate(&gt, 10_000, (1, 2)).unwrap();
    let p = sample_mesh(&gt, 20_000, 3).unwrap();
    let q = sample_mesh(&gt, 20_000, 4).unwrap();
    c.bench_function("chamfer/20k_vs_20k", |b| {
        b.iter(|| chamfer(&p, &q, cal.k).unwrap())
    });
}

criterion_group!(benches, bench_delaunay, bench_max_flow, bench_chamfer);
criterion_main!(benches);
