//! Benchmarks for the data-parallel hot paths.
//!
//! `track_frame` and `generate_model` parallelize per correspondence and per
//! view on rayon when the default `parallel` feature is on. Running the same
//! workload inside one-thread and multi-thread pools compares the parallel
//! code against its sequential behavior; building with
//! `--no-default-features` benches the true sequential fallback.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use icg_core::geometry::{CameraIntrinsics, PoseSE3};
use icg_core::mesh;
use icg_core::scene::{self, SceneConfig};
use icg_core::tracker::{TrackerConfig, TrackerState};
use icg_core::viewpoint::{generate_model, ModelConfig, SparseViewpointModel};

fn intrinsics() -> CameraIntrinsics {
    CameraIntrinsics::new(525.0, 525.0, 319.5, 239.5, 640, 480).unwrap()
}

fn build_model() -> Arc<SparseViewpointModel> {
    let config = ModelConfig {
        subdivision_level: 2,
        n_contour_points: 200,
        n_surface_points: 200,
        seed: 1,
        ..ModelConfig::default()
    };
    Arc::new(generate_model(&mesh::cube(0.1), &config).unwrap())
}

fn thread_counts() -> Vec<usize> {
    if cfg!(feature = "parallel") {
        let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        if cores > 1 {
            vec![1, cores]
        } else {
            vec![1]
        }
    } else {
        vec![1]
    }
}

fn bench_track_frame(c: &mut Criterion) {
    let model = build_model();
    let scene_cfg = SceneConfig { n_frames: 3, seed: 5, ..SceneConfig::default() };
    let seq = scene::generate_sequence(&mesh::cube(0.1), &scene_cfg).unwrap();

    let mut group = c.benchmark_group("track_frame");
    for threads in thread_counts() {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(threads), &threads, |b, _| {
            let mut tracker = TrackerState::new(
                model.clone(),
                intrinsics(),
                intrinsics(),
                PoseSE3::identity(),
                TrackerConfig::default(),
                *seq.ground_truth_pose(0),
            )
            .unwrap();
            pool.install(|| {
                tracker.init_histograms(&seq.frames[0].color, &seq.frames[0].depth);
                b.iter(|| {
                    tracker.cam_from_model = *seq.ground_truth_pose(1);
                    tracker.track_frame(&seq.frames[2].color, &seq.frames[2].depth)
                });
            });
        });
    }
    group.finish();
}

fn bench_generate_model(c: &mut Criterion) {
    let mesh = mesh::cube(0.1);
    let config = ModelConfig {
        subdivision_level: 1,
        n_contour_points: 100,
        n_surface_points: 100,
        seed: 3,
        intrinsics: CameraIntrinsics::new(260.0, 260.0, 159.5, 119.5, 320, 240).unwrap(),
        ..ModelConfig::default()
    };

    let mut group = c.benchmark_group("generate_model_42_views");
    group.sample_size(10);
    for threads in thread_counts() {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(threads), &threads, |b, _| {
            pool.install(|| b.iter(|| generate_model(&mesh, &config).unwrap()));
        });
    }
    group.finish();
}

fn bench_generate_sequence(c: &mut Criterion) {
    let mesh = mesh::cube(0.1);
    let cfg = SceneConfig {
        n_frames: 8,
        seed: 4,
        intrinsics: CameraIntrinsics::new(260.0, 260.0, 159.5, 119.5, 320, 240).unwrap(),
        intrinsics_depth: CameraIntrinsics::new(260.0, 260.0, 159.5, 119.5, 320, 240).unwrap(),
        ..SceneConfig::default()
    };

    let mut group = c.benchmark_group("generate_sequence_8_frames");
    group.sample_size(10);
    for threads in thread_counts() {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(threads), &threads, |b, _| {
            pool.install(|| b.iter(|| scene::generate_sequence(&mesh, &cfg).unwrap()));
        });
    }
    group.finish();
}

criterion_group!(benches, bench_track_frame, bench_generate_model, bench_generate_sequence);
criterion_main!(benches);
