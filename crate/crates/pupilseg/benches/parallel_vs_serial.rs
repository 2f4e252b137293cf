//! Compares the data-parallel implementations (default `parallel` feature,
//! rayon) against the always-available serial fallbacks, plus end-to-end
//! pipeline timings for both variants.
//!
//! Run with `cargo bench`, or `cargo bench --no-default-features` to time
//! the sequential build of the image kernels as well.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pupilseg::bitlevel::{AdderConfig, CellKind};
use pupilseg::characterization::{characterize_adder, characterize_adder_serial};
use pupilseg::filters::gaussian_datapath;
use pupilseg::pipeline::{run_pipeline, PipelineConfig};
use pupilseg::synth::{generate_eye, EyeSpec};

fn bench_characterization(c: &mut Criterion) {
    let mut group = c.benchmark_group("characterize_loa");
    for width in [8usize, 10] {
        let cfg = AdderConfig::with_prefix(width, CellKind::ApproxLOA, width / 2).unwrap();
        group.bench_with_input(BenchmarkId::new("parallel", width), &cfg, |b, cfg| {
            b.iter(|| characterize_adder(cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("serial", width), &cfg, |b, cfg| {
            b.iter(|| characterize_adder_serial(cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_gaussian(c: &mut Criterion) {
    let spec = EyeSpec::centered(64, 12.0, 20.0, 42);
    let (img, _) = generate_eye(&spec).unwrap();
    let cfg = PipelineConfig::approximate();
    c.bench_function("gaussian_datapath_64x64", |b| {
        b.iter(|| gaussian_datapath(&img, &cfg.gaussian_cfg).unwrap())
    });
}

fn bench_pipeline(c: &mut Criterion) {
    let spec = EyeSpec::centered(64, 12.0, 20.0, 42);
    let (img, _) = generate_eye(&spec).unwrap();
    let mut group = c.benchmark_group("pipeline_64x64");
    group.bench_function("exact", |b| {
        b.iter(|| run_pipeline(&img, &PipelineConfig::exact()).unwrap())
    });
    group.bench_function("approx", |b| {
        b.iter(|| run_pipeline(&img, &PipelineConfig::approximate()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_characterization, bench_gaussian, bench_pipeline);
criterion_main!(benches);
