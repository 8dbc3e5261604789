use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use lakeice_core::classify::{train_linear_svm, DEFAULT_COST};
use lakeice_core::pipeline::{acquisitions, classify_all, timelines, training_sample, TimelineSettings};
use lakeice_core::synth::generate_dataset;
use lakeice_core::timeline::gaussian_smooth;
use lakeice_core::phenology::fit_phenology;
use lakeice_core::{PriorConfig, SynthConfig};

fn small() -> SynthConfig {
    SynthConfig {
        winters: (2004..2008).collect(),
        ..SynthConfig::default()
    }
}

fn bench_svm(c: &mut Criterion) {
    let ds = generate_dataset(&small()).unwrap();
    let train = training_sample(&ds.samples, 4000, 1);
    c.bench_function("train_linear_svm_4000", |b| {
        b.iter(|| train_linear_svm(black_box(&train), DEFAULT_COST).unwrap())
    });
}

fn bench_timelines(c: &mut Criterion) {
    let ds = generate_dataset(&small()).unwrap();
    let train = training_sample(&ds.samples, 4000, 1);
    let model = train_linear_svm(&train, DEFAULT_COST).unwrap();
    let pred = classify_all(&model, &ds.samples).unwrap();
    let acq = acquisitions(&ds.samples, &pred).unwrap();
    let settings = TimelineSettings::default();
    let tls = timelines(&acq, &settings).unwrap();
    let prior = PriorConfig::default();

    c.bench_function("gaussian_smooth_winter", |b| {
        b.iter(|| {
            for (raw, _) in &tls {
                black_box(gaussian_smooth(raw, settings.sigma_days, settings.window_days));
            }
        })
    });
    c.bench_function("fit_phenology_winter", |b| {
        b.iter(|| {
            for (_, smooth) in &tls {
                black_box(fit_phenology(smooth, &prior));
            }
        })
    });
}

criterion_group!(benches, bench_svm, bench_timelines);
criterion_main!(benches);
