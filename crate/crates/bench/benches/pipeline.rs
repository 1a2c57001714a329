//! Pipeline-level timings: covariance feature extraction, classifier
//! fitting, and one full leave-one-subject-out evaluation on a small
//! synthetic dataset.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mdwm_bench::random_spd_set;
use mdwm_core::{
    fit_mdm, generate_synthetic, run_transfer_evaluation, sample_covariance, EvalConfig, SpdMatrix,
    SynthConfig, Trial,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_trial(seed: u64, channels: usize, samples: usize) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signal = DMatrix::from_fn(channels, samples, |_, _| {
        rng.sample::<f64, _>(StandardNormal)
    });
    Trial::new(signal, "left").expect("random signal is a valid trial")
}

fn bench_sample_covariance(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_covariance");
    for (channels, samples) in [(8, 256), (32, 512)] {
        let trial = random_trial(201, channels, samples);
        let id = BenchmarkId::from_parameter(format!("{channels}x{samples}"));
        group.bench_with_input(id, &trial, |b, trial| {
            b.iter(|| sample_covariance(black_box(trial), 0.05).unwrap());
        });
    }
    group.finish();
}

fn bench_fit_mdm(c: &mut Criterion) {
    let labels = ["left", "right", "rest"];
    let features: Vec<(SpdMatrix, String)> = random_spd_set(202, 8, 30)
        .into_iter()
        .enumerate()
        .map(|(i, m)| (m, labels[i % labels.len()].to_owned()))
        .collect();
    c.bench_function("fit_mdm/30x8", |b| {
        b.iter(|| fit_mdm(black_box(&features)).unwrap());
    });
}

fn bench_end_to_end(c: &mut Criterion) {
    let dataset = generate_synthetic(&SynthConfig {
        subjects: 4,
        classes: 3,
        channels: 4,
        samples_per_trial: 64,
        trials_per_class: 8,
        ..SynthConfig::default()
    })
    .expect("small synthetic dataset generates");
    let config = EvalConfig {
        n_train: vec![6],
        lambdas: vec![0.7],
        repetitions: 1,
        ..EvalConfig::default()
    };
    let mut group = c.benchmark_group("evaluation");
    group.sample_size(10);
    group.bench_function("loso_4_subjects", |b| {
        b.iter(|| run_transfer_evaluation(black_box(&dataset), &config).unwrap());
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_sample_covariance,
    bench_fit_mdm,
    bench_end_to_end
);
criterion_main!(benches);
