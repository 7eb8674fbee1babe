//! Checks against the real MNIST files. Skipped (with a note) when the files
//! are not present; see `$MNIST_DIR`.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tradeoff_core::distribution::{exact_linear_attack, LabeledSample, ThreatModel};
use tradeoff_core::mnist::{
    build_binary_task, correlation_profile, parse_idx, run_binary_mnist, BinaryMnistOptions,
    TEST_IMAGES, TEST_LABELS, TRAIN_IMAGES, TRAIN_LABELS,
};

fn data_dir() -> Option<PathBuf> {
    let dir = std::env::var_os("MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"));
    if dir.join(TRAIN_IMAGES).exists() {
        Some(dir)
    } else {
        eprintln!("skipping: no MNIST files in {}", dir.display());
        None
    }
}

#[test]
fn headers_and_census() {
    let Some(dir) = data_dir() else { return };
    let images = parse_idx(dir.join(TRAIN_IMAGES)).unwrap();
    let labels = parse_idx(dir.join(TRAIN_LABELS)).unwrap();
    assert_eq!(images.dims(), &[60_000, 28, 28]);
    assert_eq!(labels.dims(), &[60_000]);
    assert!(labels.data().iter().all(|&l| l <= 9));

    let fives = labels.data().iter().filter(|&&l| l == 5).count();
    let sevens = labels.data().iter().filter(|&&l| l == 7).count();
    assert!(fives > 5_000 && sevens > 5_000);
    let task = build_binary_task::<f64>(
        &images,
        &labels,
        &parse_idx(dir.join(TEST_IMAGES)).unwrap(),
        &parse_idx(dir.join(TEST_LABELS)).unwrap(),
    )
    .unwrap();
    assert_eq!(task.train.len(), fives + sevens);
    assert!(task
        .train
        .iter()
        .all(|s| s.features.iter().all(|v| (0.0..=1.0).contains(v))));

    let profile = correlation_profile(&task).unwrap();
    assert!(profile.values.iter().all(|v| (0.0..=1.0).contains(v)));
    assert!(profile.values.iter().any(|&v| v > 0.1));
    // The corner pixel is blank in every image.
    assert_eq!(profile.values[0], 0.0);
}

#[test]
fn exact_boxed_attack_dominates_random_perturbations() {
    let Some(dir) = data_dir() else { return };
    let task = tradeoff_core::mnist::load_binary_task::<f64>(&dir).unwrap();
    let options = BinaryMnistOptions::new(0);
    let (w, _) = run_binary_mnist(&task, false, &options).unwrap();
    let tm = ThreatModel::boxed(0.2, 0.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for s in task.test.iter().step_by(10) {
        let best = w.margin(&exact_linear_attack(&w, s, &tm));
        for _ in 0..100 {
            let f = s
                .features
                .iter()
                .map(|&v| (v + 0.2 * rng.random_range(-1.0..=1.0)).clamp(0.0, 1.0))
                .collect();
            assert!(best <= w.margin(&LabeledSample::new(s.label, f)) + 1e-12);
        }
    }
}
