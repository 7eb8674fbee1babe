//! Statistical agreement of Monte-Carlo estimates with the closed forms,
//! judged as a population of z-scores rather than one threshold per draw.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use tradeoff_core::distribution::{
    binomial_stderr, closed_form_feature_shift_accuracy, closed_form_robust_accuracy,
    closed_form_standard_accuracy, feature_shift_attack, monte_carlo_accuracy, sample_dataset,
    LinearClassifier, SyntheticParams, ThreatModel,
};
use tradeoff_core::streams;

fn z(estimate: f64, exact: f64, n: usize) -> f64 {
    let se = binomial_stderr(exact, n);
    if se > 0.0 {
        (estimate - exact).abs() / se
    } else if estimate == exact {
        0.0
    } else {
        f64::INFINITY
    }
}

#[test]
fn z_scores_look_standard_normal() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let n = 50_000;
    let mut zs = Vec::new();
    for i in 0..300 {
        let d = rng.random_range(1..=20);
        let params = SyntheticParams::new(
            rng.random_range(0.5..1.0),
            d,
            rng.random_range(0.05..0.5),
            5000 + i,
        )
        .unwrap();
        let w =
            LinearClassifier::from_weights((0..=d).map(|_| rng.sample(StandardNormal)).collect())
                .unwrap();
        let tm = ThreatModel::linf(rng.random_range(0.0..1.0)).unwrap();
        let std = monte_carlo_accuracy(&w, &params, None, n, streams::TEST).unwrap();
        let rob = monte_carlo_accuracy(&w, &params, Some(&tm), n, streams::TEST).unwrap();
        zs.push(z(
            std.estimate,
            closed_form_standard_accuracy(&w, &params).unwrap(),
            n,
        ));
        zs.push(z(
            rob.estimate,
            closed_form_robust_accuracy(&w, &params, &tm).unwrap(),
            n,
        ));
    }
    let beyond3 = zs.iter().filter(|&&v| v > 3.0).count();
    let beyond2 = zs.iter().filter(|&&v| v > 2.0).count();
    let max = zs.iter().copied().fold(0.0, f64::max);
    // 600 draws: E[#|z|>3] = 1.6 (99.9% quantile 7), E[#|z|>2] = 27.3
    // (99.9% range 12..46), and a Bonferroni bound of 4.5 on the maximum.
    assert!(beyond3 <= 7, "{beyond3} beyond 3 sigma");
    assert!((12..=46).contains(&beyond2), "{beyond2} beyond 2 sigma");
    assert!(max < 4.5, "max |z| {max}");
}

#[test]
fn feature_shift_adversary_matches_closed_form() {
    let params = SyntheticParams::new(0.9, 30, 0.2, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 40_000;
    for _ in 0..10 {
        let w =
            LinearClassifier::from_weights((0..=30).map(|_| rng.sample(StandardNormal)).collect())
                .unwrap();
        let shift = rng.random_range(0.0..0.6);
        let data = sample_dataset(&params, n, streams::TEST).unwrap();
        let shifted = data
            .map_features(|s| feature_shift_attack(s, shift).features)
            .unwrap();
        let mc = w.accuracy(&shifted).unwrap();
        let exact = closed_form_feature_shift_accuracy(&w, &params, shift).unwrap();
        assert!(z(mc, exact, n) <= 4.0, "mc {mc} closed {exact}");
    }
}
