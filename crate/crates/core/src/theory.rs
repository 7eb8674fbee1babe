//! Theorem-level checks: the robustness/accuracy trade-off bound, the
//! confusion-probability algebra behind it, and certification of the
//! standard-vs-adversarial SVM separation on the synthetic distribution.
//!
//! Two adversaries appear in this crate. The confusion algebra here uses the
//! fixed *distribution-swap* adversary that moves every weak feature by `2η`
//! toward `-y` (turning `G₊` into `G₋` and back) and never touches the robust
//! feature. The distribution module's worst-case ℓ∞ attack is strictly
//! stronger. Mixing the two breaks the tightness case of the bound.

use serde::{Deserialize, Serialize};

use crate::distribution::{
    closed_form_robust_accuracy, closed_form_standard_accuracy, LinearClassifier, SyntheticParams,
    ThreatModel,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::streams::chunk_rng;

/// Default slack on the certified accuracies.
pub const THEOREM2_TOL: f64 = 0.01;

/// `Pr(f(x) = +1 | sign(x₁) = i, weak block ~ G_j)` for `i, j ∈ {+, −}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfusionProbs<T> {
    pub p_pp: T,
    pub p_pm: T,
    pub p_mp: T,
    pub p_mm: T,
}

impl<T: Scalar> ConfusionProbs<T> {
    pub fn new(p_pp: T, p_pm: T, p_mp: T, p_mm: T) -> Result<Self> {
        let cp = Self {
            p_pp,
            p_pm,
            p_mp,
            p_mm,
        };
        if cp
            .as_array()
            .iter()
            .any(|&v| !(v >= T::zero() && v <= T::one()))
        {
            return Err(Error::invalid(format!(
                "confusion probabilities outside [0, 1]: {cp:?}"
            )));
        }
        Ok(cp)
    }

    pub fn as_array(&self) -> [T; 4] {
        [self.p_pp, self.p_pm, self.p_mp, self.p_mm]
    }

    /// `a = 1 − p₊₊ + p₋₋`
    pub fn a(&self) -> T {
        T::one() - self.p_pp + self.p_mm
    }

    /// `b = 1 − p₋₊ + p₊₋`
    pub fn b(&self) -> T {
        T::one() - self.p_mp + self.p_pm
    }

    /// Binomial standard error of each cell given its sample count.
    pub fn stderr(&self, samples_per_cell: usize) -> [T; 4] {
        self.as_array()
            .map(|v| crate::distribution::binomial_stderr(v, samples_per_cell))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyPair<T> {
    pub standard: T,
    pub robust: T,
}

fn check_p<T: Scalar>(p: T) -> Result<()> {
    if !(p >= T::lit(0.5) && p < T::one()) {
        return Err(Error::invalid(format!("p must lie in [0.5, 1), got {p}")));
    }
    Ok(())
}

/// Upper bound `min(1, p·δ/(1−p))` on the robust accuracy of any classifier
/// whose standard accuracy is at least `1 − δ`, against ε ≥ 2η.
pub fn tradeoff_bound<T: Scalar>(p: T, delta: T) -> Result<T> {
    check_p(p)?;
    if !(delta >= T::zero() && delta <= T::one()) {
        return Err(Error::invalid(format!(
            "delta must lie in [0, 1], got {delta}"
        )));
    }
    Ok((p * delta / (T::one() - p)).min(T::one()))
}

/// Standard accuracy `1 − ½(p·a + (1−p)·b)` and accuracy against the
/// distribution-swap adversary `½((1−p)·a + p·b)`.
pub fn accuracies_from_confusion<T: Scalar>(cp: &ConfusionProbs<T>, p: T) -> AccuracyPair<T> {
    let half = T::lit(0.5);
    let q = T::one() - p;
    let (a, b) = (cp.a(), cp.b());
    AccuracyPair {
        standard: T::one() - half * (p * a + q * b),
        robust: half * (q * a + p * b),
    }
}

/// Whether the robust accuracy implied by `cp` respects the trade-off bound
/// at the standard accuracy implied by `cp`, up to `tol`.
pub fn verify_tradeoff<T: Scalar>(cp: &ConfusionProbs<T>, p: T, tol: T) -> Result<bool> {
    if !(tol >= T::zero()) {
        return Err(Error::invalid("tolerance must be nonnegative"));
    }
    let acc = accuracies_from_confusion(cp, p);
    let delta = (T::one() - acc.standard).max(T::zero()).min(T::one());
    Ok(acc.robust <= tradeoff_bound(p, delta)? + tol)
}

/// Cells per confusion estimate; each receives `n / 4` draws.
pub const CONFUSION_CELLS: usize = 4;

/// Monte-Carlo estimate of the four confusion probabilities of a bias-free
/// linear classifier. Cell `(i, j)` fixes `x₁ = i` and draws the weak block
/// from `N(j·η, 1)`; chunk `c` of the stream feeds cell `c`.
pub fn estimate_confusion<T: Scalar>(
    w: &LinearClassifier<T>,
    params: &SyntheticParams<T>,
    n: usize,
    stream_id: u64,
) -> Result<ConfusionProbs<T>> {
    if n < 4000 {
        return Err(Error::invalid(format!(
            "confusion estimate needs n >= 4000, got {n}"
        )));
    }
    if w.bias() != T::zero() {
        return Err(Error::NonzeroBias(w.bias().as_f64()));
    }
    let dim = params.feature_dim();
    if w.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: w.dim(),
        });
    }
    let per_cell = n / CONFUSION_CELLS;
    let one = T::one();
    let cells = [(one, one), (one, -one), (-one, one), (-one, -one)];
    let mut probs = [T::zero(); 4];
    let mut x = vec![T::zero(); dim];
    for (c, &(x1, g)) in cells.iter().enumerate() {
        let mut rng = chunk_rng(params.seed(), stream_id, c as u64);
        let mean = g * params.eta();
        let mut positive = 0usize;
        for _ in 0..per_cell {
            x[0] = x1;
            for v in x[1..].iter_mut() {
                *v = mean + T::standard_normal(&mut rng);
            }
            if w.score(&x) > T::zero() {
                positive += 1;
            }
        }
        probs[c] = T::from_count(positive) / T::from_count(per_cell);
    }
    ConfusionProbs::new(probs[0], probs[1], probs[2], probs[3])
}

/// One certified quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Closed-form accuracies of a standard/robust classifier pair together with
/// the weight-structure diagnostics the separation argument relies on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Certificate<T> {
    pub epsilon: T,
    pub tol: T,
    pub standard_model: AccuracyPair<T>,
    pub robust_model: AccuracyPair<T>,
    pub standard_norm: T,
    pub robust_norm: T,
    /// Coefficient of variation of the standard model's weak-feature weights.
    pub weak_weight_cv: T,
    /// `√d · mean(w_std[1:])`: the weight on the normalised weak-feature sum.
    pub scaled_weak_weight: T,
    /// `Σ_{i≥1} |w_rob[i]|`.
    pub robust_weak_l1: T,
    /// `|w_rob[0]|`.
    pub robust_robust_weight: T,
    pub checks: Vec<Check>,
}

impl<T: Scalar> Theorem2Certificate<T> {
    /// The four accuracy assertions.
    pub fn accuracies_pass(&self) -> bool {
        self.checks.iter().take(4).all(|c| c.passed)
    }

    /// Accuracy assertions plus weight diagnostics.
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Validates the theorem's hypotheses: `η ≥ 4/√d`, `p ≤ 0.975`, `2η ≤ ε < 1`.
pub fn check_theorem2_hypotheses<T: Scalar>(params: &SyntheticParams<T>, eps: T) -> Result<()> {
    let slack = T::lit(1e-12);
    let d = T::from_count(params.d());
    let eta = params.eta();
    if eta < T::lit(4.0) / d.sqrt() - slack {
        return Err(Error::Hypothesis(format!(
            "eta = {eta} is below 4/sqrt(d) = {}",
            T::lit(4.0) / d.sqrt()
        )));
    }
    if params.p() > T::lit(0.975) {
        return Err(Error::Hypothesis(format!(
            "p = {} exceeds 0.975",
            params.p()
        )));
    }
    if eps < T::lit(2.0) * eta - slack {
        return Err(Error::Hypothesis(format!(
            "eps = {eps} is below 2*eta = {}",
            T::lit(2.0) * eta
        )));
    }
    if !(eps < T::one()) {
        return Err(Error::Hypothesis(format!("eps = {eps} must be below 1")));
    }
    Ok(())
}

fn weak_stats<T: Scalar>(w: &[T]) -> (T, T) {
    let weak = &w[1..];
    let n = T::from_count(weak.len());
    let mean = weak.iter().copied().sum::<T>() / n;
    let var = weak.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    (mean, var.sqrt())
}

/// Certifies, through closed forms, that `w_std` is accurate but not robust
/// and that `w_rob` sits at accuracy `p` on both counts.
pub fn certify_theorem2<T: Scalar>(
    w_std: &LinearClassifier<T>,
    w_rob: &LinearClassifier<T>,
    params: &SyntheticParams<T>,
    eps: T,
    tol: T,
) -> Result<Theorem2Certificate<T>> {
    check_theorem2_hypotheses(params, eps)?;
    let tm = ThreatModel::linf(eps)?;
    let standard_model = AccuracyPair {
        standard: closed_form_standard_accuracy(w_std, params)?,
        robust: closed_form_robust_accuracy(w_std, params, &tm)?,
    };
    let robust_model = AccuracyPair {
        standard: closed_form_standard_accuracy(w_rob, params)?,
        robust: closed_form_robust_accuracy(w_rob, params, &tm)?,
    };
    let (mean, sd) = weak_stats(w_std.weights());
    let weak_weight_cv = if mean == T::zero() {
        T::infinity()
    } else {
        sd / mean.abs()
    };
    let scaled_weak_weight = T::from_count(params.d()).sqrt() * mean;
    let robust_weak_l1 = crate::scalar::l1_norm(&w_rob.weights()[1..]);
    let robust_robust_weight = w_rob.weights()[0].abs();
    let p = params.p();

    let f = |x: T| x.as_f64();
    let checks = vec![
        Check {
            name: "standard_model.standard > 0.99".to_string(),
            value: f(standard_model.standard),
            threshold: 0.99,
            passed: standard_model.standard > T::lit(0.99),
        },
        Check {
            name: "standard_model.robust < 0.01".to_string(),
            value: f(standard_model.robust),
            threshold: 0.01,
            passed: standard_model.robust < T::lit(0.01),
        },
        Check {
            name: "|robust_model.standard - p| <= tol".to_string(),
            value: f((robust_model.standard - p).abs()),
            threshold: f(tol),
            passed: (robust_model.standard - p).abs() <= tol,
        },
        Check {
            name: "|robust_model.robust - p| <= tol".to_string(),
            value: f((robust_model.robust - p).abs()),
            threshold: f(tol),
            passed: (robust_model.robust - p).abs() <= tol,
        },
        Check {
            name: "weak_weight_cv < 0.1".to_string(),
            value: f(weak_weight_cv),
            threshold: 0.1,
            passed: weak_weight_cv < T::lit(0.1),
        },
        Check {
            name: "scaled_weak_weight >= 1/sqrt(2)".to_string(),
            value: f(scaled_weak_weight),
            threshold: std::f64::consts::FRAC_1_SQRT_2,
            passed: scaled_weak_weight >= T::FRAC_1_SQRT_2(),
        },
        Check {
            name: "robust_weak_l1 < 0.01 * |w_rob[0]|".to_string(),
            value: f(robust_weak_l1),
            threshold: f(T::lit(0.01) * robust_robust_weight),
            passed: robust_weak_l1 < T::lit(0.01) * robust_robust_weight,
        },
    ];

    Ok(Theorem2Certificate {
        epsilon: eps,
        tol,
        standard_model,
        robust_model,
        standard_norm: w_std.l2_norm(),
        robust_norm: w_rob.l2_norm(),
        weak_weight_cv,
        scaled_weak_weight,
        robust_weak_l1,
        robust_robust_weight,
        checks,
    })
}
