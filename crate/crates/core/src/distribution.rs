//! The synthetic robust/non-robust feature distribution and exact
//! evaluation of linear classifiers on it.
//!
//! A sample has a uniform label `y ∈ {-1, +1}`, one robust feature
//! `x₁ = ±y` (agreeing with `y` with probability `p`), and `d` weak features
//! drawn i.i.d. from `N(η·y, 1)`. Feature index 0 is the robust feature.
//!
//! For a bias-free linear classifier the margin `y·wᵀx` is a two-component
//! Gaussian mixture, which gives exact standard and worst-case ℓ∞ accuracy
//! in closed form. A zero margin always counts as a misclassification.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{dot, l1_norm, l2_norm, sign0, Scalar};
use crate::special::normal_cdf;
use crate::streams::chunk_rng;

/// Number of samples drawn from one stream chunk.
pub const SAMPLE_CHUNK: usize = 4096;

/// Minimum Monte-Carlo sample size.
pub const MIN_MONTE_CARLO: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    #[inline]
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Label::Negative => -T::one(),
            Label::Positive => T::one(),
        }
    }

    #[inline]
    pub fn flipped(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }

    pub fn from_sign(s: i8) -> Option<Label> {
        match s {
            -1 => Some(Label::Negative),
            1 => Some(Label::Positive),
            _ => None,
        }
    }
}

/// Parameters of the synthetic distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticParams<T> {
    p: T,
    d: usize,
    eta: T,
    seed: u64,
}

impl<T: Scalar> SyntheticParams<T> {
    /// `0.5 ≤ p ≤ 1`, `d ≥ 1`, `eta > 0`.
    pub fn new(p: T, d: usize, eta: T, seed: u64) -> Result<Self> {
        if !(p >= T::lit(0.5) && p <= T::one()) {
            return Err(Error::invalid(format!("p must lie in [0.5, 1], got {p}")));
        }
        if d == 0 {
            return Err(Error::invalid("d must be at least 1"));
        }
        if !(eta > T::zero() && eta.is_finite()) {
            return Err(Error::invalid(format!("eta must be positive, got {eta}")));
        }
        Ok(Self { p, d, eta, seed })
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `d + 1`: the robust feature plus the weak block.
    pub fn feature_dim(&self) -> usize {
        self.d + 1
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample<T> {
    pub label: Label,
    pub features: Vec<T>,
}

impl<T: Scalar> LabeledSample<T> {
    pub fn new(label: Label, features: Vec<T>) -> Self {
        Self { label, features }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }
}

/// Samples sharing one feature dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset<T> {
    samples: Vec<LabeledSample<T>>,
    feature_dim: usize,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(feature_dim: usize) -> Self {
        Self {
            samples: Vec::new(),
            feature_dim,
        }
    }

    pub fn from_samples(feature_dim: usize, samples: Vec<LabeledSample<T>>) -> Result<Self> {
        if let Some(bad) = samples.iter().find(|s| s.dim() != feature_dim) {
            return Err(Error::DimensionMismatch {
                expected: feature_dim,
                got: bad.dim(),
            });
        }
        Ok(Self {
            samples,
            feature_dim,
        })
    }

    pub fn push(&mut self, sample: LabeledSample<T>) -> Result<()> {
        if sample.dim() != self.feature_dim {
            return Err(Error::DimensionMismatch {
                expected: self.feature_dim,
                got: sample.dim(),
            });
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[LabeledSample<T>] {
        &self.samples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledSample<T>> {
        self.samples.iter()
    }

    /// Applies `f` to every sample's features, keeping labels.
    pub fn map_features(&self, mut f: impl FnMut(&LabeledSample<T>) -> Vec<T>) -> Result<Self> {
        let samples: Vec<_> = self
            .samples
            .iter()
            .map(|s| LabeledSample::new(s.label, f(s)))
            .collect();
        let dim = samples.first().map_or(self.feature_dim, |s| s.dim());
        Self::from_samples(dim, samples)
    }
}

impl<'a, T> IntoIterator for &'a Dataset<T> {
    type Item = &'a LabeledSample<T>;
    type IntoIter = std::slice::Iter<'a, LabeledSample<T>>;

    fn into_iter(self) -> Self::IntoIter {
        self.samples.iter()
    }
}

/// `x ↦ sign(wᵀx + b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier<T> {
    weights: Vec<T>,
    bias: T,
}

impl<T: Scalar> LinearClassifier<T> {
    pub fn new(weights: Vec<T>, bias: T) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::invalid(format!("weight {i} is not finite")));
        }
        if !bias.is_finite() {
            return Err(Error::invalid("bias is not finite"));
        }
        Ok(Self { weights, bias })
    }

    pub fn from_weights(weights: Vec<T>) -> Result<Self> {
        Self::new(weights, T::zero())
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            weights: vec![T::zero(); dim],
            bias: T::zero(),
        }
    }

    /// Unit weight on feature `index`, zero elsewhere.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut c = Self::zeros(dim);
        c.weights[index] = T::one();
        c
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn bias(&self) -> T {
        self.bias
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn into_parts(self) -> (Vec<T>, T) {
        (self.weights, self.bias)
    }

    #[inline]
    pub fn score(&self, features: &[T]) -> T {
        dot(&self.weights, features) + self.bias
    }

    /// `y·(wᵀx + b)`.
    #[inline]
    pub fn margin(&self, sample: &LabeledSample<T>) -> T {
        sample.label.sign::<T>() * self.score(&sample.features)
    }

    /// Strictly positive margin.
    #[inline]
    pub fn is_correct(&self, sample: &LabeledSample<T>) -> bool {
        self.margin(sample) > T::zero()
    }

    /// Predicted label, or `None` on the decision boundary.
    pub fn predict(&self, features: &[T]) -> Option<Label> {
        let s = self.score(features);
        if s > T::zero() {
            Some(Label::Positive)
        } else if s < T::zero() {
            Some(Label::Negative)
        } else {
            None
        }
    }

    /// ℓ₁ norm of the weights; the bias is not part of it.
    pub fn l1_norm(&self) -> T {
        l1_norm(&self.weights)
    }

    pub fn l2_norm(&self) -> T {
        l2_norm(&self.weights)
    }

    pub fn accuracy(&self, data: &Dataset<T>) -> Result<T> {
        self.check_dim(data.feature_dim())?;
        if data.is_empty() {
            return Ok(T::zero());
        }
        let correct = data.iter().filter(|s| self.is_correct(s)).count();
        Ok(T::from_count(correct) / T::from_count(data.len()))
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: dim,
            });
        }
        Ok(())
    }
}

/// ℓ∞ perturbation budget, optionally intersected with a coordinate box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreatModel<T> {
    epsilon: T,
    bounds: Option<(T, T)>,
}

impl<T: Scalar> ThreatModel<T> {
    pub fn linf(epsilon: T) -> Result<Self> {
        if !(epsilon >= T::zero() && epsilon.is_finite()) {
            return Err(Error::invalid(format!(
                "epsilon must be nonnegative, got {epsilon}"
            )));
        }
        Ok(Self {
            epsilon,
            bounds: None,
        })
    }

    pub fn boxed(epsilon: T, lo: T, hi: T) -> Result<Self> {
        let tm = Self::linf(epsilon)?;
        if !(lo < hi) {
            return Err(Error::invalid(format!(
                "box requires lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            bounds: Some((lo, hi)),
            ..tm
        })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn bounds(&self) -> Option<(T, T)> {
        self.bounds
    }

    /// Feasible interval for a coordinate whose clean value is `x`, or `None`
    /// when the ε-interval misses the box entirely.
    #[inline]
    pub fn feasible(&self, x: T) -> Option<(T, T)> {
        let (mut lo, mut hi) = (x - self.epsilon, x + self.epsilon);
        if let Some((blo, bhi)) = self.bounds {
            lo = lo.max(blo);
            hi = hi.min(bhi);
        }
        (lo <= hi).then_some((lo, hi))
    }
}

/// Draws one sample into `buf` (length `d + 1`) and returns its label.
#[inline]
pub(crate) fn draw_sample<T: Scalar, R: Rng + ?Sized>(
    params: &SyntheticParams<T>,
    rng: &mut R,
    buf: &mut [T],
) -> Label {
    let label = if rng.random::<bool>() {
        Label::Positive
    } else {
        Label::Negative
    };
    let y = label.sign::<T>();
    buf[0] = if T::unit_uniform(rng) < params.p {
        y
    } else {
        -y
    };
    let mean = params.eta * y;
    for v in buf[1..].iter_mut() {
        *v = mean + T::standard_normal(rng);
    }
    label
}

/// Draws the chunk `chunk` of stream `(params.seed, stream_id)`, calling
/// `visit` with each sample's label and features. The feature buffer is
/// reused between calls.
pub(crate) fn for_each_in_chunk<T: Scalar>(
    params: &SyntheticParams<T>,
    stream_id: u64,
    chunk: u64,
    count: usize,
    mut visit: impl FnMut(Label, &mut [T]),
) {
    let mut rng = chunk_rng(params.seed, stream_id, chunk);
    let mut buf = vec![T::zero(); params.feature_dim()];
    for _ in 0..count {
        let label = draw_sample(params, &mut rng, &mut buf);
        visit(label, &mut buf);
    }
}

fn chunk_sizes(n: usize) -> impl Iterator<Item = (u64, usize)> {
    (0..n.div_ceil(SAMPLE_CHUNK)).map(move |c| (c as u64, SAMPLE_CHUNK.min(n - c * SAMPLE_CHUNK)))
}

/// Draws `n` samples. The result depends only on `(params.seed, stream_id, n)`,
/// and the first `k` samples of a longer draw equal a draw of size `k`.
pub fn sample_dataset<T: Scalar>(
    params: &SyntheticParams<T>,
    n: usize,
    stream_id: u64,
) -> Result<Dataset<T>> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    let mut samples = Vec::with_capacity(n);
    for (chunk, count) in chunk_sizes(n) {
        for_each_in_chunk(params, stream_id, chunk, count, |label, x| {
            samples.push(LabeledSample::new(label, x.to_vec()));
        });
    }
    Dataset::from_samples(params.feature_dim(), samples)
}

/// `[0, 1/d, …, 1/d]`: the average of the weak features.
pub fn unif_classifier<T: Scalar>(d: usize) -> Result<LinearClassifier<T>> {
    if d == 0 {
        return Err(Error::invalid("d must be at least 1"));
    }
    let mut weights = vec![T::one() / T::from_count(d); d + 1];
    weights[0] = T::zero();
    LinearClassifier::from_weights(weights)
}

/// `Pr[y·wᵀx − reduction > 0]` under the synthetic distribution.
fn mixture_accuracy<T: Scalar>(
    w: &LinearClassifier<T>,
    params: &SyntheticParams<T>,
    reduction: T,
) -> Result<T> {
    if w.bias() != T::zero() {
        return Err(Error::NonzeroBias(w.bias().as_f64()));
    }
    w.check_dim(params.feature_dim())?;
    let w0 = w.weights()[0];
    let weak = &w.weights()[1..];
    let sum: T = weak.iter().copied().sum();
    let spread = l2_norm(weak);
    let p = params.p;
    let q = T::one() - p;
    let agree = w0 + params.eta * sum - reduction;
    let disagree = -w0 + params.eta * sum - reduction;
    if spread == T::zero() {
        let ind = |m: T| if m > T::zero() { T::one() } else { T::zero() };
        return Ok(p * ind(agree) + q * ind(disagree));
    }
    Ok(p * normal_cdf(agree / spread) + q * normal_cdf(disagree / spread))
}

/// Exact probability of a strictly positive margin on clean samples.
pub fn closed_form_standard_accuracy<T: Scalar>(
    w: &LinearClassifier<T>,
    params: &SyntheticParams<T>,
) -> Result<T> {
    mixture_accuracy(w, params, T::zero())
}

/// Exact accuracy against the worst-case perturbation with `‖δ‖∞ ≤ ε`,
/// which lowers every margin by `ε‖w‖₁`.
pub fn closed_form_robust_accuracy<T: Scalar>(
    w: &LinearClassifier<T>,
    params: &SyntheticParams<T>,
    tm: &ThreatModel<T>,
) -> Result<T> {
    if tm.bounds().is_some() {
        return Err(Error::BoxUnsupported);
    }
    mixture_accuracy(w, params, tm.epsilon() * w.l1_norm())
}

/// Exact accuracy against the fixed adversary that moves every weak feature
/// by `shift` toward `-y` and leaves the robust feature alone. With
/// `shift = 2η` this swaps the weak-feature distributions of the two classes.
pub fn closed_form_feature_shift_accuracy<T: Scalar>(
    w: &LinearClassifier<T>,
    params: &SyntheticParams<T>,
    shift: T,
) -> Result<T> {
    let weak_sum: T = w.weights().iter().skip(1).copied().sum();
    mixture_accuracy(w, params, shift * weak_sum)
}

/// In-place form of [`exact_linear_attack`] on a raw feature slice.
#[inline]
pub(crate) fn attack_in_place<T: Scalar>(
    weights: &[T],
    label: Label,
    features: &mut [T],
    tm: &ThreatModel<T>,
) {
    let y = label.sign::<T>();
    let eps = tm.epsilon();
    if eps == T::zero() {
        return;
    }
    for (x, &wi) in features.iter_mut().zip(weights) {
        let dir = -y * sign0(wi);
        if dir == T::zero() {
            continue;
        }
        let target = *x + eps * dir;
        *x = match tm.bounds() {
            None => target,
            Some(_) => match tm.feasible(*x) {
                Some((lo, hi)) => target.max(lo).min(hi),
                None => *x,
            },
        };
    }
}

/// The perturbation in the threat set that minimises `y·wᵀ(x + δ)`:
/// `δᵢ = −ε·y·sign(wᵢ)`, clamped per coordinate to the box when present.
/// The objective is separable, so per-coordinate clamping is exact.
pub fn exact_linear_attack<T: Scalar>(
    w: &LinearClassifier<T>,
    x: &LabeledSample<T>,
    tm: &ThreatModel<T>,
) -> LabeledSample<T> {
    let mut features = x.features.clone();
    attack_in_place(w.weights(), x.label, &mut features, tm);
    LabeledSample::new(x.label, features)
}

/// Moves weak features (indices ≥ 1) by `shift` toward `-y`.
pub fn feature_shift_attack<T: Scalar>(x: &LabeledSample<T>, shift: T) -> LabeledSample<T> {
    let y = x.label.sign::<T>();
    let mut features = x.features.clone();
    for v in features.iter_mut().skip(1) {
        *v -= shift * y;
    }
    LabeledSample::new(x.label, features)
}

/// Monte-Carlo accuracy estimate with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyEstimate<T> {
    pub estimate: T,
    pub stderr: T,
    pub n: usize,
}

impl<T: Scalar> AccuracyEstimate<T> {
    pub fn from_counts(correct: usize, n: usize) -> Self {
        let estimate = T::from_count(correct) / T::from_count(n);
        let stderr = binomial_stderr(estimate, n);
        Self {
            estimate,
            stderr,
            n,
        }
    }

    /// `|estimate − reference| ≤ k·stderr`.
    pub fn within(&self, reference: T, k: T) -> bool {
        (self.estimate - reference).abs() <= k * self.stderr
    }
}

/// `√(p̂(1−p̂)/n)`.
pub fn binomial_stderr<T: Scalar>(p_hat: T, n: usize) -> T {
    (p_hat * (T::one() - p_hat) / T::from_count(n)).sqrt()
}

/// Fraction of `n` fresh samples with a strictly positive margin, after the
/// exact attack when `tm` is given. Chunks are evaluated in parallel; the
/// count is an integer sum, so the result does not depend on thread count.
pub fn monte_carlo_accuracy<T: Scalar>(
    w: &LinearClassifier<T>,
    params: &SyntheticParams<T>,
    tm: Option<&ThreatModel<T>>,
    n: usize,
    stream_id: u64,
) -> Result<AccuracyEstimate<T>> {
    if n < MIN_MONTE_CARLO {
        return Err(Error::invalid(format!(
            "Monte-Carlo needs at least {MIN_MONTE_CARLO} samples, got {n}"
        )));
    }
    w.check_dim(params.feature_dim())?;
    let chunks: Vec<_> = chunk_sizes(n).collect();
    let correct: usize = chunks
        .into_par_iter()
        .map(|(chunk, count)| {
            let mut hits = 0usize;
            for_each_in_chunk(params, stream_id, chunk, count, |label, x| {
                if let Some(tm) = tm {
                    attack_in_place(w.weights(), label, x, tm);
                }
                let m = label.sign::<T>() * w.score(x);
                if m > T::zero() {
                    hits += 1;
                }
            });
            hits
        })
        .sum();
    Ok(AccuracyEstimate::from_counts(correct, n))
}

/// Accuracy on `data` after the exact attack against `w` on every example.
pub fn adversarial_accuracy<T: Scalar>(
    w: &LinearClassifier<T>,
    data: &Dataset<T>,
    tm: &ThreatModel<T>,
) -> Result<T> {
    w.check_dim(data.feature_dim())?;
    if data.is_empty() {
        return Ok(T::zero());
    }
    let correct: usize = data
        .samples()
        .par_iter()
        .map_init(
            || vec![T::zero(); data.feature_dim()],
            |buf, s| {
                buf.copy_from_slice(&s.features);
                attack_in_place(w.weights(), s.label, buf, tm);
                usize::from(s.label.sign::<T>() * w.score(buf) > T::zero())
            },
        )
        .sum();
    Ok(T::from_count(correct) / T::from_count(data.len()))
}
