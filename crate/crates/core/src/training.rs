//! Standard and adversarial training of linear models.
//!
//! Both losses are functions of the *robust margin*
//! `m = y·(wᵀx + b) − ε‖w‖₁`, the exact worst case of `y·(wᵀ(x+δ) + b)` over
//! `‖δ‖∞ ≤ ε`. Setting `ε = 0` gives ordinary training, so standard and
//! adversarial training share one objective:
//!
//! ```text
//! mean_i loss(m_i) + ½·λ·‖w‖²
//! ```
//!
//! Optimisation is (stochastic) subgradient descent. The ridge term is
//! applied implicitly, `w ← w / (1 + η_t·λ)`, so very large `λ` is stable.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::{
    draw_sample, exact_linear_attack, feature_shift_attack, sample_dataset, Dataset, Label,
    LabeledSample, LinearClassifier, SyntheticParams, ThreatModel,
};
use crate::error::{Error, Result};
use crate::scalar::{dot, l1_norm, l2_norm, sign0, Scalar};
use crate::streams::{self, stream_rng};
use crate::theory::{
    certify_theorem2, check_theorem2_hypotheses, Theorem2Certificate, THEOREM2_TOL,
};

/// Step budget of the synthetic SVM configurations.
pub const SVM_STEPS: usize = 60_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `max(0, 1 − m)`
    Hinge,
    /// `ln(1 + e^{−m})`
    Logistic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    FixedDataset,
    /// Every step draws a new i.i.d. batch from the synthetic distribution.
    FreshSampler,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrSchedule {
    Constant,
    /// `lr / √t` at step `t ≥ 1`.
    InvSqrt,
    /// `1 / (λ·t)`, the strongly convex rate; ignores `learning_rate`.
    /// With the implicit ridge step the iterate is the running mean of
    /// `−g_t / λ`.
    InvLambdaT,
}

/// How the `ε‖w‖₁` part of the robust margin enters the update.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum L1Update {
    /// Plain subgradient with `sign(0) = 0`.
    Subgradient,
    /// Soft-thresholding with the batch's current ℓ₁ coefficient
    /// `−ε·mean(loss'(m))`. Produces exact zeros.
    Proximal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig<T> {
    pub loss_kind: LossKind,
    pub lambda: T,
    pub learning_rate: T,
    pub schedule: LrSchedule,
    pub steps: usize,
    pub batch_size: usize,
    /// 0 for standard training.
    pub robust_epsilon: T,
    pub seed: u64,
    pub stream_id: u64,
    pub data_source: DataSource,
    pub fit_bias: bool,
    pub l1_update: L1Update,
    /// When set, weights are rescaled onto the sphere `‖w‖₂ = r` after every
    /// step (the constrained form of a unit-norm classifier).
    pub norm_constraint: Option<T>,
}

impl<T: Scalar> TrainConfig<T> {
    /// Online soft-margin SVM on fresh synthetic batches: 6·10⁴ steps of 64
    /// samples at rate `1/(λt)`, no bias.
    pub fn synthetic_svm(lambda: T, seed: u64) -> Self {
        Self {
            loss_kind: LossKind::Hinge,
            lambda,
            learning_rate: T::one(),
            schedule: LrSchedule::InvLambdaT,
            steps: SVM_STEPS,
            batch_size: 64,
            robust_epsilon: T::zero(),
            seed,
            stream_id: streams::TRAIN,
            data_source: DataSource::FreshSampler,
            fit_bias: false,
            l1_update: L1Update::Subgradient,
            norm_constraint: None,
        }
    }

    /// Adversarial hinge training on the unit sphere `‖w‖₂ = 1` without a
    /// ridge term, rate `0.01/√t`. Otherwise as [`Self::synthetic_svm`].
    pub fn synthetic_svm_unit_sphere(epsilon: T, seed: u64) -> Self {
        Self {
            lambda: T::zero(),
            learning_rate: T::lit(0.01),
            schedule: LrSchedule::InvSqrt,
            robust_epsilon: epsilon,
            norm_constraint: Some(T::one()),
            ..Self::synthetic_svm(T::zero(), seed)
        }
    }

    /// Full-batch logistic regression with a bias: 100 epochs at constant
    /// learning rate 0.1 on the mean gradient.
    pub fn full_batch_logistic(seed: u64) -> Self {
        Self {
            loss_kind: LossKind::Logistic,
            lambda: T::zero(),
            learning_rate: T::lit(0.1),
            schedule: LrSchedule::Constant,
            steps: 100,
            batch_size: usize::MAX,
            robust_epsilon: T::zero(),
            seed,
            stream_id: streams::TRAIN,
            data_source: DataSource::FixedDataset,
            fit_bias: true,
            l1_update: L1Update::Subgradient,
            norm_constraint: None,
        }
    }

    pub fn robust(self, epsilon: T) -> Self {
        Self {
            robust_epsilon: epsilon,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || self.batch_size == 0 {
            return Err(Error::invalid("steps and batch_size must be positive"));
        }
        if !(self.lambda >= T::zero() && self.lambda.is_finite()) {
            return Err(Error::invalid(format!(
                "lambda must be nonnegative, got {}",
                self.lambda
            )));
        }
        if !(self.learning_rate > T::zero() && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning_rate must be positive"));
        }
        if !(self.robust_epsilon >= T::zero() && self.robust_epsilon.is_finite()) {
            return Err(Error::invalid("robust_epsilon must be nonnegative"));
        }
        if self.schedule == LrSchedule::InvLambdaT && self.lambda <= T::zero() {
            return Err(Error::invalid("the 1/(λt) schedule needs lambda > 0"));
        }
        if let Some(r) = self.norm_constraint {
            if !(r > T::zero() && r.is_finite()) {
                return Err(Error::invalid("norm constraint must be positive"));
            }
        }
        Ok(())
    }

    fn rate(&self, step: usize) -> T {
        match self.schedule {
            LrSchedule::Constant => self.learning_rate,
            LrSchedule::InvSqrt => self.learning_rate / T::from_count(step).sqrt(),
            LrSchedule::InvLambdaT => T::one() / (self.lambda * T::from_count(step)),
        }
    }
}

/// What a training run consumes.
#[derive(Clone, Copy, Debug)]
pub enum TrainingData<'a, T> {
    Dataset(&'a Dataset<T>),
    Sampler(&'a SyntheticParams<T>),
}

/// `d loss / d m`.
#[inline]
fn loss_slope<T: Scalar>(kind: LossKind, m: T) -> T {
    match kind {
        LossKind::Hinge => {
            if m < T::one() {
                -T::one()
            } else {
                T::zero()
            }
        }
        // −σ(−m), evaluated without overflow.
        LossKind::Logistic => {
            if m >= T::zero() {
                let e = (-m).exp();
                -e / (T::one() + e)
            } else {
                -T::one() / (T::one() + m.exp())
            }
        }
    }
}

#[inline]
fn loss_value<T: Scalar>(kind: LossKind, m: T) -> T {
    match kind {
        LossKind::Hinge => (T::one() - m).max(T::zero()),
        // ln(1 + e^{−m}) = max(−m, 0) + ln(1 + e^{−|m|})
        LossKind::Logistic => (-m).max(T::zero()) + (-m.abs()).exp().ln_1p(),
    }
}

/// `m = y·(wᵀx + b) − ε‖w‖₁`.
#[inline]
fn robust_margin<T: Scalar>(w: &LinearClassifier<T>, x: &[T], label: Label, eps: T) -> T {
    label.sign::<T>() * w.score(x) - eps * w.l1_norm()
}

/// Loss of one sample at robust margin `y·(wᵀx + b) − ε‖w‖₁`; the bias is
/// not penalised. `eps = 0` gives the standard loss.
pub fn point_loss<T: Scalar>(
    w: &LinearClassifier<T>,
    x: &LabeledSample<T>,
    kind: LossKind,
    eps: T,
) -> Result<T> {
    w.check_dim(x.dim())?;
    Ok(loss_value(
        kind,
        robust_margin(w, &x.features, x.label, eps),
    ))
}

/// Subgradient of [`point_loss`] with respect to `(w, b)`, using
/// `sign(0) = 0` for the ℓ₁ term and slope 0 at the hinge point.
pub fn point_loss_gradient<T: Scalar>(
    w: &LinearClassifier<T>,
    x: &LabeledSample<T>,
    kind: LossKind,
    eps: T,
) -> Result<(Vec<T>, T)> {
    w.check_dim(x.dim())?;
    let y = x.label.sign::<T>();
    let s = loss_slope(kind, robust_margin(w, &x.features, x.label, eps));
    let grad = x
        .features
        .iter()
        .zip(w.weights())
        .map(|(&xi, &wi)| s * (y * xi - eps * sign0(wi)))
        .collect();
    Ok((grad, s * y))
}

/// Mean [`point_loss`] over a dataset.
pub fn mean_loss<T: Scalar>(
    w: &LinearClassifier<T>,
    data: &Dataset<T>,
    kind: LossKind,
    eps: T,
) -> Result<T> {
    w.check_dim(data.feature_dim())?;
    if data.is_empty() {
        return Ok(T::zero());
    }
    let l1 = w.l1_norm();
    let total: T = data
        .iter()
        .map(|s| loss_value(kind, s.label.sign::<T>() * w.score(&s.features) - eps * l1))
        .sum();
    Ok(total / T::from_count(data.len()))
}

/// Batch gradient accumulator for the data term.
struct Accumulator<T> {
    grad: Vec<T>,
    bias: T,
    slope_sum: T,
    count: usize,
}

impl<T: Scalar> Accumulator<T> {
    fn new(dim: usize) -> Self {
        Self {
            grad: vec![T::zero(); dim],
            bias: T::zero(),
            slope_sum: T::zero(),
            count: 0,
        }
    }

    fn reset(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = T::zero());
        self.bias = T::zero();
        self.slope_sum = T::zero();
        self.count = 0;
    }

    #[inline]
    fn add(&mut self, kind: LossKind, weights: &[T], bias: T, l1_shift: T, label: Label, x: &[T]) {
        let y = label.sign::<T>();
        let m = y * (dot(weights, x) + bias) - l1_shift;
        let s = loss_slope(kind, m);
        self.count += 1;
        if s == T::zero() {
            return;
        }
        let sy = s * y;
        for (g, &xi) in self.grad.iter_mut().zip(x) {
            *g += sy * xi;
        }
        self.bias += sy;
        self.slope_sum += s;
    }
}

/// Trains a linear classifier. Deterministic given the config (seed and
/// stream id); aborts with [`Error::Divergence`] on any non-finite weight.
pub fn train<T: Scalar>(
    config: &TrainConfig<T>,
    data: TrainingData<'_, T>,
) -> Result<LinearClassifier<T>> {
    config.validate()?;
    let dim = match (config.data_source, data) {
        (DataSource::FixedDataset, TrainingData::Dataset(ds)) => {
            if ds.is_empty() {
                return Err(Error::invalid("training dataset is empty"));
            }
            ds.feature_dim()
        }
        (DataSource::FreshSampler, TrainingData::Sampler(params)) => params.feature_dim(),
        (source, _) => {
            return Err(Error::invalid(format!(
                "data source {source:?} does not match the supplied training data"
            )))
        }
    };

    let mut rng: ChaCha8Rng = stream_rng(config.seed, config.stream_id);
    let mut weights = vec![T::zero(); dim];
    let mut bias = T::zero();
    let mut acc = Accumulator::new(dim);
    let mut buf = vec![T::zero(); dim];
    let eps = config.robust_epsilon;

    for step in 1..=config.steps {
        acc.reset();
        let l1_shift = eps * l1_norm(&weights);
        match data {
            TrainingData::Dataset(ds) => {
                let n = ds.len();
                if config.batch_size >= n {
                    for s in ds.iter() {
                        acc.add(
                            config.loss_kind,
                            &weights,
                            bias,
                            l1_shift,
                            s.label,
                            &s.features,
                        );
                    }
                } else {
                    for _ in 0..config.batch_size {
                        let s = &ds.samples()[rng.random_range(0..n)];
                        acc.add(
                            config.loss_kind,
                            &weights,
                            bias,
                            l1_shift,
                            s.label,
                            &s.features,
                        );
                    }
                }
            }
            TrainingData::Sampler(params) => {
                for _ in 0..config.batch_size {
                    let label = draw_sample(params, &mut rng, &mut buf);
                    acc.add(config.loss_kind, &weights, bias, l1_shift, label, &buf);
                }
            }
        }

        let inv_n = T::one() / T::from_count(acc.count);
        let lr = config.rate(step);
        // Coefficient of sign(w) in the data-term gradient; nonnegative.
        let l1_coef = -eps * acc.slope_sum * inv_n;
        let shrink = T::one() / (T::one() + lr * config.lambda);
        for (w, &g) in weights.iter_mut().zip(&acc.grad) {
            let g = g * inv_n;
            let moved = match config.l1_update {
                L1Update::Subgradient => *w - lr * (g + l1_coef * sign0(*w)),
                L1Update::Proximal => {
                    let u = *w - lr * g;
                    sign0(u) * (u.abs() - lr * l1_coef).max(T::zero())
                }
            };
            *w = moved * shrink;
        }
        if config.fit_bias {
            bias -= lr * acc.bias * inv_n;
        }
        if let Some(radius) = config.norm_constraint {
            let norm = l2_norm(&weights);
            if norm > T::zero() {
                let scale = radius / norm;
                weights.iter_mut().for_each(|w| *w *= scale);
            }
        }
        if let Some(index) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::Divergence { step, index });
        }
        if !bias.is_finite() {
            return Err(Error::Divergence { step, index: dim });
        }
    }
    LinearClassifier::new(weights, bias)
}

/// Log-scale bisection settings for [`tune_lambda_unit_norm`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSearch {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub norm_lo: f64,
    pub norm_hi: f64,
    pub max_bisections: usize,
}

impl Default for LambdaSearch {
    fn default() -> Self {
        Self {
            lambda_lo: 1e-4,
            lambda_hi: 1e-1,
            norm_lo: 0.99,
            norm_hi: 1.01,
            max_bisections: 60,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaFit<T> {
    pub lambda: T,
    pub classifier: LinearClassifier<T>,
    pub norm: T,
    /// `(λ, ‖w‖₂)` for every training run, in evaluation order.
    pub probes: Vec<(f64, f64)>,
}

/// Finds `λ` whose trained hinge classifier has `‖w‖₂` inside the target
/// window by bisecting `ln λ`. Larger `λ` gives a smaller norm, so the lower
/// bracket end must overshoot the window and the upper end undershoot it.
pub fn tune_lambda_unit_norm<T: Scalar>(
    config: &TrainConfig<T>,
    params: &SyntheticParams<T>,
    search: &LambdaSearch,
) -> Result<LambdaFit<T>> {
    if config.loss_kind != LossKind::Hinge || config.data_source != DataSource::FreshSampler {
        return Err(Error::invalid(
            "lambda tuning expects hinge loss on a fresh sampler",
        ));
    }
    if !(search.lambda_lo > 0.0 && search.lambda_lo < search.lambda_hi) {
        return Err(Error::invalid("lambda bracket must satisfy 0 < lo < hi"));
    }
    let mut probes = Vec::new();
    let mut run = |lambda: f64| -> Result<(LinearClassifier<T>, f64)> {
        let cfg = TrainConfig {
            lambda: T::lit(lambda),
            ..config.clone()
        };
        let w = train(&cfg, TrainingData::Sampler(params))?;
        let norm = w.l2_norm().as_f64();
        probes.push((lambda, norm));
        Ok((w, norm))
    };
    let in_window = |norm: f64| norm >= search.norm_lo && norm <= search.norm_hi;
    let done =
        |lambda: f64, w: LinearClassifier<T>, norm: f64, probes: Vec<(f64, f64)>| LambdaFit {
            lambda: T::lit(lambda),
            classifier: w,
            norm: T::lit(norm),
            probes,
        };

    let (mut lo, mut hi) = (search.lambda_lo, search.lambda_hi);
    let (w_lo, mut n_lo) = run(lo)?;
    if in_window(n_lo) {
        return Ok(done(lo, w_lo, n_lo, probes));
    }
    let (w_hi, mut n_hi) = run(hi)?;
    if in_window(n_hi) {
        return Ok(done(hi, w_hi, n_hi, probes));
    }
    if n_lo < search.norm_hi || n_hi > search.norm_lo {
        return Err(Error::BracketFailure {
            lambda_lo: lo,
            lambda_hi: hi,
            norm_lo: n_lo,
            norm_hi: n_hi,
            iterations: 0,
        });
    }
    for _ in 0..search.max_bisections {
        let mid = (lo * hi).sqrt();
        let (w, norm) = run(mid)?;
        if in_window(norm) {
            return Ok(done(mid, w, norm, probes));
        }
        if norm > search.norm_hi {
            lo = mid;
            n_lo = norm;
        } else {
            hi = mid;
            n_hi = norm;
        }
    }
    Err(Error::BracketFailure {
        lambda_lo: lo,
        lambda_hi: hi,
        norm_lo: n_lo,
        norm_hi: n_hi,
        iterations: search.max_bisections,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig<T> {
    pub steps: usize,
    pub step_size: T,
    pub random_init: bool,
    pub threat: ThreatModel<T>,
}

impl<T: Scalar> AttackConfig<T> {
    /// 40 steps of size `2.5·ε/40` from a random start.
    pub fn new(threat: ThreatModel<T>) -> Self {
        let steps = 40;
        Self {
            steps,
            step_size: T::lit(2.5) * threat.epsilon() / T::from_count(steps),
            random_init: true,
            threat,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::invalid("attack needs at least one step"));
        }
        if !(self.step_size >= T::zero() && self.step_size.is_finite()) {
            return Err(Error::invalid("attack step size must be nonnegative"));
        }
        Ok(())
    }
}

/// ℓ∞ PGD on the standard loss: `x ← Π(x + α·sign(∇ₓ loss))`, where `Π`
/// clamps each coordinate to its ε-interval around the clean point
/// intersected with the box. Returns the highest-loss iterate seen (ties go
/// to the smaller margin). The clean point is an iterate unless
/// `random_init` is set.
///
/// On the hinge's flat region the loss gradient vanishes; the step then
/// follows the margin-decreasing direction, which never lowers either loss.
pub fn pgd_attack<T: Scalar, R: Rng + ?Sized>(
    w: &LinearClassifier<T>,
    x: &LabeledSample<T>,
    kind: LossKind,
    ac: &AttackConfig<T>,
    rng: &mut R,
) -> Result<LabeledSample<T>> {
    ac.validate()?;
    w.check_dim(x.dim())?;
    let tm = &ac.threat;
    let eps = tm.epsilon();
    if eps == T::zero() {
        return Ok(x.clone());
    }
    let y = x.label.sign::<T>();
    let intervals: Vec<Option<(T, T)>> = x.features.iter().map(|&v| tm.feasible(v)).collect();
    let project = |cur: &mut [T]| {
        for (v, iv) in cur.iter_mut().zip(&intervals) {
            if let Some((lo, hi)) = *iv {
                *v = v.max(lo).min(hi);
            }
        }
    };

    let mut cur = x.features.clone();
    if ac.random_init {
        for v in cur.iter_mut() {
            *v += eps * (T::lit(2.0) * T::unit_uniform(rng) - T::one());
        }
        project(&mut cur);
    }
    let evaluate = |p: &[T]| {
        let m = y * w.score(p);
        (loss_value(kind, m), m)
    };
    let (mut best_loss, mut best_margin) = evaluate(&cur);
    let mut best = cur.clone();

    for _ in 0..ac.steps {
        let m = y * w.score(&cur);
        let s = loss_slope(kind, m);
        // ∇ₓ loss = s·y·w with s ≤ 0; fall back to −y·w where s = 0.
        let dir_scale = if s == T::zero() { -y } else { s * y };
        for (v, &wi) in cur.iter_mut().zip(w.weights()) {
            *v += ac.step_size * sign0(dir_scale * wi);
        }
        project(&mut cur);
        let (loss, margin) = evaluate(&cur);
        if loss > best_loss || (loss == best_loss && margin < best_margin) {
            best_loss = loss;
            best_margin = margin;
            best.copy_from_slice(&cur);
        }
    }
    Ok(LabeledSample::new(x.label, best))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferAttack {
    /// `x_i − ε·y` on every weak feature; the same for every classifier.
    FeatureShift,
    /// Exact worst-case ℓ∞ attack against the source classifier.
    PerClassifierExact,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferOptions {
    pub attack: TransferAttack,
    pub test_size: usize,
    /// Training-set size when the config trains on a fixed dataset.
    pub train_size: usize,
}

impl Default for TransferOptions {
    fn default() -> Self {
        Self {
            attack: TransferAttack::FeatureShift,
            test_size: 10_000,
            train_size: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferResult<T> {
    /// `error[i][j]`: error of classifier `j` on examples crafted for `i`.
    pub error: Vec<Vec<T>>,
    pub clean_error: Vec<T>,
    pub classifiers: Vec<LinearClassifier<T>>,
}

impl<T: Scalar> TransferResult<T> {
    pub fn off_diagonal(&self) -> impl Iterator<Item = T> + '_ {
        self.error.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(move |(j, _)| *j != i)
                .map(|(_, &e)| e)
        })
    }

    pub fn diagonal(&self) -> impl Iterator<Item = T> + '_ {
        self.error.iter().enumerate().map(|(i, row)| row[i])
    }
}

/// Trains `k` standard classifiers on independent streams
/// (`streams::classifier(i)`), crafts adversarial copies of one shared clean
/// test set, and measures every classifier on every crafted set.
pub fn transfer_experiment<T: Scalar>(
    params: &SyntheticParams<T>,
    k: usize,
    config: &TrainConfig<T>,
    eps: T,
    options: &TransferOptions,
) -> Result<TransferResult<T>> {
    if k < 2 {
        return Err(Error::invalid(
            "transfer experiment needs at least two classifiers",
        ));
    }
    if config.robust_epsilon != T::zero() {
        return Err(Error::invalid(
            "transfer experiment expects standard training",
        ));
    }
    let tm = ThreatModel::linf(eps)?;
    let mut classifiers = Vec::with_capacity(k);
    for i in 0..k {
        let cfg = TrainConfig {
            stream_id: streams::classifier(i),
            ..config.clone()
        };
        let w = match cfg.data_source {
            DataSource::FreshSampler => train(&cfg, TrainingData::Sampler(params))?,
            DataSource::FixedDataset => {
                let ds = sample_dataset(params, options.train_size, cfg.stream_id)?;
                train(&cfg, TrainingData::Dataset(&ds))?
            }
        };
        classifiers.push(w);
    }

    let test = sample_dataset(params, options.test_size, streams::TEST)?;
    let error_rate = |w: &LinearClassifier<T>, data: &Dataset<T>| -> Result<T> {
        Ok(T::one() - w.accuracy(data)?)
    };
    let clean_error = classifiers
        .iter()
        .map(|w| error_rate(w, &test))
        .collect::<Result<Vec<_>>>()?;

    let shifted = match options.attack {
        TransferAttack::FeatureShift => {
            Some(test.map_features(|s| feature_shift_attack(s, eps).features)?)
        }
        TransferAttack::PerClassifierExact => None,
    };
    let mut error = Vec::with_capacity(k);
    for source in &classifiers {
        let crafted = match &shifted {
            Some(ds) => ds.clone(),
            None => test.map_features(|s| exact_linear_attack(source, s, &tm).features)?,
        };
        let row = classifiers
            .iter()
            .map(|target| error_rate(target, &crafted))
            .collect::<Result<Vec<_>>>()?;
        error.push(row);
    }
    Ok(TransferResult {
        error,
        clean_error,
        classifiers,
    })
}

/// Output of [`run_theorem2`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Run<T> {
    pub standard: LambdaFit<T>,
    pub robust: LinearClassifier<T>,
    pub certificate: Theorem2Certificate<T>,
}

/// Standard SVM with `λ` tuned to unit norm, adversarial SVM on the unit
/// sphere at `eps`, and the closed-form certificate of the pair.
pub fn run_theorem2<T: Scalar>(
    params: &SyntheticParams<T>,
    eps: T,
    seed: u64,
    steps: usize,
) -> Result<Theorem2Run<T>> {
    check_theorem2_hypotheses(params, eps)?;
    let std_cfg = TrainConfig {
        steps,
        ..TrainConfig::synthetic_svm(T::lit(LambdaSearch::default().lambda_lo), seed)
    };
    let standard = tune_lambda_unit_norm(&std_cfg, params, &LambdaSearch::default())?;
    let rob_cfg = TrainConfig {
        steps,
        ..TrainConfig::synthetic_svm_unit_sphere(eps, seed)
    };
    let robust = train(&rob_cfg, TrainingData::Sampler(params))?;
    let certificate = certify_theorem2(
        &standard.classifier,
        &robust,
        params,
        eps,
        T::lit(THEOREM2_TOL),
    )?;
    Ok(Theorem2Run {
        standard,
        robust,
        certificate,
    })
}
