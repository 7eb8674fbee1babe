//! Binary 5-vs-7 MNIST with linear models: IDX parsing, the binary task,
//! per-pixel label correlation, top-k feature sweeps and weight-map export.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distribution::{
    adversarial_accuracy, Dataset, Label, LabeledSample, LinearClassifier, ThreatModel,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::training::{train, L1Update, TrainConfig, TrainingData};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const SIDE: usize = 28;
pub const PIXELS: usize = SIDE * SIDE;
pub const NEGATIVE_DIGIT: u8 = 5;
pub const POSITIVE_DIGIT: u8 = 7;
pub const DEFAULT_EPSILON: f64 = 0.2;

pub const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
pub const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
pub const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
pub const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

/// An unsigned-byte IDX tensor in row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxTensor {
    dims: Vec<usize>,
    data: Vec<u8>,
}

impl IdxTensor {
    pub fn new(dims: Vec<usize>, data: Vec<u8>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::IdxShape(format!(
                "dimensions must be positive, got {dims:?}"
            )));
        }
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::IdxOverflow(dims.iter().map(|&d| d as u32).collect()))?;
        if len != data.len() {
            return Err(Error::IdxShape(format!(
                "dimensions {dims:?} need {len} bytes, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Length of the leading dimension.
    pub fn count(&self) -> usize {
        self.dims[0]
    }

    /// Bytes per entry of the leading dimension.
    pub fn item_len(&self) -> usize {
        self.dims[1..].iter().product()
    }

    pub fn item(&self, i: usize) -> &[u8] {
        let n = self.item_len();
        &self.data[i * n..(i + 1) * n]
    }

    /// Serialises back to the IDX byte format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 4 * self.dims.len() + self.data.len());
        out.extend_from_slice(&(0x0800u32 | self.dims.len() as u32).to_be_bytes());
        for &d in &self.dims {
            out.extend_from_slice(&(d as u32).to_be_bytes());
        }
        out.extend_from_slice(&self.data);
        out
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    let word = bytes.get(at..at + 4).ok_or(Error::IdxTruncated {
        needed: at + 4,
        available: bytes.len(),
    })?;
    Ok(u32::from_be_bytes([word[0], word[1], word[2], word[3]]))
}

/// Parses an IDX image (`0x803`, three dimensions) or label (`0x801`, one
/// dimension) file. Trailing bytes beyond the declared size are rejected.
pub fn parse_idx_bytes(bytes: &[u8]) -> Result<IdxTensor> {
    let magic = be_u32(bytes, 0)?;
    let ndim = match magic {
        IMAGE_MAGIC => 3,
        LABEL_MAGIC => 1,
        other => return Err(Error::IdxMagic(other)),
    };
    let raw: Vec<u32> = (0..ndim)
        .map(|i| be_u32(bytes, 4 + 4 * i))
        .collect::<Result<_>>()?;
    let header = 4 + 4 * ndim;
    let len = raw
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
        .and_then(|n| n.checked_add(header))
        .ok_or_else(|| Error::IdxOverflow(raw.clone()))?;
    if bytes.len() < len {
        return Err(Error::IdxTruncated {
            needed: len,
            available: bytes.len(),
        });
    }
    if bytes.len() > len {
        return Err(Error::IdxShape(format!(
            "{} trailing bytes after the declared data",
            bytes.len() - len
        )));
    }
    IdxTensor::new(
        raw.iter().map(|&d| d as usize).collect(),
        bytes[header..].to_vec(),
    )
}

pub fn parse_idx(path: impl AsRef<Path>) -> Result<IdxTensor> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_idx_bytes(&bytes)
}

/// Digit 5 is labelled −1 and digit 7 is +1; pixels are scaled to [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryTask<T> {
    pub train: Dataset<T>,
    pub test: Dataset<T>,
    pub positive_digit: u8,
    pub negative_digit: u8,
}

impl<T: Scalar> BinaryTask<T> {
    pub fn feature_dim(&self) -> usize {
        self.train.feature_dim()
    }
}

fn binary_split<T: Scalar>(images: &IdxTensor, labels: &IdxTensor) -> Result<Dataset<T>> {
    if images.dims().len() != 3 || labels.dims().len() != 1 {
        return Err(Error::IdxShape(format!(
            "expected 3-D images and 1-D labels, got {:?} and {:?}",
            images.dims(),
            labels.dims()
        )));
    }
    if images.count() != labels.count() {
        return Err(Error::IdxShape(format!(
            "{} images but {} labels",
            images.count(),
            labels.count()
        )));
    }
    let dim = images.item_len();
    let scale = T::lit(255.0);
    let mut data = Dataset::new(dim);
    let (mut negatives, mut positives) = (0usize, 0usize);
    for (i, &digit) in labels.data().iter().enumerate() {
        let label = match digit {
            NEGATIVE_DIGIT => {
                negatives += 1;
                Label::Negative
            }
            POSITIVE_DIGIT => {
                positives += 1;
                Label::Positive
            }
            _ => continue,
        };
        let features = images
            .item(i)
            .iter()
            .map(|&b| T::from_count(b as usize) / scale)
            .collect();
        data.push(LabeledSample::new(label, features))?;
    }
    if negatives == 0 {
        return Err(Error::EmptyClass(NEGATIVE_DIGIT));
    }
    if positives == 0 {
        return Err(Error::EmptyClass(POSITIVE_DIGIT));
    }
    Ok(data)
}

/// Keeps the 5s and 7s of both splits in their original order.
pub fn build_binary_task<T: Scalar>(
    images: &IdxTensor,
    labels: &IdxTensor,
    test_images: &IdxTensor,
    test_labels: &IdxTensor,
) -> Result<BinaryTask<T>> {
    let train = binary_split(images, labels)?;
    let test = binary_split(test_images, test_labels)?;
    if train.feature_dim() != test.feature_dim() {
        return Err(Error::DimensionMismatch {
            expected: train.feature_dim(),
            got: test.feature_dim(),
        });
    }
    Ok(BinaryTask {
        train,
        test,
        positive_digit: POSITIVE_DIGIT,
        negative_digit: NEGATIVE_DIGIT,
    })
}

/// Loads the four standard (uncompressed) MNIST files from `dir`.
pub fn load_binary_task<T: Scalar>(dir: impl AsRef<Path>) -> Result<BinaryTask<T>> {
    let dir = dir.as_ref();
    build_binary_task(
        &parse_idx(dir.join(TRAIN_IMAGES))?,
        &parse_idx(dir.join(TRAIN_LABELS))?,
        &parse_idx(dir.join(TEST_IMAGES))?,
        &parse_idx(dir.join(TEST_LABELS))?,
    )
}

/// `|mean over the training set of y·xᵢ|` for every pixel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationProfile<T> {
    pub values: Vec<T>,
}

pub fn correlation_profile<T: Scalar>(task: &BinaryTask<T>) -> Result<CorrelationProfile<T>> {
    let train = &task.train;
    if train.is_empty() {
        return Err(Error::invalid("correlation needs a nonempty training set"));
    }
    let mut sums = vec![T::zero(); train.feature_dim()];
    for s in train {
        let y = s.label.sign::<T>();
        for (acc, &x) in sums.iter_mut().zip(&s.features) {
            *acc += y * x;
        }
    }
    let n = T::from_count(train.len());
    Ok(CorrelationProfile {
        values: sums.into_iter().map(|v| (v / n).abs()).collect(),
    })
}

/// Mask of the `k` most correlated features; ties go to the lower index,
/// so masks for increasing `k` are nested.
pub fn select_top_k<T: Scalar>(profile: &CorrelationProfile<T>, k: usize) -> Result<Vec<bool>> {
    let n = profile.values.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k must be in 1..={n}, got {k}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        profile.values[b]
            .partial_cmp(&profile.values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut mask = vec![false; n];
    for &i in &order[..k] {
        mask[i] = true;
    }
    Ok(mask)
}

/// Zeroes the features outside `mask`.
pub fn apply_mask<T: Scalar>(data: &Dataset<T>, mask: &[bool]) -> Result<Dataset<T>> {
    if mask.len() != data.feature_dim() {
        return Err(Error::DimensionMismatch {
            expected: data.feature_dim(),
            got: mask.len(),
        });
    }
    data.map_features(|s| {
        s.features
            .iter()
            .zip(mask)
            .map(|(&x, &keep)| if keep { x } else { T::zero() })
            .collect()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub k: usize,
    pub standard_accuracy: T,
    pub robust_accuracy: T,
}

/// Trains on the top-`k` correlated pixels for each `k` and evaluates on the
/// masked test set, robustly under the exact attack in the box `[0, 1]`.
pub fn threshold_sweep<T: Scalar>(
    task: &BinaryTask<T>,
    ks: &[usize],
    config: &TrainConfig<T>,
    eval_eps: T,
) -> Result<Vec<SweepRow<T>>> {
    if config.robust_epsilon != T::zero() {
        return Err(Error::invalid("the sweep trains standard models only"));
    }
    let profile = correlation_profile(task)?;
    let tm = ThreatModel::boxed(eval_eps, T::zero(), T::one())?;
    ks.iter()
        .map(|&k| {
            let mask = select_top_k(&profile, k)?;
            let train_k = apply_mask(&task.train, &mask)?;
            let test_k = apply_mask(&task.test, &mask)?;
            let w = train(config, TrainingData::Dataset(&train_k))?;
            Ok(SweepRow {
                k,
                standard_accuracy: w.accuracy(&test_k)?,
                robust_accuracy: adversarial_accuracy(&w, &test_k, &tm)?,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryMnistOptions<T> {
    pub epsilon: T,
    pub config: TrainConfig<T>,
}

impl<T: Scalar> BinaryMnistOptions<T> {
    /// Full-batch logistic regression, ε = 0.2, with the ℓ₁ part of the
    /// robust margin applied by soft-thresholding.
    pub fn new(seed: u64) -> Self {
        Self {
            epsilon: T::lit(DEFAULT_EPSILON),
            config: TrainConfig {
                l1_update: L1Update::Proximal,
                ..TrainConfig::full_batch_logistic(seed)
            },
        }
    }
}

/// Accuracies of one trained model. Adversarial accuracies use the exact
/// attack, clamped to the pixel box `[0, 1]` or not (`_unboxed`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryMnistMetrics<T> {
    pub train_standard: T,
    pub train_adversarial: T,
    pub test_standard: T,
    pub test_adversarial: T,
    pub train_adversarial_unboxed: T,
    pub test_adversarial_unboxed: T,
    pub l1_norm: T,
}

pub fn evaluate_binary<T: Scalar>(
    w: &LinearClassifier<T>,
    task: &BinaryTask<T>,
    epsilon: T,
) -> Result<BinaryMnistMetrics<T>> {
    let boxed = ThreatModel::boxed(epsilon, T::zero(), T::one())?;
    let open = ThreatModel::linf(epsilon)?;
    Ok(BinaryMnistMetrics {
        train_standard: w.accuracy(&task.train)?,
        train_adversarial: adversarial_accuracy(w, &task.train, &boxed)?,
        test_standard: w.accuracy(&task.test)?,
        test_adversarial: adversarial_accuracy(w, &task.test, &boxed)?,
        train_adversarial_unboxed: adversarial_accuracy(w, &task.train, &open)?,
        test_adversarial_unboxed: adversarial_accuracy(w, &task.test, &open)?,
        l1_norm: w.l1_norm(),
    })
}

/// Trains the standard (`robust = false`) or adversarially trained model
/// on the whole training split and evaluates it.
pub fn run_binary_mnist<T: Scalar>(
    task: &BinaryTask<T>,
    robust: bool,
    options: &BinaryMnistOptions<T>,
) -> Result<(LinearClassifier<T>, BinaryMnistMetrics<T>)> {
    let eps = if robust { options.epsilon } else { T::zero() };
    let config = options.config.clone().robust(eps);
    let w = train(&config, TrainingData::Dataset(&task.train))?;
    let metrics = evaluate_binary(&w, task, options.epsilon)?;
    Ok((w, metrics))
}

/// Counts how many low-correlation pixels a model effectively ignores.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightAlignment {
    /// Pixels with correlation below the threshold.
    pub region: usize,
    /// Of those, pixels with `|wᵢ| < rel·max|w|`.
    pub negligible: usize,
}

impl WeightAlignment {
    pub fn negligible_fraction(&self) -> f64 {
        if self.region == 0 {
            1.0
        } else {
            self.negligible as f64 / self.region as f64
        }
    }

    pub fn significant(&self) -> usize {
        self.region - self.negligible
    }
}

pub fn weight_alignment<T: Scalar>(
    w: &LinearClassifier<T>,
    profile: &CorrelationProfile<T>,
    threshold: T,
    rel: T,
) -> Result<WeightAlignment> {
    w.check_dim(profile.values.len())?;
    let cutoff = rel * w.weights().iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let mut out = WeightAlignment {
        region: 0,
        negligible: 0,
    };
    for (&c, &wi) in profile.values.iter().zip(w.weights()) {
        if c < threshold {
            out.region += 1;
            if wi.abs() < cutoff {
                out.negligible += 1;
            }
        }
    }
    Ok(out)
}

/// Affine map of `values` onto 0..=255 (min → 0, max → 255); constant
/// input maps to 128.
pub fn grey_levels<T: Scalar>(values: &[T]) -> Vec<u8> {
    let lo = values.iter().fold(T::infinity(), |m, &v| m.min(v));
    let hi = values.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    if !(hi > lo) {
        return vec![128; values.len()];
    }
    let span = (hi - lo).as_f64();
    values
        .iter()
        .map(|&v| (255.0 * (v - lo).as_f64() / span).round().clamp(0.0, 255.0) as u8)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightGridFiles {
    pub csv: PathBuf,
    pub pgm: PathBuf,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Writes the 784 weights as a 28×28 grid to `<stem>.csv` (shortest
/// round-trip decimal) and `<stem>.pgm` (binary P5, maxval 255).
pub fn export_weight_grid<T: Scalar>(
    w: &LinearClassifier<T>,
    stem: impl AsRef<Path>,
) -> Result<WeightGridFiles> {
    if w.dim() != PIXELS {
        return Err(Error::WeightGrid(format!(
            "expected {PIXELS} weights, got {}",
            w.dim()
        )));
    }
    let stem = stem.as_ref();
    let files = WeightGridFiles {
        csv: stem.with_extension("csv"),
        pgm: stem.with_extension("pgm"),
    };
    let mut csv = String::new();
    for row in w.weights().chunks(SIDE) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        csv.push_str(&line.join(","));
        csv.push('\n');
    }
    write_file(&files.csv, csv.as_bytes())?;

    let mut pgm = format!("P5\n{SIDE} {SIDE}\n255\n").into_bytes();
    pgm.extend(grey_levels(w.weights()));
    write_file(&files.pgm, &pgm)?;
    Ok(files)
}

/// Reads a grid written by [`export_weight_grid`] in row-major order.
pub fn read_weight_grid_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::with_capacity(PIXELS);
    for (r, line) in text.lines().enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse()
                    .map_err(|_| Error::WeightGrid(format!("row {r}: cannot parse {cell:?}")))
            })
            .collect::<Result<_>>()?;
        if row.len() != SIDE {
            return Err(Error::WeightGrid(format!(
                "row {r} has {} cells",
                row.len()
            )));
        }
        out.extend(row);
    }
    if out.len() != PIXELS {
        return Err(Error::WeightGrid(format!("{} rows", out.len() / SIDE)));
    }
    Ok(out)
}

/// Reads a binary P5 PGM with maxval 255 as `(width, height, pixels)`.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<u8>)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |msg: &str| Error::WeightGrid(format!("{}: {msg}", path.display()));
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(bad("not a P5 file with maxval 255"));
    }
    let width: usize = fields[1].parse().map_err(|_| bad("bad width"))?;
    let height: usize = fields[2].parse().map_err(|_| bad("bad height"))?;
    let data = bytes.get(pos + 1..).unwrap_or_default();
    if data.len() != width * height {
        return Err(bad("pixel count does not match header"));
    }
    Ok((width, height, data.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn images(n: usize, fill: impl Fn(usize, usize) -> u8) -> IdxTensor {
        let data = (0..n)
            .flat_map(|i| (0..PIXELS).map(move |j| (i, j)))
            .map(|(i, j)| fill(i, j))
            .collect();
        IdxTensor::new(vec![n, SIDE, SIDE], data).unwrap()
    }

    fn labels(digits: &[u8]) -> IdxTensor {
        IdxTensor::new(vec![digits.len()], digits.to_vec()).unwrap()
    }

    #[test]
    fn idx_round_trip_and_errors() {
        let t = labels(&[5, 7, 1]);
        assert_eq!(parse_idx_bytes(&t.to_bytes()).unwrap(), t);
        let img = images(2, |i, j| (i + j) as u8);
        assert_eq!(parse_idx_bytes(&img.to_bytes()).unwrap(), img);

        let mut bytes = t.to_bytes();
        bytes[..4].copy_from_slice(&[0, 0, 0, 0]);
        assert!(matches!(parse_idx_bytes(&bytes), Err(Error::IdxMagic(0))));

        let bytes = t.to_bytes();
        assert!(matches!(
            parse_idx_bytes(&bytes[..bytes.len() - 1]),
            Err(Error::IdxTruncated { .. })
        ));
        assert!(matches!(
            parse_idx_bytes(&[0, 0]),
            Err(Error::IdxTruncated { .. })
        ));

        let mut huge = IMAGE_MAGIC.to_be_bytes().to_vec();
        for _ in 0..3 {
            huge.extend_from_slice(&u32::MAX.to_be_bytes());
        }
        assert!(matches!(parse_idx_bytes(&huge), Err(Error::IdxOverflow(_))));

        let mut long = t.to_bytes();
        long.push(0);
        assert!(matches!(parse_idx_bytes(&long), Err(Error::IdxShape(_))));
    }

    #[test]
    fn binary_task_filters_and_scales() {
        let img = images(4, |i, _| [255, 0, 10, 51][i]);
        let lab = labels(&[5, 3, 7, 5]);
        let task = build_binary_task::<f64>(&img, &lab, &img, &lab).unwrap();
        assert_eq!(task.train.len(), 3);
        let s = task.train.samples();
        assert_eq!(s[0].label, Label::Negative);
        assert_eq!(s[0].features[0], 1.0);
        assert_eq!(s[1].label, Label::Positive);
        assert_eq!(s[1].features[5], 10.0 / 255.0);
        assert_eq!(s[2].features[0], 0.2);
    }

    #[test]
    fn empty_class_is_reported() {
        let img = images(3, |_, _| 0);
        let lab = labels(&[5, 5, 5]);
        assert!(matches!(
            build_binary_task::<f64>(&img, &lab, &img, &lab),
            Err(Error::EmptyClass(7))
        ));
        let lab = labels(&[5, 5]);
        assert!(build_binary_task::<f64>(&img, &lab, &img, &lab).is_err());
    }

    #[test]
    fn correlation_examples() {
        // Pixel 0 equals the label bit, pixel 1 is always dark.
        let img = images(4, |i, j| if j == 0 && i % 2 == 1 { 255 } else { 0 });
        let lab = labels(&[5, 7, 5, 7]);
        let task = build_binary_task::<f64>(&img, &lab, &img, &lab).unwrap();
        let prof = correlation_profile(&task).unwrap();
        assert_eq!(prof.values[0], 0.5);
        assert_eq!(prof.values[1], 0.0);
        assert_eq!(
            select_top_k(&prof, 1).unwrap().iter().position(|&b| b),
            Some(0)
        );
        assert!(select_top_k(&prof, PIXELS).unwrap().iter().all(|&b| b));
        assert!(select_top_k(&prof, 0).is_err());
        // Ties are broken by index: the next pick after pixel 0 is pixel 1.
        let m2 = select_top_k(&prof, 2).unwrap();
        assert!(m2[0] && m2[1] && !m2[2]);
    }

    #[test]
    fn grey_level_mapping() {
        assert_eq!(grey_levels(&[0.0_f64; 5]), vec![128; 5]);
        assert_eq!(grey_levels(&[-1.0_f64, 0.0, 1.0]), vec![0, 128, 255]);
    }

    #[test]
    fn weight_grid_files() {
        let dir = tempfile::tempdir().unwrap();
        let w = LinearClassifier::<f64>::basis(PIXELS, 0);
        let files = export_weight_grid(&w, dir.path().join("e0")).unwrap();
        let (wd, ht, px) = read_pgm(&files.pgm).unwrap();
        assert_eq!((wd, ht), (SIDE, SIDE));
        assert_eq!(px[0], 255);
        assert!(px[1..].iter().all(|&v| v == 0));

        let zero = LinearClassifier::<f64>::zeros(PIXELS);
        let files = export_weight_grid(&zero, dir.path().join("zero")).unwrap();
        assert!(read_pgm(&files.pgm).unwrap().2.iter().all(|&v| v == 128));

        let weights: Vec<f64> = (0..PIXELS)
            .map(|i| (i as f64 * 0.37).sin() / 3.0 + 1e-17 * i as f64)
            .collect();
        let w = LinearClassifier::from_weights(weights.clone()).unwrap();
        let files = export_weight_grid(&w, dir.path().join("w")).unwrap();
        assert_eq!(read_weight_grid_csv(&files.csv).unwrap(), weights);

        assert!(
            export_weight_grid(&LinearClassifier::<f64>::zeros(3), dir.path().join("x")).is_err()
        );
        assert!(export_weight_grid(&w, dir.path().join("missing/dir/w")).is_err());
    }
}
