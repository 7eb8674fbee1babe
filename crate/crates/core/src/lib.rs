//! Exact oracles, training and experiments for the robustness/accuracy
//! trade-off of linear classifiers on a synthetic robust-plus-weak-features
//! distribution and on binary MNIST.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix `f64`, which every experiment uses.

// Guards like `!(a < b)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distribution;
pub mod error;
pub mod mnist;
pub mod report;
pub mod scalar;
pub mod special;
pub mod streams;
pub mod theory;
pub mod training;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type LinearClassifier = distribution::LinearClassifier<f64>;
pub type LabeledSample = distribution::LabeledSample<f64>;
pub type Dataset = distribution::Dataset<f64>;
pub type SyntheticParams = distribution::SyntheticParams<f64>;
pub type ThreatModel = distribution::ThreatModel<f64>;
pub type ConfusionProbs = theory::ConfusionProbs<f64>;
pub type TrainConfig = training::TrainConfig<f64>;
pub type AttackConfig = training::AttackConfig<f64>;
pub type BinaryTask = mnist::BinaryTask<f64>;

pub type LinearClassifierF32 = distribution::LinearClassifier<f32>;
pub type DatasetF32 = distribution::Dataset<f32>;
pub type SyntheticParamsF32 = distribution::SyntheticParams<f32>;
pub type TrainConfigF32 = training::TrainConfig<f32>;
