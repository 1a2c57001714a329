//! Minimum-distance classifiers on SPD features, with a geodesic transfer
//! rule for borrowing class means from other subjects.
//!
//! The base classifier is MDM (minimum distance to mean): fit one Fréchet
//! mean per class, then assign a query matrix to the class whose mean is
//! nearest in the Riemannian metric. The transfer variant, MDWM, pulls each
//! target-subject class mean S_k toward a class mean D_k pooled from source
//! subjects, along the geodesic:
//!
//! ```text
//! A_k = S_k #_λ D_k,   λ ∈ [0, 1]
//! ```
//!
//! λ = 0 keeps the target means (no transfer); λ = 1 uses the source means
//! alone (calibration-free). Source means weight subjects, not trials: each
//! trial carries its subject's weight divided by that subject's per-class
//! trial count.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::features::ClassLabel;
use crate::spd::{frechet_mean, geodesic, riemann_distance, ManifoldError, SpdMatrix};
use thiserror::Error;

/// Errors from fitting, combining, predicting, and model persistence.
#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("training set is empty")]
    NoTrainingData,
    #[error("need at least 2 classes, got {classes}")]
    TooFewClasses { classes: usize },
    #[error("class {label:?} has no training samples")]
    EmptyClass { label: ClassLabel },
    #[error("feature dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("class-label sets differ: {left:?} vs {right:?}")]
    LabelSetMismatch {
        left: Vec<ClassLabel>,
        right: Vec<ClassLabel>,
    },
    #[error("interpolation position {lambda} is outside [0, 1]")]
    LambdaOutOfRange { lambda: f64 },
    #[error("subject weight {index} is {value}; weights must be finite and nonnegative")]
    InvalidSubjectWeight { index: usize, value: f64 },
    #[error("subject weights sum to {sum}, expected 1 within 1e-9")]
    WeightSumNotOne { sum: f64 },
    #[error("{weights} subject weights provided for {subjects} subjects")]
    WeightCountMismatch { weights: usize, subjects: usize },
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error("model i/o failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("model payload is invalid: {0}")]
    InvalidModel(String),
    #[error("unsupported model format version {found:?}, expected {expected:?}")]
    UnsupportedModelVersion { found: String, expected: String },
}

/// Trained state of an MDM/MDWM classifier: one SPD mean per class, in
/// lexicographic label order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMeans {
    means: BTreeMap<ClassLabel, SpdMatrix>,
}

impl ClassMeans {
    /// Build from per-class means; requires ≥ 2 classes of equal dimension.
    pub fn new(means: BTreeMap<ClassLabel, SpdMatrix>) -> Result<Self, ClassifierError> {
        if means.len() < 2 {
            return Err(ClassifierError::TooFewClasses {
                classes: means.len(),
            });
        }
        let dim = means.values().next().expect("non-empty").dim();
        for mean in means.values() {
            if mean.dim() != dim {
                return Err(ClassifierError::DimensionMismatch {
                    left: dim,
                    right: mean.dim(),
                });
            }
        }
        Ok(ClassMeans { means })
    }

    /// Feature dimension C.
    pub fn dim(&self) -> usize {
        self.means.values().next().expect("non-empty").dim()
    }

    /// Class labels in lexicographic order.
    pub fn labels(&self) -> impl Iterator<Item = &ClassLabel> {
        self.means.keys()
    }

    /// Number of classes K.
    pub fn class_count(&self) -> usize {
        self.means.len()
    }

    /// The mean of one class, if present.
    pub fn mean(&self, label: &str) -> Option<&SpdMatrix> {
        self.means.get(label)
    }

    /// (label, mean) pairs in lexicographic label order.
    pub fn iter(&self) -> impl Iterator<Item = (&ClassLabel, &SpdMatrix)> {
        self.means.iter()
    }
}

/// Transfer-rule parameters: geodesic position λ and per-source-subject
/// weights (a simplex vector; uniform by default).
#[derive(Debug, Clone, PartialEq)]
pub struct TransferParams {
    lambda: f64,
    subject_weights: Vec<f64>,
}

impl TransferParams {
    /// Validate λ ∈ [0,1] and a simplex weight vector.
    pub fn new(lambda: f64, subject_weights: Vec<f64>) -> Result<Self, ClassifierError> {
        if !lambda.is_finite() || !(0.0..=1.0).contains(&lambda) {
            return Err(ClassifierError::LambdaOutOfRange { lambda });
        }
        for (index, &value) in subject_weights.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(ClassifierError::InvalidSubjectWeight { index, value });
            }
        }
        let sum: f64 = subject_weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ClassifierError::WeightSumNotOne { sum });
        }
        Ok(TransferParams {
            lambda,
            subject_weights,
        })
    }

    /// Uniform weights over `subjects` source subjects.
    pub fn uniform(lambda: f64, subjects: usize) -> Result<Self, ClassifierError> {
        let weight = 1.0 / subjects.max(1) as f64;
        TransferParams::new(lambda, vec![weight; subjects])
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn subject_weights(&self) -> &[f64] {
        &self.subject_weights
    }
}

/// Fit per-class uniform-weight Fréchet means from labeled features.
pub fn fit_mdm(features: &[(SpdMatrix, ClassLabel)]) -> Result<ClassMeans, ClassifierError> {
    if features.is_empty() {
        return Err(ClassifierError::NoTrainingData);
    }
    let mut by_class: BTreeMap<&ClassLabel, Vec<&SpdMatrix>> = BTreeMap::new();
    for (feature, label) in features {
        by_class.entry(label).or_default().push(feature);
    }
    let mut means = BTreeMap::new();
    for (label, group) in by_class {
        let mats: Vec<SpdMatrix> = group.into_iter().cloned().collect();
        let weights = vec![1.0 / mats.len() as f64; mats.len()];
        let mean = frechet_mean(&mats, &weights)?;
        means.insert(label.clone(), mean);
    }
    ClassMeans::new(means)
}

/// Pool source subjects into per-class weighted Fréchet means.
///
/// `subject_features` holds one feature list per source subject. Within
/// class k, the trial weights are `w_s / m_{k,s}` (subject weight over that
/// subject's class-k trial count), normalized over the subjects that have
/// class k — so subjects, not trials, carry the weight.
pub fn fit_source_means(
    subject_features: &[Vec<(SpdMatrix, ClassLabel)>],
    subject_weights: &[f64],
) -> Result<ClassMeans, ClassifierError> {
    if subject_features.is_empty() || subject_features.iter().all(|f| f.is_empty()) {
        return Err(ClassifierError::NoTrainingData);
    }
    if subject_weights.len() != subject_features.len() {
        return Err(ClassifierError::WeightCountMismatch {
            weights: subject_weights.len(),
            subjects: subject_features.len(),
        });
    }
    for (index, &value) in subject_weights.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(ClassifierError::InvalidSubjectWeight { index, value });
        }
    }
    let sum: f64 = subject_weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(ClassifierError::WeightSumNotOne { sum });
    }

    // All labels seen anywhere in the pool.
    let mut labels: Vec<ClassLabel> = Vec::new();
    for features in subject_features {
        for (_, label) in features {
            if !labels.contains(label) {
                labels.push(label.clone());
            }
        }
    }
    labels.sort();

    let mut means = BTreeMap::new();
    for label in &labels {
        let mut mats = Vec::new();
        let mut weights = Vec::new();
        for (features, &subject_weight) in subject_features.iter().zip(subject_weights) {
            let class_features: Vec<&SpdMatrix> = features
                .iter()
                .filter(|(_, l)| l == label)
                .map(|(m, _)| m)
                .collect();
            if class_features.is_empty() {
                if subject_weight > 0.0 {
                    return Err(ClassifierError::EmptyClass {
                        label: label.clone(),
                    });
                }
                continue;
            }
            let per_trial = subject_weight / class_features.len() as f64;
            for mat in class_features {
                mats.push(mat.clone());
                weights.push(per_trial);
            }
        }
        // Zero-weight subjects may leave the weights summing below one
        // within this class; renormalize over the participating subjects.
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(ClassifierError::EmptyClass {
                label: label.clone(),
            });
        }
        for w in &mut weights {
            *w /= total;
        }
        means.insert(label.clone(), frechet_mean(&mats, &weights)?);
    }
    ClassMeans::new(means)
}

/// Pull each target class mean toward its source counterpart along the
/// geodesic: `A_k = S_k #_λ D_k` for every class k.
pub fn combine_mdwm(
    target: &ClassMeans,
    source: &ClassMeans,
    lambda: f64,
) -> Result<ClassMeans, ClassifierError> {
    let target_labels: Vec<ClassLabel> = target.labels().cloned().collect();
    let source_labels: Vec<ClassLabel> = source.labels().cloned().collect();
    if target_labels != source_labels {
        return Err(ClassifierError::LabelSetMismatch {
            left: target_labels,
            right: source_labels,
        });
    }
    if !lambda.is_finite() || !(0.0..=1.0).contains(&lambda) {
        return Err(ClassifierError::LambdaOutOfRange { lambda });
    }
    let mut means = BTreeMap::new();
    for (label, target_mean) in target.iter() {
        let source_mean = source.mean(label).expect("label sets match");
        if target_mean.dim() != source_mean.dim() {
            return Err(ClassifierError::DimensionMismatch {
                left: target_mean.dim(),
                right: source_mean.dim(),
            });
        }
        means.insert(label.clone(), geodesic(target_mean, source_mean, lambda)?);
    }
    ClassMeans::new(means)
}

/// Fit the transfer classifier: MDM on the target trials, then geodesic
/// combination with the source means at the configured λ.
///
/// At λ = 1 the target trials are unused and may be empty (the
/// calibration-free path returns the source means directly); at λ < 1 every
/// source class must appear in the target trials.
pub fn fit_mdwm(
    target_features: &[(SpdMatrix, ClassLabel)],
    source_means: &ClassMeans,
    params: &TransferParams,
) -> Result<ClassMeans, ClassifierError> {
    if params.lambda() == 1.0 {
        return Ok(source_means.clone());
    }
    let target = fit_mdm(target_features)?;
    for label in source_means.labels() {
        if target.mean(label).is_none() {
            return Err(ClassifierError::EmptyClass {
                label: label.clone(),
            });
        }
    }
    combine_mdwm(&target, source_means, params.lambda())
}

/// Assign a query matrix to the nearest class mean.
///
/// Returns the winning label and the per-class distances in lexicographic
/// label order. Ties break toward the smallest label, which makes the
/// decision deterministic.
pub fn predict_mdm<'a>(
    means: &'a ClassMeans,
    query: &SpdMatrix,
) -> Result<(&'a ClassLabel, Vec<f64>), ClassifierError> {
    if query.dim() != means.dim() {
        return Err(ClassifierError::DimensionMismatch {
            left: means.dim(),
            right: query.dim(),
        });
    }
    let mut distances = Vec::with_capacity(means.class_count());
    let mut best: Option<(&ClassLabel, f64)> = None;
    for (label, mean) in means.iter() {
        let d = riemann_distance(mean, query)?;
        // Strict inequality keeps the lexicographically first label on ties.
        if best.map(|(_, bd)| d < bd).unwrap_or(true) {
            best = Some((label, d));
        }
        distances.push(d);
    }
    Ok((best.expect("at least two classes").0, distances))
}

/// On-disk model container version written by [`save_model`].
pub const MODEL_FORMAT_VERSION: &str = "1";

/// Serializable model: label order, λ (if fitted with transfer), and the
/// per-class mean matrices.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
struct ModelFile {
    format_version: String,
    dim: usize,
    lambda: Option<f64>,
    /// (label, mean) pairs in lexicographic label order; matrices serialize
    /// row-major with exact round-trip of every f64.
    classes: Vec<(ClassLabel, SpdMatrix)>,
}

/// Write a trained model as versioned JSON. `lambda` records the transfer
/// position the model was built with, or `None` for a plain MDM fit.
pub fn save_model(
    writer: impl Write,
    means: &ClassMeans,
    lambda: Option<f64>,
) -> Result<(), ClassifierError> {
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION.to_owned(),
        dim: means.dim(),
        lambda,
        classes: means
            .iter()
            .map(|(label, mean)| (label.clone(), mean.clone()))
            .collect(),
    };
    serde_json::to_writer_pretty(writer, &file)
        .map_err(|e| ClassifierError::InvalidModel(e.to_string()))
}

/// Read a model written by [`save_model`]; round-trips are lossless.
pub fn load_model(reader: impl Read) -> Result<(ClassMeans, Option<f64>), ClassifierError> {
    let file: ModelFile = serde_json::from_reader(reader)
        .map_err(|e| ClassifierError::InvalidModel(e.to_string()))?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(ClassifierError::UnsupportedModelVersion {
            found: file.format_version,
            expected: MODEL_FORMAT_VERSION.to_owned(),
        });
    }
    let mut means = BTreeMap::new();
    for (label, mean) in file.classes {
        if mean.dim() != file.dim {
            return Err(ClassifierError::InvalidModel(format!(
                "class {label:?} has dimension {} but the header says {}",
                mean.dim(),
                file.dim
            )));
        }
        if means.insert(label.clone(), mean).is_some() {
            return Err(ClassifierError::InvalidModel(format!(
                "duplicate class label {label:?}"
            )));
        }
    }
    Ok((ClassMeans::new(means)?, file.lambda))
}
