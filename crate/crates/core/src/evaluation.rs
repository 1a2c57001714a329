//! Cross-subject transfer evaluation: leave-one-subject-out, n calibration
//! trials, a λ grid, repeated subsampling, balanced-accuracy scoring.
//!
//! For every subject taken as transfer target, the remaining subjects form
//! the source pool and their class means are fitted once. Then, for each
//! calibration size n, each repetition draws a class-stratified split of the
//! target's trials into n calibration trials and a held-out test set; target
//! means are fitted on the calibration trials, combined with the source
//! means at each λ on the grid, and scored on the test set. Results land in
//! a long-form [`ScoreTable`], one row per
//! (subject, pipeline, n, λ, repetition).
//!
//! Everything is reproducible: split draws come from per-(subject,
//! repetition) substreams of the master seed, evaluation cells are
//! independent, and the table is sorted canonically after the parallel
//! gather, so the output is identical for any worker count.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::classifiers::{
    combine_mdwm, fit_mdm, fit_source_means, predict_mdm, ClassMeans, ClassifierError,
};
use crate::datasets::{Dataset, SubjectRecord};
use crate::features::{
    class_prototype, erp_augment, filter_bank_augment, sample_covariance, ClassLabel, FeatureError,
    ParadigmConfig, Trial,
};
use crate::seeding::{derive_seed, fnv1a64, STREAM_CALIBRATION_SPLIT};

/// Exact header line of the persisted score table.
pub const SCORE_TABLE_HEADER: &str =
    "dataset,subject,pipeline,n_train,lambda,repetition,balanced_accuracy,train_seconds,test_seconds";

/// Errors from protocol validation and execution.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid evaluation config: {detail}")]
    InvalidEvalConfig { detail: String },
    #[error("target subject index {index} out of range for {subjects} subjects")]
    TargetOutOfRange { index: usize, subjects: usize },
    #[error("n={n} calibration trials infeasible for subject {subject_id:?}: {detail}")]
    InfeasibleTrainCount {
        subject_id: String,
        n: usize,
        detail: String,
    },
    #[error("balanced accuracy needs matching label counts, got {truth} truths vs {predicted} predictions")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("balanced accuracy of an empty label list")]
    EmptyLabels,
    #[error("balanced accuracy {value} outside [0, 1]")]
    InvalidScore { value: f64 },
    #[error("evaluation failed at {cell}: {source}")]
    CellFailed {
        cell: CellRef,
        #[source]
        source: Box<EvalError>,
    },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("score table i/o failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed score table at line {line}: {detail}")]
    MalformedTable { line: usize, detail: String },
}

/// Coordinates of one evaluation cell, for error annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRef {
    pub subject: String,
    pub n_train: usize,
    pub lambda: Option<f64>,
    pub repetition: usize,
}

impl fmt::Display for CellRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "target {}, n={}, lambda=", self.subject, self.n_train)?;
        match self.lambda {
            Some(lambda) => write!(f, "{lambda}")?,
            None => write!(f, "-")?,
        }
        write!(f, ", repetition={}", self.repetition)
    }
}

/// The two classifier pipelines the protocol compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    /// Geodesic combination of target and source means at the row's λ.
    Mdwm,
    /// Target-subject means only; λ-independent, emitted once per λ cell so
    /// both pipelines share coordinates.
    MdmTargetOnly,
}

impl Pipeline {
    /// Name used in the `pipeline` column of the score table.
    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::Mdwm => "mdwm",
            Pipeline::MdmTargetOnly => "mdm-target-only",
        }
    }
}

/// Protocol parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvalConfig {
    /// Calibration sizes n to evaluate.
    pub n_train: Vec<usize>,
    /// Geodesic positions λ to evaluate.
    pub lambdas: Vec<f64>,
    /// Random calibration/test splits per (subject, n).
    pub repetitions: usize,
    /// Master seed; split draws derive from it per (subject, repetition).
    pub seed: u64,
    pub pipelines: Vec<Pipeline>,
    pub paradigm: ParadigmConfig,
    /// Covariance shrinkage γ.
    pub shrinkage: f64,
    /// Record wall-clock fit/predict times. Off by default: timing values
    /// are irreproducible by nature, and the default all-zero columns keep
    /// rerun outputs byte-identical.
    pub measure_time: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            n_train: vec![5, 30, 55],
            lambdas: vec![0.0, 0.1, 0.3, 0.7],
            repetitions: 10,
            seed: 7,
            pipelines: vec![Pipeline::Mdwm, Pipeline::MdmTargetOnly],
            paradigm: ParadigmConfig::Plain,
            shrinkage: 0.05,
            measure_time: false,
        }
    }
}

impl EvalConfig {
    /// Validate the grids and their feasibility against a dataset.
    pub fn validate(&self, dataset: &Dataset) -> Result<(), EvalError> {
        let fail = |detail: String| Err(EvalError::InvalidEvalConfig { detail });
        if self.repetitions == 0 {
            return fail("repetitions must be >= 1".to_owned());
        }
        if self.n_train.is_empty() {
            return fail("n_train grid is empty".to_owned());
        }
        if self.lambdas.is_empty() {
            return fail("lambda grid is empty".to_owned());
        }
        if self.pipelines.is_empty() {
            return fail("pipeline list is empty".to_owned());
        }
        for window in sorted(&self.n_train).windows(2) {
            if window[0] == window[1] {
                return fail(format!("duplicate n_train value {}", window[0]));
            }
        }
        for &lambda in &self.lambdas {
            if !lambda.is_finite() || !(0.0..=1.0).contains(&lambda) {
                return fail(format!("lambda {lambda} outside [0, 1]"));
            }
        }
        let mut lambdas = self.lambdas.clone();
        lambdas.sort_by(f64::total_cmp);
        for window in lambdas.windows(2) {
            if window[0] == window[1] {
                return fail(format!("duplicate lambda value {}", window[0]));
            }
        }
        let mut pipelines = self.pipelines.clone();
        pipelines.sort_by_key(Pipeline::name);
        for window in pipelines.windows(2) {
            if window[0] == window[1] {
                return fail(format!("duplicate pipeline {:?}", window[0].name()));
            }
        }
        if !self.shrinkage.is_finite() || !(0.0..1.0).contains(&self.shrinkage) {
            return fail(format!("shrinkage {} outside [0, 1)", self.shrinkage));
        }
        self.paradigm.validate().map_err(EvalError::Feature)?;
        if let ParadigmConfig::ErpPrototype { prototype_class } = &self.paradigm {
            if !dataset.class_labels().contains(prototype_class) {
                return fail(format!(
                    "prototype class {prototype_class:?} is not one of the dataset's labels {:?}",
                    dataset.class_labels()
                ));
            }
        }
        for subject in dataset.subjects() {
            for &n in &self.n_train {
                stratified_allocation(subject, n)?;
            }
        }
        Ok(())
    }
}

fn sorted(values: &[usize]) -> Vec<usize> {
    let mut v = values.to_vec();
    v.sort_unstable();
    v
}

/// One result row: the balanced accuracy of `pipeline` on `subject`'s
/// held-out trials for a given calibration size, λ, and repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub dataset: String,
    pub subject: String,
    pub pipeline: String,
    pub n_train: usize,
    pub lambda: f64,
    pub repetition: usize,
    pub balanced_accuracy: f64,
    pub train_seconds: f64,
    pub test_seconds: f64,
}

/// Long-form evaluation results; the input of the meta-analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    rows: Vec<ScoreRow>,
}

impl ScoreTable {
    /// Wrap rows, validating score ranges and sorting canonically
    /// (dataset, subject, pipeline, n, λ, repetition).
    pub fn new(mut rows: Vec<ScoreRow>) -> Result<Self, EvalError> {
        for row in &rows {
            if !row.balanced_accuracy.is_finite() || !(0.0..=1.0).contains(&row.balanced_accuracy) {
                return Err(EvalError::InvalidScore {
                    value: row.balanced_accuracy,
                });
            }
        }
        rows.sort_by(|a, b| {
            a.dataset
                .cmp(&b.dataset)
                .then_with(|| a.subject.cmp(&b.subject))
                .then_with(|| a.pipeline.cmp(&b.pipeline))
                .then_with(|| a.n_train.cmp(&b.n_train))
                .then_with(|| a.lambda.total_cmp(&b.lambda))
                .then_with(|| a.repetition.cmp(&b.repetition))
        });
        Ok(ScoreTable { rows })
    }

    pub fn rows(&self) -> &[ScoreRow] {
        &self.rows
    }

    /// Write the comma-separated form: the exact documented header, then
    /// one row per line with scores and timings at 6 significant digits.
    pub fn to_csv(&self, mut writer: impl Write) -> Result<(), EvalError> {
        writeln!(writer, "{SCORE_TABLE_HEADER}")?;
        for row in &self.rows {
            writeln!(
                writer,
                "{},{},{},{},{},{},{},{},{}",
                row.dataset,
                row.subject,
                row.pipeline,
                row.n_train,
                row.lambda,
                row.repetition,
                format_significant(row.balanced_accuracy, 6),
                format_significant(row.train_seconds, 6),
                format_significant(row.test_seconds, 6),
            )?;
        }
        Ok(())
    }

    /// The CSV form as a string.
    pub fn to_csv_string(&self) -> String {
        let mut buffer = Vec::new();
        self.to_csv(&mut buffer).expect("in-memory write");
        String::from_utf8(buffer).expect("csv is utf-8")
    }

    /// Parse a table written by [`ScoreTable::to_csv`].
    pub fn from_csv(reader: impl Read) -> Result<Self, EvalError> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines.next().transpose()?.ok_or(EvalError::MalformedTable {
            line: 1,
            detail: "empty file".to_owned(),
        })?;
        if header.trim_end() != SCORE_TABLE_HEADER {
            return Err(EvalError::MalformedTable {
                line: 1,
                detail: format!("unexpected header {header:?}"),
            });
        }
        let mut rows = Vec::new();
        for (index, line) in lines.enumerate() {
            let line = line?;
            let number = index + 2;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(EvalError::MalformedTable {
                    line: number,
                    detail: format!("expected 9 fields, got {}", fields.len()),
                });
            }
            let parse_usize = |text: &str, what: &str| {
                text.parse::<usize>()
                    .map_err(|e| EvalError::MalformedTable {
                        line: number,
                        detail: format!("{what} {text:?}: {e}"),
                    })
            };
            let parse_f64 = |text: &str, what: &str| {
                text.parse::<f64>().map_err(|e| EvalError::MalformedTable {
                    line: number,
                    detail: format!("{what} {text:?}: {e}"),
                })
            };
            rows.push(ScoreRow {
                dataset: fields[0].to_owned(),
                subject: fields[1].to_owned(),
                pipeline: fields[2].to_owned(),
                n_train: parse_usize(fields[3], "n_train")?,
                lambda: parse_f64(fields[4], "lambda")?,
                repetition: parse_usize(fields[5], "repetition")?,
                balanced_accuracy: parse_f64(fields[6], "balanced_accuracy")?,
                train_seconds: parse_f64(fields[7], "train_seconds")?,
                test_seconds: parse_f64(fields[8], "test_seconds")?,
            });
        }
        ScoreTable::new(rows)
    }
}

/// Render with `digits` significant digits in plain decimal notation.
pub fn format_significant(value: f64, digits: u32) -> String {
    if value == 0.0 {
        return "0".to_owned();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

/// Mean per-class recall: for each class appearing in `truth`, the fraction
/// of its trials predicted correctly, averaged over classes.
pub fn balanced_accuracy<A, B>(truth: &[A], predicted: &[B]) -> Result<f64, EvalError>
where
    A: AsRef<str>,
    B: AsRef<str>,
{
    if truth.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            truth: truth.len(),
            predicted: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(EvalError::EmptyLabels);
    }
    let mut per_class: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (t, p) in truth.iter().zip(predicted) {
        let entry = per_class.entry(t.as_ref()).or_insert((0, 0));
        entry.1 += 1;
        if t.as_ref() == p.as_ref() {
            entry.0 += 1;
        }
    }
    let recalls: f64 = per_class
        .values()
        .map(|&(correct, total)| correct as f64 / total as f64)
        .sum();
    Ok(recalls / per_class.len() as f64)
}

/// Per-class calibration-trial allocation: n split as evenly as possible,
/// remainder to the lexicographically first classes. Fails if any class
/// would get no calibration trial or keep no test trial.
fn stratified_allocation(
    subject: &SubjectRecord,
    n: usize,
) -> Result<BTreeMap<ClassLabel, usize>, EvalError> {
    let counts = subject.class_counts();
    let classes = counts.len();
    let infeasible = |detail: String| EvalError::InfeasibleTrainCount {
        subject_id: subject.subject_id().to_owned(),
        n,
        detail,
    };
    let capacities = || {
        counts
            .iter()
            .map(|(label, count)| format!("{label}: {count}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    if n < classes {
        return Err(infeasible(format!(
            "every class needs at least one calibration trial, but n < {classes} classes (per-class trial counts: {})",
            capacities()
        )));
    }
    let base = n / classes;
    let remainder = n % classes;
    let mut allocation = BTreeMap::new();
    for (index, (label, &count)) in counts.iter().enumerate() {
        let take = base + usize::from(index < remainder);
        if take >= count {
            return Err(infeasible(format!(
                "class {label:?} would use {take} of its {count} trials, leaving no test trial (per-class trial counts: {})",
                capacities()
            )));
        }
        allocation.insert((*label).clone(), take);
    }
    Ok(allocation)
}

/// Whether every subject of `dataset` can supply a stratified calibration
/// set of `n` trials while keeping at least one test trial per class.
///
/// This is the per-value probe behind grid clipping: callers with a default
/// n grid drop the infeasible values instead of failing outright, while an
/// explicitly requested n still surfaces the per-subject capacity error from
/// validation.
pub fn n_train_is_feasible(dataset: &Dataset, n: usize) -> bool {
    dataset
        .subjects()
        .iter()
        .all(|subject| stratified_allocation(subject, n).is_ok())
}

/// Draw a class-stratified calibration/test split of a subject's trials.
///
/// n trials go to calibration — split as evenly as possible over classes,
/// remainder to the lexicographically first — and the rest to test. The
/// draw is a seeded Fisher–Yates shuffle per class, so it is fully
/// determined by `split_seed` (derive it from the master seed, subject id,
/// and repetition index; n is deliberately not part of the seed, which makes
/// calibration sets nested as n grows).
pub fn transfer_split(
    subject: &SubjectRecord,
    n: usize,
    split_seed: u64,
) -> Result<(Vec<&Trial>, Vec<&Trial>), EvalError> {
    let allocation = stratified_allocation(subject, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed);
    let mut train = Vec::with_capacity(n);
    let mut test = Vec::with_capacity(subject.trials().len() - n);
    for (label, &take) in &allocation {
        let mut indices: Vec<usize> = subject
            .trials()
            .iter()
            .enumerate()
            .filter(|(_, trial)| trial.label() == label)
            .map(|(index, _)| index)
            .collect();
        indices.shuffle(&mut rng);
        for (position, &index) in indices.iter().enumerate() {
            if position < take {
                train.push(&subject.trials()[index]);
            } else {
                test.push(&subject.trials()[index]);
            }
        }
    }
    Ok((train, test))
}

/// The ERP prototype for a trial pool, if the paradigm needs one.
fn paradigm_prototype(
    trials: &[&Trial],
    paradigm: &ParadigmConfig,
) -> Result<Option<DMatrix<f64>>, EvalError> {
    match paradigm {
        ParadigmConfig::ErpPrototype { prototype_class } => {
            let owned: Vec<Trial> = trials.iter().map(|&t| t.clone()).collect();
            Ok(Some(class_prototype(&owned, prototype_class)?))
        }
        _ => Ok(None),
    }
}

/// Covariance features for a trial pool under the configured paradigm.
fn extract_features(
    trials: &[&Trial],
    paradigm: &ParadigmConfig,
    prototype: Option<&DMatrix<f64>>,
    shrinkage: f64,
) -> Result<Vec<(crate::spd::SpdMatrix, ClassLabel)>, EvalError> {
    let mut features = Vec::with_capacity(trials.len());
    for &trial in trials {
        let augmented;
        let input = match paradigm {
            ParadigmConfig::Plain => trial,
            ParadigmConfig::ErpPrototype { .. } => {
                let prototype = prototype.expect("prototype prepared for erp paradigm");
                augmented = erp_augment(trial, prototype)?;
                &augmented
            }
            ParadigmConfig::FilterBank { .. } => {
                augmented = filter_bank_augment(trial, paradigm)?;
                &augmented
            }
        };
        features.push((sample_covariance(input, shrinkage)?, trial.label().clone()));
    }
    Ok(features)
}

/// Fit the pooled source class means for one target subject: every other
/// subject's trials are featurized (each subject supplying its own ERP
/// prototype where applicable) and combined with uniform subject weights.
///
/// This is the quantity the protocol computes once per target and reuses
/// across every (n, λ, repetition) cell; it depends only on the dataset,
/// the target index, and the feature configuration.
pub fn source_means_for_target(
    dataset: &Dataset,
    target_index: usize,
    paradigm: &ParadigmConfig,
    shrinkage: f64,
) -> Result<ClassMeans, EvalError> {
    let subjects = dataset.subjects();
    if target_index >= subjects.len() {
        return Err(EvalError::TargetOutOfRange {
            index: target_index,
            subjects: subjects.len(),
        });
    }
    let mut per_subject = Vec::with_capacity(subjects.len() - 1);
    for (index, subject) in subjects.iter().enumerate() {
        if index == target_index {
            continue;
        }
        let trials: Vec<&Trial> = subject.trials().iter().collect();
        let prototype = paradigm_prototype(&trials, paradigm)?;
        per_subject.push(extract_features(
            &trials,
            paradigm,
            prototype.as_ref(),
            shrinkage,
        )?);
    }
    let weights = vec![1.0 / per_subject.len() as f64; per_subject.len()];
    Ok(fit_source_means(&per_subject, &weights)?)
}

fn timed<T>(measure: bool, f: impl FnOnce() -> T) -> (T, f64) {
    if measure {
        let start = Instant::now();
        let value = f();
        (value, start.elapsed().as_secs_f64())
    } else {
        (f(), 0.0)
    }
}

/// Run the full leave-one-subject-out protocol over a dataset.
///
/// Targets are processed as independent parallel work units; the returned
/// table is canonically sorted, so its contents do not depend on the worker
/// count (run inside a configured rayon pool to bound parallelism).
pub fn run_transfer_evaluation(
    dataset: &Dataset,
    config: &EvalConfig,
) -> Result<ScoreTable, EvalError> {
    config.validate(dataset)?;
    let per_target: Result<Vec<Vec<ScoreRow>>, EvalError> = (0..dataset.subjects().len())
        .into_par_iter()
        .map(|target_index| evaluate_target(dataset, config, target_index))
        .collect();
    let rows: Vec<ScoreRow> = per_target?.into_iter().flatten().collect();
    ScoreTable::new(rows)
}

/// Score every (n, λ, repetition, pipeline) cell for one target subject.
fn evaluate_target(
    dataset: &Dataset,
    config: &EvalConfig,
    target_index: usize,
) -> Result<Vec<ScoreRow>, EvalError> {
    let target = &dataset.subjects()[target_index];
    let subject_id = target.subject_id().to_owned();
    let source_means =
        source_means_for_target(dataset, target_index, &config.paradigm, config.shrinkage)?;

    let mut rows = Vec::with_capacity(
        config.n_train.len() * config.repetitions * config.lambdas.len() * config.pipelines.len(),
    );
    for &n in &config.n_train {
        for repetition in 0..config.repetitions {
            let annotate = |lambda: Option<f64>, source: EvalError| EvalError::CellFailed {
                cell: CellRef {
                    subject: subject_id.clone(),
                    n_train: n,
                    lambda,
                    repetition,
                },
                source: Box::new(source),
            };

            let split_seed = derive_seed(
                config.seed,
                &[
                    STREAM_CALIBRATION_SPLIT,
                    fnv1a64(subject_id.as_bytes()),
                    repetition as u64,
                ],
            );
            let (train, test) =
                transfer_split(target, n, split_seed).map_err(|e| annotate(None, e))?;
            let prototype =
                paradigm_prototype(&train, &config.paradigm).map_err(|e| annotate(None, e))?;
            let train_features = extract_features(
                &train,
                &config.paradigm,
                prototype.as_ref(),
                config.shrinkage,
            )
            .map_err(|e| annotate(None, e))?;
            let test_features = extract_features(
                &test,
                &config.paradigm,
                prototype.as_ref(),
                config.shrinkage,
            )
            .map_err(|e| annotate(None, e))?;
            let truth: Vec<&ClassLabel> = test_features.iter().map(|(_, label)| label).collect();

            // The target-only fit is shared by both pipelines and every λ.
            let (target_means, target_fit_seconds) =
                timed(config.measure_time, || fit_mdm(&train_features));
            let target_means = target_means.map_err(|e| annotate(None, e.into()))?;

            let (baseline, baseline_seconds) = timed(config.measure_time, || {
                score_model(&target_means, &test_features, &truth)
            });
            let baseline = baseline.map_err(|e| annotate(None, e))?;

            for &lambda in &config.lambdas {
                for pipeline in &config.pipelines {
                    let row = match pipeline {
                        Pipeline::MdmTargetOnly => ScoreRow {
                            dataset: dataset.name().to_owned(),
                            subject: subject_id.clone(),
                            pipeline: pipeline.name().to_owned(),
                            n_train: n,
                            lambda,
                            repetition,
                            balanced_accuracy: baseline,
                            train_seconds: target_fit_seconds,
                            test_seconds: baseline_seconds,
                        },
                        Pipeline::Mdwm => {
                            let (combined, combine_seconds) = timed(config.measure_time, || {
                                combine_mdwm(&target_means, &source_means, lambda)
                            });
                            let combined =
                                combined.map_err(|e| annotate(Some(lambda), e.into()))?;
                            let (score, test_seconds) = timed(config.measure_time, || {
                                score_model(&combined, &test_features, &truth)
                            });
                            let score = score.map_err(|e| annotate(Some(lambda), e))?;
                            ScoreRow {
                                dataset: dataset.name().to_owned(),
                                subject: subject_id.clone(),
                                pipeline: pipeline.name().to_owned(),
                                n_train: n,
                                lambda,
                                repetition,
                                balanced_accuracy: score,
                                train_seconds: target_fit_seconds + combine_seconds,
                                test_seconds,
                            }
                        }
                    };
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

fn score_model(
    model: &ClassMeans,
    test_features: &[(crate::spd::SpdMatrix, ClassLabel)],
    truth: &[&ClassLabel],
) -> Result<f64, EvalError> {
    let mut predicted = Vec::with_capacity(test_features.len());
    for (feature, _) in test_features {
        let (label, _) = predict_mdm(model, feature)?;
        predicted.push(label.clone());
    }
    balanced_accuracy(truth, &predicted)
}
