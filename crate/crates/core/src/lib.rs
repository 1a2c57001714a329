//! Riemannian minimum-distance classification on covariance matrices, with
//! cross-subject transfer by geodesic interpolation of class means.
//!
//! The crate is organized bottom-up:
//!
//! - [`spd`] — affine-invariant geometry of SPD matrices (geodesics,
//!   distances, Fréchet means);
//! - [`features`] — covariance estimation from multichannel trials, with
//!   shrinkage and paradigm-specific augmentation;
//! - [`classifiers`] — minimum-distance-to-mean classification and the
//!   weighted-mean transfer rule;
//! - [`datasets`] — labeled multi-subject containers, an on-disk format, and
//!   a seeded synthetic generator;
//! - [`evaluation`] — the leave-one-subject-out transfer benchmark;
//! - [`stats`] — Wilcoxon/Stouffer/effect-size meta-analysis of score
//!   tables;
//! - [`seeding`] — deterministic seed derivation for reproducible runs.

pub mod classifiers;
pub mod datasets;
pub mod evaluation;
pub mod features;
pub mod seeding;
pub mod spd;
pub mod stats;

pub use classifiers::{
    combine_mdwm, fit_mdm, fit_mdwm, fit_source_means, load_model, predict_mdm, save_model,
    ClassMeans, ClassifierError, TransferParams, MODEL_FORMAT_VERSION,
};
pub use datasets::{
    generate_synthetic, load_dataset, save_dataset, synthetic_class_centers, Dataset, DatasetError,
    ParadigmKind, SubjectRecord, SynthConfig, DATASET_FORMAT_VERSION,
};
pub use evaluation::{
    balanced_accuracy, format_significant, n_train_is_feasible, run_transfer_evaluation,
    source_means_for_target, transfer_split, EvalConfig, EvalError, Pipeline, ScoreRow, ScoreTable,
    SCORE_TABLE_HEADER,
};
pub use features::{
    class_prototype, erp_augment, filter_bank_augment, sample_covariance, ClassLabel, FeatureError,
    ParadigmConfig, Trial,
};
pub use spd::{
    frechet_mean, geodesic, riemann_distance, spd_exp, EigenDecomposition, ManifoldError, SpdMatrix,
};
pub use stats::{
    run_meta_analysis, standardized_mean_difference, star_grade, stouffer_combine,
    wilcoxon_signed_rank, Alternative, CellSelector, DatasetEffect, MetaResult, PairedScores,
    StatsError, META_SUMMARY_HEADER, WILCOXON_EXACT_LIMIT,
};
