//! Meta-analysis of paired score tables: per-dataset Wilcoxon signed-rank
//! tests and standardized mean differences, Stouffer combination across
//! datasets, and significance stars.
//!
//! Conventions (classical throughout, matching the reference R/scipy
//! behavior so external oracles agree):
//!
//! - Wilcoxon signed-rank: zero differences dropped, tied magnitudes get
//!   averaged ranks, the statistic is the positive rank sum W⁺, and the
//!   one-sided "greater" p-value is P(W⁺ ≥ w) under random sign flips. The
//!   distribution is exact (full sign-assignment convolution) up to
//!   [`WILCOXON_EXACT_LIMIT`] pairs; beyond that a normal approximation
//!   with tie and continuity corrections takes over.
//! - Effect size: paired Cohen's d — mean of per-subject differences over
//!   their sample standard deviation (n−1 denominator).
//! - Stouffer: zᵢ = Φ⁻¹(1 − pᵢ), combined z = Σwᵢzᵢ/√(Σwᵢ²) with
//!   wᵢ = √(subjects in dataset i), combined p = 1 − Φ(z).
//! - Stars: strict thresholds — `***` p < 0.001, `**` p < 0.01,
//!   `*` p < 0.05, empty otherwise.

use std::collections::BTreeMap;
use std::fmt;

use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::evaluation::{format_significant, ScoreTable};

/// Largest pair count for which the Wilcoxon null distribution is computed
/// exactly; larger samples use the corrected normal approximation.
pub const WILCOXON_EXACT_LIMIT: usize = 25;

/// Header of the machine-readable meta-analysis summary.
pub const META_SUMMARY_HEADER: &str = "dataset,n_subjects,smd,p_value,stars";

/// Errors from meta-analysis inputs and degenerate statistics.
#[derive(Debug, Error)]
pub enum StatsError {
    #[error("empty input")]
    EmptyInput,
    #[error("need at least 2 score pairs, got {pairs}")]
    TooFewPairs { pairs: usize },
    #[error("score {value} is not a finite number in [0, 1]")]
    InvalidPairedScore { value: f64 },
    #[error("difference {value} is not finite")]
    NonFiniteDifference { value: f64 },
    #[error("all differences are zero; the signed-rank test is undefined")]
    AllDifferencesZero,
    #[error("only {remaining} nonzero difference left after dropping zeros; need at least 2")]
    TooFewNonzeroDifferences { remaining: usize },
    #[error("differences have zero variance; the standardized mean difference is undefined")]
    ZeroVariance,
    #[error("got {p_values} p-values but {weights} weights")]
    WeightCountMismatch { p_values: usize, weights: usize },
    #[error("p-value {value} outside the open interval (0, 1)")]
    PValueOutOfRange { value: f64 },
    #[error("weight at index {index} is {value}; weights must be finite and positive")]
    InvalidWeight { index: usize, value: f64 },
    #[error(
        "no rows match methods {method_a:?}/{method_b:?} at n={n_train}, lambda={lambda} in any table"
    )]
    NoMatchingRows {
        method_a: String,
        method_b: String,
        n_train: usize,
        lambda: f64,
    },
    #[error(
        "dataset {dataset:?}, subject {subject:?} has no {method:?} score at n={n_train}, lambda={lambda}"
    )]
    MissingCell {
        dataset: String,
        subject: String,
        method: String,
        n_train: usize,
        lambda: f64,
    },
    #[error("meta-analysis failed for dataset {dataset:?}: {source}")]
    DatasetFailed {
        dataset: String,
        #[source]
        source: Box<StatsError>,
    },
}

/// Tail of the alternative hypothesis for paired tests on A − B differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    /// Method A scores higher than method B.
    Greater,
    /// Method A scores lower than method B.
    Less,
    TwoSided,
}

impl Alternative {
    pub fn name(&self) -> &'static str {
        match self {
            Alternative::Greater => "greater",
            Alternative::Less => "less",
            Alternative::TwoSided => "two-sided",
        }
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One dataset's per-subject score pairs (method A, method B), each pair
/// already averaged over repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedScores {
    dataset: String,
    pairs: Vec<(f64, f64)>,
}

impl PairedScores {
    /// Validate and wrap: at least two subjects, every score a finite
    /// number in [0, 1].
    pub fn new(dataset: impl Into<String>, pairs: Vec<(f64, f64)>) -> Result<Self, StatsError> {
        if pairs.len() < 2 {
            return Err(StatsError::TooFewPairs { pairs: pairs.len() });
        }
        for &(a, b) in &pairs {
            for value in [a, b] {
                if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                    return Err(StatsError::InvalidPairedScore { value });
                }
            }
        }
        Ok(PairedScores {
            dataset: dataset.into(),
            pairs,
        })
    }

    pub fn dataset(&self) -> &str {
        &self.dataset
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn n_subjects(&self) -> usize {
        self.pairs.len()
    }

    /// Per-subject differences, method A minus method B.
    pub fn differences(&self) -> Vec<f64> {
        self.pairs.iter().map(|&(a, b)| a - b).collect()
    }
}

/// Average ranks of the magnitudes, doubled so ties stay integral: a tie
/// group occupying sorted positions i..=j (1-based) gets rank (i+j)/2,
/// stored as i+j. Also returns Σ(t³−t) over tie group sizes t, the tie
/// term of the normal-approximation variance.
fn doubled_ranks(magnitudes: &[f64]) -> (Vec<u64>, f64) {
    let mut order: Vec<usize> = (0..magnitudes.len()).collect();
    order.sort_by(|&i, &j| magnitudes[i].total_cmp(&magnitudes[j]));
    let mut doubled = vec![0u64; magnitudes.len()];
    let mut tie_term = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && magnitudes[order[end + 1]] == magnitudes[order[start]] {
            end += 1;
        }
        let doubled_rank = (start + end + 2) as u64;
        for &index in &order[start..=end] {
            doubled[index] = doubled_rank;
        }
        let group = (end - start + 1) as f64;
        tie_term += group * group * group - group;
        start = end + 1;
    }
    (doubled, tie_term)
}

/// Null distribution of the doubled positive rank sum: counts[s] is the
/// number of the 2^n sign assignments with statistic s.
fn sign_flip_counts(doubled: &[u64]) -> Vec<u64> {
    let total: u64 = doubled.iter().sum();
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    for &rank in doubled {
        let rank = rank as usize;
        for sum in (rank..counts.len()).rev() {
            counts[sum] += counts[sum - rank];
        }
    }
    counts
}

fn exact_p(doubled: &[u64], w_doubled: u64, alternative: Alternative) -> f64 {
    let counts = sign_flip_counts(doubled);
    let w = w_doubled as usize;
    let assignments = 2f64.powi(doubled.len() as i32);
    let upper: u64 = counts[w..].iter().sum();
    let lower: u64 = counts[..=w].iter().sum();
    match alternative {
        Alternative::Greater => upper as f64 / assignments,
        Alternative::Less => lower as f64 / assignments,
        Alternative::TwoSided => (2.0 * upper.min(lower) as f64 / assignments).min(1.0),
    }
}

fn approximate_p(doubled: &[u64], tie_term: f64, w_doubled: u64, alternative: Alternative) -> f64 {
    let n = doubled.len() as f64;
    let w = w_doubled as f64 / 2.0;
    let mean = n * (n + 1.0) / 4.0;
    let sd = (n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0).sqrt();
    let normal = standard_normal();
    // Continuity correction: shift half a unit toward the null mean.
    let upper = normal.cdf(-(w - mean - 0.5) / sd);
    let lower = normal.cdf((w - mean + 0.5) / sd);
    match alternative {
        Alternative::Greater => upper,
        Alternative::Less => lower,
        Alternative::TwoSided => (2.0 * upper.min(lower)).min(1.0),
    }
}

/// One-sample Wilcoxon signed-rank test on paired differences.
///
/// Zeros are dropped and at least two nonzero differences must remain. With
/// `Alternative::Greater` the p-value is P(W⁺ ≥ w): small when the
/// differences are mostly positive. Up to [`WILCOXON_EXACT_LIMIT`] nonzero
/// pairs the p-value is exact over all 2^n sign assignments (ties get
/// averaged ranks); beyond that, a normal approximation with tie and
/// continuity corrections is used.
pub fn wilcoxon_signed_rank(
    differences: &[f64],
    alternative: Alternative,
) -> Result<f64, StatsError> {
    if differences.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if let Some(&bad) = differences.iter().find(|d| !d.is_finite()) {
        return Err(StatsError::NonFiniteDifference { value: bad });
    }
    let nonzero: Vec<f64> = differences.iter().copied().filter(|&d| d != 0.0).collect();
    if nonzero.is_empty() {
        return Err(StatsError::AllDifferencesZero);
    }
    if nonzero.len() < 2 {
        return Err(StatsError::TooFewNonzeroDifferences {
            remaining: nonzero.len(),
        });
    }
    let magnitudes: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let (doubled, tie_term) = doubled_ranks(&magnitudes);
    let w_doubled: u64 = nonzero
        .iter()
        .zip(&doubled)
        .filter(|(&d, _)| d > 0.0)
        .map(|(_, &rank)| rank)
        .sum();
    if nonzero.len() <= WILCOXON_EXACT_LIMIT {
        Ok(exact_p(&doubled, w_doubled, alternative))
    } else {
        Ok(approximate_p(&doubled, tie_term, w_doubled, alternative))
    }
}

/// Paired Cohen's d: mean of the differences divided by their sample
/// standard deviation (n−1 denominator). Needs at least two differences
/// with nonzero variance.
pub fn standardized_mean_difference(differences: &[f64]) -> Result<f64, StatsError> {
    if differences.len() < 2 {
        return Err(StatsError::TooFewPairs {
            pairs: differences.len(),
        });
    }
    if let Some(&bad) = differences.iter().find(|d| !d.is_finite()) {
        return Err(StatsError::NonFiniteDifference { value: bad });
    }
    let n = differences.len() as f64;
    let mean = differences.iter().sum::<f64>() / n;
    let variance = differences
        .iter()
        .map(|d| (d - mean) * (d - mean))
        .sum::<f64>()
        / (n - 1.0);
    if variance <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(mean / variance.sqrt())
}

/// Weighted Stouffer combination: zᵢ = Φ⁻¹(1 − pᵢ),
/// z = Σwᵢzᵢ / √(Σwᵢ²), combined p = 1 − Φ(z).
///
/// Every p must lie strictly inside (0, 1) — the quantile is infinite at
/// the endpoints — and every weight must be finite and positive.
pub fn stouffer_combine(p_values: &[f64], weights: &[f64]) -> Result<f64, StatsError> {
    if p_values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if p_values.len() != weights.len() {
        return Err(StatsError::WeightCountMismatch {
            p_values: p_values.len(),
            weights: weights.len(),
        });
    }
    for &p in p_values {
        if !p.is_finite() || p <= 0.0 || p >= 1.0 {
            return Err(StatsError::PValueOutOfRange { value: p });
        }
    }
    for (index, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w <= 0.0 {
            return Err(StatsError::InvalidWeight { index, value: w });
        }
    }
    let normal = standard_normal();
    // Φ⁻¹(1 − p) = −Φ⁻¹(p); the right-hand form keeps precision for small p.
    let weighted_sum: f64 = p_values
        .iter()
        .zip(weights)
        .map(|(&p, &w)| w * -normal.inverse_cdf(p))
        .sum();
    let weight_norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    let z = weighted_sum / weight_norm;
    Ok(normal.cdf(-z))
}

/// Significance stars with strict thresholds: `***` below 0.001, `**`
/// below 0.01, `*` below 0.05, empty otherwise (so exactly 0.05 earns
/// no star). Expects p ∈ (0, 1].
pub fn star_grade(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// The score-table cell a meta-analysis compares methods at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSelector {
    pub n_train: usize,
    pub lambda: f64,
}

/// One dataset's contribution to the meta-analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEffect {
    pub dataset: String,
    pub n_subjects: usize,
    pub smd: f64,
    pub p_value: f64,
}

impl DatasetEffect {
    pub fn stars(&self) -> &'static str {
        star_grade(self.p_value)
    }
}

/// The combined meta-analysis: per-dataset effects plus the Stouffer
/// combination, with the comparison coordinates kept for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaResult {
    pub method_a: String,
    pub method_b: String,
    pub cell: CellSelector,
    pub alternative: Alternative,
    pub per_dataset: Vec<DatasetEffect>,
    pub combined_p: f64,
}

impl MetaResult {
    pub fn stars(&self) -> &'static str {
        star_grade(self.combined_p)
    }

    pub fn total_subjects(&self) -> usize {
        self.per_dataset.iter().map(|e| e.n_subjects).sum()
    }

    /// Machine-readable summary: one line per dataset and a final
    /// `combined` line. The combined line leaves the per-dataset `smd`
    /// column empty — only p-values are combined across datasets.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(META_SUMMARY_HEADER);
        out.push('\n');
        for effect in &self.per_dataset {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                effect.dataset,
                effect.n_subjects,
                format_significant(effect.smd, 6),
                format_significant(effect.p_value, 6),
                effect.stars(),
            ));
        }
        out.push_str(&format!(
            "combined,{},,{},{}\n",
            self.total_subjects(),
            format_significant(self.combined_p, 6),
            self.stars(),
        ));
        out
    }

    /// Human-readable report.
    pub fn text_report(&self) -> String {
        let mut out = format!(
            "Meta-analysis: {} vs {} at n={}, lambda={} (alternative: {})\n\n",
            self.method_a, self.method_b, self.cell.n_train, self.cell.lambda, self.alternative,
        );
        out.push_str(&format!(
            "  {:<24} {:>8}  {:>10}  {:>10}  {}\n",
            "dataset", "subjects", "SMD", "p-value", "stars"
        ));
        for effect in &self.per_dataset {
            out.push_str(&format!(
                "  {:<24} {:>8}  {:>10}  {:>10}  {}\n",
                effect.dataset,
                effect.n_subjects,
                format_significant(effect.smd, 6),
                format_significant(effect.p_value, 6),
                effect.stars(),
            ));
        }
        out.push_str(&format!(
            "  {:<24} {:>8}  {:>10}  {:>10}  {}\n",
            "combined",
            self.total_subjects(),
            "-",
            format_significant(self.combined_p, 6),
            self.stars(),
        ));
        out
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Run the full meta-analysis over one or more score tables.
///
/// Rows are filtered to the selected (n, λ) cell and the two method names,
/// grouped by the `dataset` column; per subject, scores are averaged over
/// repetitions to one pair. Each dataset yields an SMD and a Wilcoxon
/// signed-rank p-value for the A−B differences under `alternative`; the
/// p-values are then Stouffer-combined with weights √(subject count).
///
/// Degenerate statistics propagate as errors rather than fabricated
/// numbers: identical methods trip the zero-variance check, and a dataset
/// whose one-sided p is exactly 1 (method B wins every subject) is outside
/// Stouffer's open-interval domain.
pub fn run_meta_analysis(
    tables: &[ScoreTable],
    method_a: &str,
    method_b: &str,
    cell: CellSelector,
    alternative: Alternative,
) -> Result<MetaResult, StatsError> {
    type SubjectScores = BTreeMap<String, (Vec<f64>, Vec<f64>)>;
    let mut by_dataset: BTreeMap<String, SubjectScores> = BTreeMap::new();
    for table in tables {
        for row in table.rows() {
            if row.n_train != cell.n_train || row.lambda != cell.lambda {
                continue;
            }
            let is_a = row.pipeline == method_a;
            let is_b = row.pipeline == method_b;
            if !is_a && !is_b {
                continue;
            }
            let entry = by_dataset
                .entry(row.dataset.clone())
                .or_default()
                .entry(row.subject.clone())
                .or_default();
            // Independent pushes: comparing a method against itself fills
            // both sides and fails downstream as zero variance, not as a
            // spuriously missing cell.
            if is_a {
                entry.0.push(row.balanced_accuracy);
            }
            if is_b {
                entry.1.push(row.balanced_accuracy);
            }
        }
    }
    if by_dataset.is_empty() {
        return Err(StatsError::NoMatchingRows {
            method_a: method_a.to_owned(),
            method_b: method_b.to_owned(),
            n_train: cell.n_train,
            lambda: cell.lambda,
        });
    }

    let mut per_dataset = Vec::with_capacity(by_dataset.len());
    for (dataset, subjects) in by_dataset {
        let mut pairs = Vec::with_capacity(subjects.len());
        for (subject, (a_scores, b_scores)) in subjects {
            let missing = |method: &str| StatsError::MissingCell {
                dataset: dataset.clone(),
                subject: subject.clone(),
                method: method.to_owned(),
                n_train: cell.n_train,
                lambda: cell.lambda,
            };
            if a_scores.is_empty() {
                return Err(missing(method_a));
            }
            if b_scores.is_empty() {
                return Err(missing(method_b));
            }
            pairs.push((mean(&a_scores), mean(&b_scores)));
        }
        let annotate = |source: StatsError| StatsError::DatasetFailed {
            dataset: dataset.clone(),
            source: Box::new(source),
        };
        let scores = PairedScores::new(dataset.clone(), pairs).map_err(annotate)?;
        let differences = scores.differences();
        let smd = standardized_mean_difference(&differences).map_err(annotate)?;
        let p_value = wilcoxon_signed_rank(&differences, alternative).map_err(annotate)?;
        per_dataset.push(DatasetEffect {
            dataset,
            n_subjects: scores.n_subjects(),
            smd,
            p_value,
        });
    }

    let p_values: Vec<f64> = per_dataset.iter().map(|e| e.p_value).collect();
    let weights: Vec<f64> = per_dataset
        .iter()
        .map(|e| (e.n_subjects as f64).sqrt())
        .collect();
    let combined_p = stouffer_combine(&p_values, &weights)?;
    Ok(MetaResult {
        method_a: method_a.to_owned(),
        method_b: method_b.to_owned(),
        cell,
        alternative,
        per_dataset,
        combined_p,
    })
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal parameters are valid")
}
