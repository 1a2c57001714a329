//! Covariance features from multichannel trials.
//!
//! A trial is a C×T signal segment with a class label. Its feature is the
//! shrunk sample covariance `(1−γ)·S + γ·(trace(S)/C)·I` with
//! `S = (1/T) X Xᵀ` of the per-channel mean-centered signal; shrinkage toward
//! the scaled identity keeps the matrix full rank and well conditioned.
//!
//! Two augmentations let the same minimum-distance classifier serve
//! event-related and steady-state paradigms:
//!
//! - [`erp_augment`] stacks a class-mean prototype waveform above the signal,
//!   so the covariance's off-diagonal block measures alignment with the
//!   prototype;
//! - [`filter_bank_augment`] stacks band-pass-filtered copies of the signal,
//!   so the covariance captures per-band power and cross-band structure.

use crate::spd::{ManifoldError, SpdMatrix};
use nalgebra::DMatrix;
use rustfft::{num_complex::Complex, FftPlanner};
use thiserror::Error;

/// Class identifier; ordered lexicographically wherever a canonical class
/// order is needed (map iteration, tie-breaking, stratified splits).
pub type ClassLabel = String;

/// Width in Hz of the raised-cosine transition at each band edge.
const TRANSITION_HZ: f64 = 1.0;

/// Errors from trial validation and feature extraction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("trial signal must be non-empty, got {channels}x{samples}")]
    EmptySignal { channels: usize, samples: usize },
    #[error("trial signal contains non-finite values")]
    NonFiniteSignal,
    #[error(
        "trial has {channels} channels but only {samples} samples; covariance needs at least max(channels, 2) samples"
    )]
    ShortTrial { channels: usize, samples: usize },
    #[error("shrinkage regularization must lie in [0, 1), got {gamma}")]
    InvalidRegularization { gamma: f64 },
    #[error("covariance is singular at regularization {gamma}; increase shrinkage ({source})")]
    RegularizationNeeded { gamma: f64, source: ManifoldError },
    #[error("expected a {expected_rows}x{expected_cols} matrix, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("no trial carries label {label:?}")]
    NoMatchingTrials { label: ClassLabel },
    #[error("filter bank requires at least one band")]
    EmptyBandList,
    #[error(
        "invalid band ({low_hz} Hz, {high_hz} Hz): need 0 <= low < high < Nyquist ({nyquist_hz} Hz)"
    )]
    InvalidBand {
        low_hz: f64,
        high_hz: f64,
        nyquist_hz: f64,
    },
    #[error("operation requires a {expected} paradigm configuration, got {got}")]
    WrongParadigm {
        expected: &'static str,
        got: &'static str,
    },
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
}

/// One labeled signal segment: C channels × T samples.
///
/// Validated at construction: non-empty, finite, and `T ≥ max(C, 2)` so the
/// covariance of the (possibly augmented) signal can be full rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    signal: DMatrix<f64>,
    label: ClassLabel,
}

impl Trial {
    /// Wrap a C×T signal with its class label.
    pub fn new(signal: DMatrix<f64>, label: impl Into<ClassLabel>) -> Result<Self, FeatureError> {
        let (channels, samples) = (signal.nrows(), signal.ncols());
        if channels == 0 || samples == 0 {
            return Err(FeatureError::EmptySignal { channels, samples });
        }
        if signal.iter().any(|v| !v.is_finite()) {
            return Err(FeatureError::NonFiniteSignal);
        }
        if samples < channels.max(2) {
            return Err(FeatureError::ShortTrial { channels, samples });
        }
        Ok(Trial {
            signal,
            label: label.into(),
        })
    }

    /// The C×T signal matrix.
    pub fn signal(&self) -> &DMatrix<f64> {
        &self.signal
    }

    /// Class label.
    pub fn label(&self) -> &ClassLabel {
        &self.label
    }

    /// Channel count C.
    pub fn channels(&self) -> usize {
        self.signal.nrows()
    }

    /// Sample count T.
    pub fn samples(&self) -> usize {
        self.signal.ncols()
    }
}

/// How trials are turned into covariance features for a given paradigm.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParadigmConfig {
    /// Covariance of the raw signal (motor-imagery style).
    Plain,
    /// Stack the mean waveform of `prototype_class` above each trial before
    /// the covariance (event-related-potential style).
    ErpPrototype { prototype_class: ClassLabel },
    /// Stack band-pass-filtered copies of each trial, one per band
    /// (steady-state response style).
    FilterBank {
        /// Pass bands as (low, high) in Hz, in stacking order.
        bands_hz: Vec<(f64, f64)>,
        /// Sampling rate of the signals in Hz.
        sampling_rate_hz: f64,
    },
}

impl ParadigmConfig {
    /// Short name of the variant, for error messages.
    pub fn kind_name(&self) -> &'static str {
        match self {
            ParadigmConfig::Plain => "plain",
            ParadigmConfig::ErpPrototype { .. } => "erp_prototype",
            ParadigmConfig::FilterBank { .. } => "filter_bank",
        }
    }

    /// Check structural invariants (band edges ordered and below Nyquist).
    pub fn validate(&self) -> Result<(), FeatureError> {
        if let ParadigmConfig::FilterBank {
            bands_hz,
            sampling_rate_hz,
        } = self
        {
            if bands_hz.is_empty() {
                return Err(FeatureError::EmptyBandList);
            }
            let nyquist = sampling_rate_hz / 2.0;
            for &(low, high) in bands_hz {
                let valid = low.is_finite()
                    && high.is_finite()
                    && low >= 0.0
                    && low < high
                    && high < nyquist;
                if !valid {
                    return Err(FeatureError::InvalidBand {
                        low_hz: low,
                        high_hz: high,
                        nyquist_hz: nyquist,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Shrunk sample covariance of a trial.
///
/// The signal is mean-centered per channel, `S = (1/T) X Xᵀ` is formed, and
/// the result is `(1−γ)·S + γ·(trace(S)/C)·I`. A degenerate signal (constant
/// channels, duplicated rows) makes `S` singular at γ = 0; that surfaces as
/// [`FeatureError::RegularizationNeeded`] rather than a garbage matrix.
pub fn sample_covariance(trial: &Trial, regularization: f64) -> Result<SpdMatrix, FeatureError> {
    let gamma = regularization;
    if !gamma.is_finite() || !(0.0..1.0).contains(&gamma) {
        return Err(FeatureError::InvalidRegularization { gamma });
    }
    let channels = trial.channels();
    let samples = trial.samples();

    let mut centered = trial.signal().clone();
    for mut row in centered.row_iter_mut() {
        let mean = row.sum() / samples as f64;
        row.add_scalar_mut(-mean);
    }
    let mut cov = &centered * centered.transpose() / samples as f64;
    if gamma > 0.0 {
        let target = cov.trace() / channels as f64;
        cov *= 1.0 - gamma;
        for i in 0..channels {
            cov[(i, i)] += gamma * target;
        }
    }
    SpdMatrix::new(cov).map_err(|err| match err {
        ManifoldError::NotPositiveDefinite { .. } | ManifoldError::IllConditioned { .. } => {
            FeatureError::RegularizationNeeded { gamma, source: err }
        }
        other => FeatureError::Manifold(other),
    })
}

/// Arithmetic mean of the signals of all trials carrying `label`.
///
/// This is the prototype waveform that [`erp_augment`] prepends.
pub fn class_prototype(trials: &[Trial], label: &str) -> Result<DMatrix<f64>, FeatureError> {
    let mut sum: Option<DMatrix<f64>> = None;
    let mut count = 0usize;
    for trial in trials.iter().filter(|t| t.label() == label) {
        match &mut sum {
            None => sum = Some(trial.signal().clone()),
            Some(acc) => {
                if acc.shape() != trial.signal().shape() {
                    return Err(FeatureError::ShapeMismatch {
                        expected_rows: acc.nrows(),
                        expected_cols: acc.ncols(),
                        rows: trial.signal().nrows(),
                        cols: trial.signal().ncols(),
                    });
                }
                *acc += trial.signal();
            }
        }
        count += 1;
    }
    match sum {
        Some(total) => Ok(total / count as f64),
        None => Err(FeatureError::NoMatchingTrials {
            label: label.to_owned(),
        }),
    }
}

/// Stack a prototype waveform above a trial's signal, giving a 2C×T trial.
///
/// The covariance of the augmented trial carries prototype/signal alignment
/// in its off-diagonal C×C block, which is what lets a plain
/// minimum-distance classifier separate evoked responses.
pub fn erp_augment(trial: &Trial, prototype: &DMatrix<f64>) -> Result<Trial, FeatureError> {
    if prototype.shape() != trial.signal().shape() {
        return Err(FeatureError::ShapeMismatch {
            expected_rows: trial.channels(),
            expected_cols: trial.samples(),
            rows: prototype.nrows(),
            cols: prototype.ncols(),
        });
    }
    let channels = trial.channels();
    let samples = trial.samples();
    let mut stacked = DMatrix::zeros(2 * channels, samples);
    stacked.rows_mut(0, channels).copy_from(prototype);
    stacked
        .rows_mut(channels, channels)
        .copy_from(trial.signal());
    Trial::new(stacked, trial.label().clone())
}

/// Stack band-pass-filtered copies of a trial's signal, one per configured
/// band, giving an FC×T trial (band order preserved).
///
/// Filtering is zero-phase frequency-domain masking: each channel is
/// transformed with an FFT, multiplied by a raised-cosine band mask with a
/// 1 Hz transition at each edge, and transformed back. Deterministic, linear
/// in the input, and free of filter-design parameters.
pub fn filter_bank_augment(trial: &Trial, config: &ParadigmConfig) -> Result<Trial, FeatureError> {
    config.validate()?;
    let (bands, rate) = match config {
        ParadigmConfig::FilterBank {
            bands_hz,
            sampling_rate_hz,
        } => (bands_hz, *sampling_rate_hz),
        other => {
            return Err(FeatureError::WrongParadigm {
                expected: "filter_bank",
                got: other.kind_name(),
            })
        }
    };
    let channels = trial.channels();
    let samples = trial.samples();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(samples);
    let inverse = planner.plan_fft_inverse(samples);

    let mut stacked = DMatrix::zeros(bands.len() * channels, samples);
    for (b, &(low, high)) in bands.iter().enumerate() {
        // |f| of FFT bin k; the mask is symmetric so the output stays real.
        let mask: Vec<f64> = (0..samples)
            .map(|k| {
                let f = k.min(samples - k) as f64 * rate / samples as f64;
                band_weight(f, low, high)
            })
            .collect();
        for c in 0..channels {
            let mut spectrum: Vec<Complex<f64>> = trial
                .signal()
                .row(c)
                .iter()
                .map(|&v| Complex::new(v, 0.0))
                .collect();
            forward.process(&mut spectrum);
            for (value, &w) in spectrum.iter_mut().zip(&mask) {
                *value *= w;
            }
            inverse.process(&mut spectrum);
            let scale = 1.0 / samples as f64;
            for (t, value) in spectrum.iter().enumerate() {
                stacked[(b * channels + c, t)] = value.re * scale;
            }
        }
    }
    Trial::new(stacked, trial.label().clone())
}

/// Raised-cosine band mask: 0 outside (low, high), 1 in the flat interior,
/// cosine roll-on/off over `TRANSITION_HZ`-wide windows centered on the
/// edges (so the weight is exactly 0.5 at each edge frequency).
fn band_weight(f: f64, low: f64, high: f64) -> f64 {
    let half = TRANSITION_HZ / 2.0;
    let rise = if f <= low - half {
        0.0
    } else if f >= low + half {
        1.0
    } else {
        0.5 * (1.0 - ((low + half - f) * std::f64::consts::PI / TRANSITION_HZ).cos())
    };
    let fall = if f <= high - half {
        1.0
    } else if f >= high + half {
        0.0
    } else {
        0.5 * (1.0 + ((f - (high - half)) * std::f64::consts::PI / TRANSITION_HZ).cos())
    };
    rise.min(fall)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn trial(rows: usize, cols: usize, values: &[f64]) -> Trial {
        Trial::new(DMatrix::from_row_slice(rows, cols, values), "a").unwrap()
    }

    fn random_trial(rng: &mut ChaCha8Rng, channels: usize, samples: usize) -> Trial {
        let signal = DMatrix::from_fn(channels, samples, |_, _| StandardNormal.sample(rng));
        Trial::new(signal, "a").unwrap()
    }

    #[test]
    fn trial_validation() {
        assert!(matches!(
            Trial::new(DMatrix::zeros(0, 4), "a"),
            Err(FeatureError::EmptySignal { .. })
        ));
        assert!(matches!(
            Trial::new(DMatrix::from_row_slice(1, 2, &[1.0, f64::NAN]), "a"),
            Err(FeatureError::NonFiniteSignal)
        ));
        assert!(matches!(
            Trial::new(DMatrix::zeros(4, 3), "a"),
            Err(FeatureError::ShortTrial {
                channels: 4,
                samples: 3
            })
        ));
    }

    #[test]
    fn covariance_of_centered_orthogonal_rows_is_identity() {
        // Rows are mean-free and orthogonal with squared norm T, so the
        // centered covariance is exactly I.
        let t = trial(2, 4, &[1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0]);
        let cov = sample_covariance(&t, 0.0).unwrap();
        let expected = DMatrix::identity(2, 2);
        assert!((cov.matrix() - expected).norm() < 1e-12);
    }

    #[test]
    fn covariance_of_constant_channel_needs_regularization() {
        // The second channel is constant, so centering zeroes it out and the
        // unshrunk covariance is singular.
        let t = trial(2, 2, &[1.0, -1.0, 1.0, 1.0]);
        assert!(matches!(
            sample_covariance(&t, 0.0),
            Err(FeatureError::RegularizationNeeded { .. })
        ));
        // A little shrinkage restores positive definiteness.
        assert!(sample_covariance(&t, 0.05).is_ok());
    }

    #[test]
    fn covariance_shrinkage_endpoint_approaches_scaled_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let t = random_trial(&mut rng, 3, 50);
        let near_full = sample_covariance(&t, 1.0 - 1e-9).unwrap();
        let raw = sample_covariance(&t, 0.0).unwrap();
        let target = raw.matrix().trace() / 3.0;
        let expected = DMatrix::identity(3, 3) * target;
        assert!((near_full.matrix() - expected).norm() < 1e-6 * target);
    }

    #[test]
    fn covariance_rejects_invalid_regularization() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let t = random_trial(&mut rng, 2, 10);
        assert!(matches!(
            sample_covariance(&t, -0.1),
            Err(FeatureError::InvalidRegularization { .. })
        ));
        assert!(matches!(
            sample_covariance(&t, 1.0),
            Err(FeatureError::InvalidRegularization { .. })
        ));
    }

    #[test]
    fn covariance_recovers_generating_matrix() {
        // Long trial sampled from a known covariance: X = L·Z with L the
        // Cholesky factor, so E[(1/T) X Xᵀ] = Σ.
        let sigma = DMatrix::from_row_slice(2, 2, &[2.0, 0.6, 0.6, 1.0]);
        let chol = sigma.clone().cholesky().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let z = DMatrix::from_fn(2, 10_000, |_, _| StandardNormal.sample(&mut rng));
        let t = Trial::new(chol.l() * z, "a").unwrap();
        let cov = sample_covariance(&t, 0.0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let got = cov.matrix()[(i, j)];
                let want = sigma[(i, j)];
                assert!(
                    (got - want).abs() <= 0.05 * want.abs(),
                    "entry ({i},{j}): {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn covariance_is_scale_equivariant_without_shrinkage() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let t = random_trial(&mut rng, 3, 64);
        let alpha = 2.5;
        let scaled = Trial::new(t.signal() * alpha, t.label().clone()).unwrap();
        let base = sample_covariance(&t, 0.0).unwrap();
        let cov_scaled = sample_covariance(&scaled, 0.0).unwrap();
        let expected = base.matrix() * alpha * alpha;
        assert!((cov_scaled.matrix() - &expected).norm() <= 1e-10 * expected.norm());
    }

    #[test]
    fn shrinkage_never_worsens_conditioning() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let t = random_trial(&mut rng, 4, 40);
        let condition = |gamma: f64| {
            let cov = sample_covariance(&t, gamma).unwrap();
            let eig = crate::spd::EigenDecomposition::of_symmetric(cov.matrix());
            eig.eigenvalues[3] / eig.eigenvalues[0]
        };
        let mut previous = condition(0.0);
        for gamma in [0.01, 0.05, 0.1, 0.3, 0.6, 0.9] {
            let current = condition(gamma);
            assert!(
                current <= previous * (1.0 + 1e-12),
                "gamma {gamma}: {current} > {previous}"
            );
            previous = current;
        }
    }

    #[test]
    fn prototype_averages_matching_trials() {
        let t1 = trial(1, 2, &[1.0, 1.0]);
        let t2 = trial(1, 2, &[2.0, 2.0]);
        let t3 = trial(1, 2, &[3.0, 3.0]);
        let other = Trial::new(DMatrix::from_row_slice(1, 2, &[9.0, 9.0]), "b").unwrap();
        let proto = class_prototype(&[t1, t2, t3, other], "a").unwrap();
        assert_eq!(proto, DMatrix::from_row_slice(1, 2, &[2.0, 2.0]));
    }

    #[test]
    fn prototype_of_single_trial_is_its_signal() {
        let t = trial(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let proto = class_prototype(std::slice::from_ref(&t), "a").unwrap();
        assert_eq!(&proto, t.signal());
    }

    #[test]
    fn prototype_of_opposite_signals_is_zero() {
        let t = trial(1, 2, &[1.0, -2.0]);
        let neg = Trial::new(-t.signal(), "a").unwrap();
        let proto = class_prototype(&[t, neg], "a").unwrap();
        assert!(proto.norm() == 0.0);
    }

    #[test]
    fn prototype_requires_a_matching_trial() {
        let t = trial(1, 2, &[1.0, 2.0]);
        assert!(matches!(
            class_prototype(&[t], "missing"),
            Err(FeatureError::NoMatchingTrials { .. })
        ));
    }

    #[test]
    fn erp_augment_doubles_channel_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let t = random_trial(&mut rng, 8, 64);
        let proto = DMatrix::from_fn(8, 64, |_, _| StandardNormal.sample(&mut rng));
        let augmented = erp_augment(&t, &proto).unwrap();
        assert_eq!(augmented.channels(), 16);
        assert_eq!(augmented.samples(), 64);
        assert_eq!(augmented.label(), t.label());
        assert_eq!(augmented.signal().rows(0, 8), proto.rows(0, 8));
        assert_eq!(augmented.signal().rows(8, 8), t.signal().rows(0, 8));
    }

    #[test]
    fn erp_augment_rejects_shape_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let t = random_trial(&mut rng, 4, 32);
        let wrong = DMatrix::zeros(4, 16);
        assert!(matches!(
            erp_augment(&t, &wrong),
            Err(FeatureError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn erp_augment_with_zero_prototype_gives_scaled_identity_block() {
        // A zero prototype contributes nothing before shrinkage, so after
        // shrinkage the prototype block is exactly γ·(trace/2C)·I and the
        // cross blocks stay zero.
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        let t = random_trial(&mut rng, 2, 32);
        let zero = DMatrix::zeros(2, 32);
        let augmented = erp_augment(&t, &zero).unwrap();
        let cov = sample_covariance(&augmented, 0.05).unwrap();
        let top_left = cov.matrix().view((0, 0), (2, 2)).clone_owned();
        let cross = cov.matrix().view((0, 2), (2, 2)).clone_owned();
        assert!(cross.norm() < 1e-14);
        assert!((top_left[(0, 0)] - top_left[(1, 1)]).abs() < 1e-14);
        assert!(top_left[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn erp_augment_with_own_signal_duplicates_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        let t = random_trial(&mut rng, 3, 32);
        let augmented = erp_augment(&t, t.signal()).unwrap();
        let cov = sample_covariance(&augmented, 0.05).unwrap();
        let upper = cov.matrix().view((0, 0), (3, 3)).clone_owned();
        let lower = cov.matrix().view((3, 3), (3, 3)).clone_owned();
        assert!((upper - lower).norm() < 1e-12);
    }

    #[test]
    fn filter_bank_stacks_one_copy_per_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let t = random_trial(&mut rng, 8, 128);
        let config = ParadigmConfig::FilterBank {
            bands_hz: vec![(12.0, 14.0), (16.0, 18.0), (20.0, 22.0)],
            sampling_rate_hz: 128.0,
        };
        let augmented = filter_bank_augment(&t, &config).unwrap();
        assert_eq!(augmented.channels(), 24);
        assert_eq!(augmented.samples(), 128);
    }

    #[test]
    fn filter_bank_validates_config() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let t = random_trial(&mut rng, 2, 64);
        let empty = ParadigmConfig::FilterBank {
            bands_hz: vec![],
            sampling_rate_hz: 128.0,
        };
        assert!(matches!(
            filter_bank_augment(&t, &empty),
            Err(FeatureError::EmptyBandList)
        ));
        let above_nyquist = ParadigmConfig::FilterBank {
            bands_hz: vec![(10.0, 70.0)],
            sampling_rate_hz: 128.0,
        };
        assert!(matches!(
            filter_bank_augment(&t, &above_nyquist),
            Err(FeatureError::InvalidBand { .. })
        ));
        let inverted = ParadigmConfig::FilterBank {
            bands_hz: vec![(14.0, 12.0)],
            sampling_rate_hz: 128.0,
        };
        assert!(matches!(
            filter_bank_augment(&t, &inverted),
            Err(FeatureError::InvalidBand { .. })
        ));
        assert!(matches!(
            filter_bank_augment(&t, &ParadigmConfig::Plain),
            Err(FeatureError::WrongParadigm { .. })
        ));
    }

    #[test]
    fn wide_band_passes_in_band_content_through() {
        // Content well inside the flat region of a near-full-width band
        // comes back unchanged (the transition only touches the edges).
        let samples = 256;
        let rate = 128.0;
        let signal = DMatrix::from_fn(1, samples, |_, t| {
            let time = t as f64 / rate;
            (2.0 * std::f64::consts::PI * 13.0 * time).sin()
                + 0.5 * (2.0 * std::f64::consts::PI * 30.0 * time).cos()
        });
        let t = Trial::new(signal, "a").unwrap();
        let config = ParadigmConfig::FilterBank {
            bands_hz: vec![(0.0, 63.9)],
            sampling_rate_hz: rate,
        };
        let filtered = filter_bank_augment(&t, &config).unwrap();
        let diff = (filtered.signal() - t.signal()).norm();
        assert!(diff <= 1e-9 * t.signal().norm(), "diff {diff}");
    }

    #[test]
    fn sinusoid_lands_in_its_own_band_only() {
        // 13 Hz tone, 128 Hz sampling, 512 samples: exactly 52 cycles, so
        // the tone sits on an FFT bin inside the 12-14 Hz band's flat top.
        let samples = 512;
        let rate = 128.0;
        let signal = DMatrix::from_fn(1, samples, |_, t| {
            (2.0 * std::f64::consts::PI * 13.0 * t as f64 / rate).sin()
        });
        let t = Trial::new(signal, "a").unwrap();
        let config = ParadigmConfig::FilterBank {
            bands_hz: vec![(12.0, 14.0), (16.0, 18.0), (20.0, 22.0)],
            sampling_rate_hz: rate,
        };
        let filtered = filter_bank_augment(&t, &config).unwrap();
        let input_power = t.signal().row(0).map(|v| v * v).sum();
        let band_power = |band: usize| filtered.signal().row(band).map(|v: f64| v * v).sum();
        assert!(band_power(0) >= 0.90 * input_power);
        assert!(band_power(1) <= 0.05 * input_power);
        assert!(band_power(2) <= 0.05 * input_power);
    }

    #[test]
    fn filter_bank_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let config = ParadigmConfig::FilterBank {
            bands_hz: vec![(8.0, 12.0), (18.0, 24.0)],
            sampling_rate_hz: 128.0,
        };
        let x = random_trial(&mut rng, 2, 128);
        let y = random_trial(&mut rng, 2, 128);
        let combo = Trial::new(x.signal() * 0.7 + y.signal() * -1.3, "a").unwrap();
        let filtered_combo = filter_bank_augment(&combo, &config).unwrap();
        let fx = filter_bank_augment(&x, &config).unwrap();
        let fy = filter_bank_augment(&y, &config).unwrap();
        let recombined = fx.signal() * 0.7 + fy.signal() * -1.3;
        let diff = (filtered_combo.signal() - &recombined).norm();
        assert!(diff <= 1e-8 * recombined.norm().max(1.0), "diff {diff}");
    }

    #[test]
    fn paradigm_config_serde_round_trip() {
        let config = ParadigmConfig::FilterBank {
            bands_hz: vec![(12.0, 14.0)],
            sampling_rate_hz: 256.0,
        };
        let json = serde_json::to_string(&config).unwrap();
        let back: ParadigmConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, config);
        let plain: ParadigmConfig = serde_json::from_str(r#"{"kind":"plain"}"#).unwrap();
        assert_eq!(plain, ParadigmConfig::Plain);
    }
}
