//! `mdwm eval` — leave-one-subject-out transfer evaluation of a dataset.

use std::path::{Path, PathBuf};

use clap::Args;
use mdwm_core::datasets::{load_dataset, Dataset};
use mdwm_core::features::ParadigmConfig;
use mdwm_core::{n_train_is_feasible, run_transfer_evaluation, EvalConfig, Pipeline, ScoreTable};
use serde::{Deserialize, Serialize};

use crate::config_file::{self, merge, merge_switch};
use crate::error::CliError;
use crate::provenance::{sibling_path, Provenance};

/// Reference grids: used when no explicit grid is given, with infeasible
/// calibration sizes dropped.
const DEFAULT_N_GRID: [usize; 3] = [5, 30, 55];
const DEFAULT_LAMBDA_GRID: [f64; 4] = [0.0, 0.1, 0.3, 0.7];
const DEFAULT_REPETITIONS: usize = 10;

/// Evaluate each subject as the transfer target of all others: pooled
/// source class means are blended along the geodesic toward the target's
/// own calibration means at every λ of the grid, and scored on the target's
/// held-out trials. Writes one balanced-accuracy row per
/// (subject, pipeline, n, λ, repetition) plus a provenance record, both
/// byte-identical across reruns and worker counts.
#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Dataset directory produced by `generate`.
    #[arg(long, value_name = "DIR")]
    pub dataset: PathBuf,
    /// Output path for the score table CSV.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Calibration trials per subject; repeat for a grid
    /// [default: the feasible part of {5, 30, 55}]
    #[arg(long = "n", value_name = "N")]
    pub n: Option<Vec<usize>>,
    /// Geodesic position in [0, 1] (0 = target-only, 1 = source-only);
    /// repeat for a grid [default: 0 0.1 0.3 0.7]
    #[arg(long, value_name = "LAMBDA")]
    pub lambda: Option<Vec<f64>>,
    /// Random calibration/test splits per (subject, n) [default: 10]
    #[arg(long, value_name = "COUNT")]
    pub reps: Option<usize>,
    /// Master seed for the calibration splits [default: 7]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pipeline to run; repeat to select several [default: both]
    #[arg(long = "pipeline", value_enum, value_name = "NAME")]
    pub pipeline: Option<Vec<PipelineArg>>,
    /// Covariance shrinkage γ in [0, 1) [default: 0.05]
    #[arg(long, value_name = "GAMMA")]
    pub shrinkage: Option<f64>,
    /// Stack this class's mean waveform above every trial before the
    /// covariance (event-related-potential features).
    #[arg(long, value_name = "CLASS")]
    pub erp_prototype: Option<String>,
    /// Band-pass band LOW:HIGH in Hz; repeat to stack several filtered
    /// copies per trial (filter-bank features).
    #[arg(long, value_name = "LOW:HIGH")]
    pub band: Option<Vec<String>>,
    /// Use the reference protocol: λ grid {0, 0.1, 0.3, 0.7}, the feasible
    /// part of n grid {5, 30, 55} plus the n = 2·classes operating point,
    /// 10 repetitions. Conflicts with explicit --n/--lambda/--reps.
    #[arg(long)]
    pub paper_defaults: bool,
    /// Worker threads [default: all cores]. Scores are byte-identical for
    /// every value, so this is a runtime knob and not part of the
    /// provenance record.
    #[arg(long, value_name = "COUNT")]
    pub jobs: Option<usize>,
    /// Record wall-clock train/test seconds per row. Off by default:
    /// timings are inherently irreproducible, and all-zero columns keep
    /// reruns byte-identical.
    #[arg(long)]
    pub measure_time: bool,
    /// TOML file with the same keys as the flags (underscores for dashes;
    /// paths and --jobs stay on the command line). A key set both here and
    /// as a flag is an error.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

/// CLI-facing pipeline names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineArg {
    /// Geodesic blend of pooled source means and target calibration means.
    Mdwm,
    /// Baseline: minimum-distance classifier on target calibration only.
    MdmTargetOnly,
}

impl From<PipelineArg> for Pipeline {
    fn from(arg: PipelineArg) -> Self {
        match arg {
            PipelineArg::Mdwm => Pipeline::Mdwm,
            PipelineArg::MdmTargetOnly => Pipeline::MdmTargetOnly,
        }
    }
}

/// The `--config` file form: every key optional, unknown keys rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalFileConfig {
    n: Option<Vec<usize>>,
    lambda: Option<Vec<f64>>,
    reps: Option<usize>,
    seed: Option<u64>,
    pipeline: Option<Vec<PipelineArg>>,
    shrinkage: Option<f64>,
    erp_prototype: Option<String>,
    band: Option<Vec<String>>,
    paper_defaults: Option<bool>,
    measure_time: Option<bool>,
}

/// What went into the run record: the data identity plus the full resolved
/// protocol configuration.
#[derive(Debug, Serialize)]
struct EvalProvenance<'a> {
    dataset_path: &'a Path,
    dataset_name: &'a str,
    #[serde(flatten)]
    protocol: &'a EvalConfig,
}

pub fn run(args: EvalArgs) -> Result<(), CliError> {
    let file: EvalFileConfig = config_file::load(args.config.as_deref())?;

    let n = merge("n", args.n, file.n)?;
    let lambda = merge("lambda", args.lambda, file.lambda)?;
    let reps = merge("reps", args.reps, file.reps)?;
    let seed = merge("seed", args.seed, file.seed)?;
    let pipeline = merge("pipeline", args.pipeline, file.pipeline)?;
    let shrinkage = merge("shrinkage", args.shrinkage, file.shrinkage)?;
    let erp_prototype = merge("erp_prototype", args.erp_prototype, file.erp_prototype)?;
    let band = merge("band", args.band, file.band)?;
    let paper_defaults = merge_switch("paper_defaults", args.paper_defaults, file.paper_defaults)?;
    let measure_time = merge_switch("measure_time", args.measure_time, file.measure_time)?;

    if paper_defaults {
        for (key, set) in [
            ("n", n.is_some()),
            ("lambda", lambda.is_some()),
            ("reps", reps.is_some()),
        ] {
            if set {
                return Err(CliError::Validation(format!(
                    "paper_defaults fixes the n, lambda, and repetition grids; drop '{key}' or the switch"
                )));
            }
        }
    }

    let dataset = load_dataset(&args.dataset)?;
    let classes = dataset.class_labels().len();

    let n_train = match n {
        // An explicit grid is taken at face value; infeasible values fail
        // validation with the per-subject capacity message.
        Some(values) => values,
        None => {
            let mut candidates = DEFAULT_N_GRID.to_vec();
            if paper_defaults {
                candidates.push(2 * classes);
            }
            clipped_grid(&dataset, candidates)?
        }
    };

    let config = EvalConfig {
        n_train,
        lambdas: lambda.unwrap_or_else(|| DEFAULT_LAMBDA_GRID.to_vec()),
        repetitions: reps.unwrap_or(DEFAULT_REPETITIONS),
        seed: seed.unwrap_or_else(|| EvalConfig::default().seed),
        pipelines: match pipeline {
            Some(list) => list.into_iter().map(Pipeline::from).collect(),
            None => vec![Pipeline::Mdwm, Pipeline::MdmTargetOnly],
        },
        paradigm: resolve_paradigm(&dataset, erp_prototype, band)?,
        shrinkage: shrinkage.unwrap_or_else(|| EvalConfig::default().shrinkage),
        measure_time,
    };

    let table = match args.jobs {
        None => run_transfer_evaluation(&dataset, &config)?,
        Some(0) => return Err(CliError::Validation("--jobs must be at least 1".to_owned())),
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|err| {
                CliError::Validation(format!("cannot build a {jobs}-thread worker pool: {err}"))
            })?
            .install(|| run_transfer_evaluation(&dataset, &config))?,
    };

    write_table(&table, &args.out)?;
    let record = EvalProvenance {
        dataset_path: &args.dataset,
        dataset_name: dataset.name(),
        protocol: &config,
    };
    Provenance::new("eval", record).write(&sibling_path(&args.out))?;

    println!(
        "wrote {} score rows ({} subjects x {} n x {} lambda x {} reps x {} pipelines) to {}",
        table.rows().len(),
        dataset.subjects().len(),
        config.n_train.len(),
        config.lambdas.len(),
        config.repetitions,
        config.pipelines.len(),
        args.out.display(),
    );
    Ok(())
}

/// Keep the feasible candidates, sorted and deduplicated. An empty result
/// reports the dataset's actual feasible range so the caller can pass an
/// explicit grid.
fn clipped_grid(dataset: &Dataset, mut candidates: Vec<usize>) -> Result<Vec<usize>, CliError> {
    candidates.sort_unstable();
    candidates.dedup();
    let all = candidates.clone();
    candidates.retain(|&n| n_train_is_feasible(dataset, n));
    if candidates.is_empty() {
        let hint = match feasible_range(dataset) {
            Some((low, high)) => format!("feasible n for this dataset is {low}..={high}"),
            None => {
                "no n is feasible: some subject cannot keep one test trial per class".to_owned()
            }
        };
        return Err(CliError::Validation(format!(
            "no value of the default calibration grid {all:?} is feasible for dataset {:?}; {hint}. Pass --n explicitly.",
            dataset.name(),
        )));
    }
    Ok(candidates)
}

/// The contiguous range of feasible calibration sizes, if any. The
/// even-split allocation takes a non-decreasing share of every class as n
/// grows, so feasibility is an interval starting at the class count.
fn feasible_range(dataset: &Dataset) -> Option<(usize, usize)> {
    let classes = dataset.class_labels().len();
    let cap = dataset
        .subjects()
        .iter()
        .map(|subject| subject.trials().len())
        .min()?;
    let feasible: Vec<usize> = (classes..cap)
        .take_while(|&n| n_train_is_feasible(dataset, n))
        .collect();
    Some((*feasible.first()?, *feasible.last()?))
}

/// Turn the feature flags into a paradigm: at most one of `--erp-prototype`
/// and `--band`, default plain covariance.
fn resolve_paradigm(
    dataset: &Dataset,
    erp_prototype: Option<String>,
    band: Option<Vec<String>>,
) -> Result<ParadigmConfig, CliError> {
    match (erp_prototype, band) {
        (Some(_), Some(_)) => Err(CliError::Validation(
            "erp_prototype and band select different feature paradigms; use only one".to_owned(),
        )),
        (Some(class), None) => Ok(ParadigmConfig::ErpPrototype {
            prototype_class: class,
        }),
        (None, Some(bands)) => Ok(ParadigmConfig::FilterBank {
            bands_hz: bands
                .iter()
                .map(|spec| parse_band(spec))
                .collect::<Result<Vec<_>, _>>()?,
            sampling_rate_hz: dataset.sampling_rate_hz(),
        }),
        (None, None) => Ok(ParadigmConfig::Plain),
    }
}

/// Parse `LOW:HIGH` in Hz.
fn parse_band(spec: &str) -> Result<(f64, f64), CliError> {
    let invalid = || {
        CliError::Validation(format!(
            "band {spec:?} is not of the form LOW:HIGH (two numbers in Hz, e.g. 8:12)"
        ))
    };
    let (low, high) = spec.split_once(':').ok_or_else(invalid)?;
    let low: f64 = low.trim().parse().map_err(|_| invalid())?;
    let high: f64 = high.trim().parse().map_err(|_| invalid())?;
    Ok((low, high))
}

/// Write the CSV, creating parent directories as needed.
fn write_table(table: &ScoreTable, out: &Path) -> Result<(), CliError> {
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|err| CliError::io_at(parent, err))?;
    }
    std::fs::write(out, table.to_csv_string()).map_err(|err| CliError::io_at(out, err))
}
