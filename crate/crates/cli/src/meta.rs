//! `mdwm meta` — combine score tables into a cross-dataset comparison.

use std::fs::File;
use std::path::{Path, PathBuf};

use clap::Args;
use mdwm_core::{run_meta_analysis, Alternative, CellSelector, ScoreTable};
use serde::Serialize;

use crate::error::CliError;
use crate::provenance::{sibling_path, Provenance};

/// Compare two pipelines at one (n, λ) cell across one or more score
/// tables. Per dataset, each subject's repetitions are averaged to one
/// paired score; the dataset yields a standardized mean difference and a
/// Wilcoxon signed-rank p-value, and the per-dataset p-values are
/// Stouffer-combined with √(subjects) weights. Prints a readable report
/// and writes a summary CSV with a final `combined` line.
#[derive(Debug, Args)]
pub struct MetaArgs {
    /// Score table CSV produced by `eval`; repeat to pool several datasets.
    #[arg(long = "scores", value_name = "FILE", required = true)]
    pub scores: Vec<PathBuf>,
    /// Output path for the summary CSV.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Calibration size of the compared cell.
    #[arg(long = "n", value_name = "N")]
    pub n: usize,
    /// Geodesic position of the compared cell.
    #[arg(long, value_name = "LAMBDA")]
    pub lambda: f64,
    /// Candidate pipeline (its scores enter the differences positively).
    #[arg(long, value_name = "NAME", default_value = "mdwm")]
    pub method_a: String,
    /// Baseline pipeline.
    #[arg(long, value_name = "NAME", default_value = "mdm-target-only")]
    pub method_b: String,
    /// Alternative hypothesis for the signed-rank test.
    #[arg(long, value_enum, default_value_t = AlternativeArg::Greater)]
    pub alternative: AlternativeArg,
}

/// CLI-facing alternative names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum AlternativeArg {
    /// Method A scores higher than method B.
    Greater,
    /// Method A scores lower than method B.
    Less,
    /// Any difference, in either direction.
    TwoSided,
}

impl From<AlternativeArg> for Alternative {
    fn from(arg: AlternativeArg) -> Self {
        match arg {
            AlternativeArg::Greater => Alternative::Greater,
            AlternativeArg::Less => Alternative::Less,
            AlternativeArg::TwoSided => Alternative::TwoSided,
        }
    }
}

/// What went into the run record.
#[derive(Debug, Serialize)]
struct MetaProvenance<'a> {
    scores: &'a [PathBuf],
    method_a: &'a str,
    method_b: &'a str,
    n_train: usize,
    lambda: f64,
    alternative: &'a str,
}

pub fn run(args: MetaArgs) -> Result<(), CliError> {
    let mut tables = Vec::with_capacity(args.scores.len());
    for path in &args.scores {
        let reader = File::open(path).map_err(|err| CliError::io_at(path, err))?;
        let table = ScoreTable::from_csv(reader).map_err(|err| match CliError::from(err) {
            // Parse errors carry a line number; add which file.
            CliError::Validation(msg) => CliError::Validation(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        tables.push(table);
    }

    let cell = CellSelector {
        n_train: args.n,
        lambda: args.lambda,
    };
    let alternative = Alternative::from(args.alternative);
    let result = run_meta_analysis(&tables, &args.method_a, &args.method_b, cell, alternative)?;

    write_summary(&result.summary_csv(), &args.out)?;
    let record = MetaProvenance {
        scores: &args.scores,
        method_a: &args.method_a,
        method_b: &args.method_b,
        n_train: cell.n_train,
        lambda: cell.lambda,
        alternative: alternative.name(),
    };
    Provenance::new("meta", record).write(&sibling_path(&args.out))?;

    print!("{}", result.text_report());
    println!("\nwrote summary to {}", args.out.display());
    Ok(())
}

fn write_summary(csv: &str, out: &Path) -> Result<(), CliError> {
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|err| CliError::io_at(parent, err))?;
    }
    std::fs::write(out, csv).map_err(|err| CliError::io_at(out, err))
}
