//! `mfkrig` — batch CLI for fitting, evaluating, and plotting single- and
//! multi-fidelity Kriging surrogates.
//!
//! Exit codes: 0 success, 2 nesting violation, 3 data shape/schema problem,
//! 4 usage error, 1 anything unexpected.

mod commands;
mod gridspec;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "mfkrig",
    version,
    about = "Kriging and recursive multi-fidelity co-kriging surrogate models",
    after_help = "The environment variable MFKRIG_SEED overrides every --seed flag.\n\
                  Grid specs are start:stop:step, inclusive of start, exclusive of stop."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a surrogate model and write it as a JSON document
    Fit(FitArgs),
    /// Evaluate fitted models on a test CSV and write a ranked report
    Eval(EvalArgs),
    /// Sample a fitted 1-D model on a grid: SVG chart plus curve CSV
    Plot(PlotArgs),
    /// Deterministically split a CSV dataset into train and test files
    Split(SplitArgs),
    /// Generate formula-based and benchmark datasets
    Gen(GenArgs),
    /// Fit several methods on the same data and rank them on a test set
    Compare(CompareArgs),
}

#[derive(Args)]
pub struct FitArgs {
    /// Fitting method: kriging, mfk, mfk-pls, or mfk-plsk
    #[arg(long)]
    pub method: String,
    /// High-fidelity training CSV
    #[arg(long)]
    pub hf: PathBuf,
    /// Low-fidelity training CSV (multi-fidelity methods)
    #[arg(long)]
    pub lf: Option<PathBuf>,
    /// Closed-form low-fidelity source instead of --lf: white or forrester-low
    #[arg(long, value_name = "FORMULA")]
    pub lf_formula: Option<String>,
    /// Evaluation grid start:stop:step for --lf-formula
    #[arg(long, value_name = "SPEC")]
    pub lf_grid: Option<String>,
    /// Output model file (JSON)
    #[arg(long)]
    pub out: PathBuf,
    /// Kernel family: squared-exponential, matern52, or matern32
    #[arg(long, default_value = "squared-exponential")]
    pub kernel: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hyperparameter-search restarts
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Iteration cap per restart
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    /// Correlation jitter; escalated automatically on factorization trouble
    #[arg(long, default_value_t = 1e-10)]
    pub nugget: f64,
    /// PLS component count for the projected variants (default: min(3, d))
    #[arg(long)]
    pub pls_components: Option<usize>,
    /// Fit even when high-fidelity points are missing from the low-fidelity design
    #[arg(long)]
    pub allow_non_nested: bool,
    /// Max-norm tolerance for nested-design point matching
    #[arg(long, default_value_t = 1e-9)]
    pub nesting_tol: f64,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Fitted model file; repeat to compare several
    #[arg(long = "model", required = true)]
    pub models: Vec<PathBuf>,
    /// Test CSV with observed responses
    #[arg(long)]
    pub test: PathBuf,
    /// Interval z-multiplier for the coverage column
    #[arg(long, default_value_t = 1.96)]
    pub z: f64,
    /// Directory for report.json and report.txt
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Split seed recorded in the report metadata
    #[arg(long)]
    pub split_seed: Option<u64>,
}

#[derive(Args)]
pub struct PlotArgs {
    /// Fitted model file
    #[arg(long)]
    pub model: PathBuf,
    /// Query grid start:stop:step
    #[arg(long)]
    pub grid: String,
    #[arg(long)]
    pub out_svg: PathBuf,
    #[arg(long)]
    pub out_csv: PathBuf,
    /// Half-width multiplier of the shaded band
    #[arg(long, default_value_t = 1.96)]
    pub z: f64,
    /// Optional test CSV drawn as crosses
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Chart title (default: model file stem)
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Args)]
pub struct SplitArgs {
    /// Input CSV
    #[arg(long)]
    pub data: PathBuf,
    /// Fraction of rows moved to the test set
    #[arg(long, default_value_t = 0.3)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub train_out: PathBuf,
    #[arg(long)]
    pub test_out: PathBuf,
}

#[derive(Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,
}

#[derive(Subcommand)]
pub enum GenKind {
    /// Evaluate the empirical conductivity line on a temperature grid (fidelity 1)
    White {
        /// Temperature grid start:stop:step in kelvin
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: PathBuf,
        /// Evaluate outside the validity range with warnings instead of failing
        #[arg(long)]
        warn_only: bool,
    },
    /// The 1-D benchmark pair on [0, 1]
    Forrester {
        /// Which level to evaluate: high or low
        #[arg(long)]
        level: String,
        /// Grid spec start:stop:step
        #[arg(long)]
        grid: Option<String>,
        /// Explicit comma-separated points (alternative to --grid)
        #[arg(long)]
        points: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthetic sparse-measurement analogue plus its nested line design
    #[command(name = "u3si2-analogue")]
    U3si2Analogue {
        /// Output CSV for the 12 noisy measurements (fidelity 2)
        #[arg(long)]
        out: PathBuf,
        /// Optional output CSV for the matching line design (fidelity 1)
        #[arg(long)]
        lf_out: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Args)]
pub struct CompareArgs {
    /// High-fidelity training CSV
    #[arg(long)]
    pub hf: PathBuf,
    /// Test CSV with observed responses
    #[arg(long)]
    pub test: PathBuf,
    /// Low-fidelity training CSV
    #[arg(long)]
    pub lf: Option<PathBuf>,
    /// Closed-form low-fidelity source instead of --lf: white or forrester-low
    #[arg(long, value_name = "FORMULA")]
    pub lf_formula: Option<String>,
    /// Evaluation grid start:stop:step for --lf-formula
    #[arg(long, value_name = "SPEC")]
    pub lf_grid: Option<String>,
    /// Comma-separated methods to fit
    #[arg(long, default_value = "kriging,mfk,mfk-pls,mfk-plsk")]
    pub methods: String,
    /// Directory for model files and reports
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 1.96)]
    pub z: f64,
    #[arg(long, default_value = "squared-exponential")]
    pub kernel: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub nugget: f64,
    #[arg(long)]
    pub pls_components: Option<usize>,
    #[arg(long)]
    pub allow_non_nested: bool,
    #[arg(long, default_value_t = 1e-9)]
    pub nesting_tol: f64,
    /// Split seed recorded in the report metadata
    #[arg(long)]
    pub split_seed: Option<u64>,
}

fn exit_code_for(e: &mfkrig::Error) -> u8 {
    use mfkrig::Error;
    match e {
        Error::Nesting(_) => 2,
        Error::ShapeMismatch { .. }
        | Error::Parse { .. }
        | Error::Schema(_)
        | Error::InsufficientData(_)
        | Error::DuplicateInputs { .. }
        | Error::DegenerateResponse(_) => 3,
        Error::InvalidArgument(_) | Error::OutOfRange(_) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            };
        }
    };
    let result = match &cli.command {
        Command::Fit(args) => commands::cmd_fit(args),
        Command::Eval(args) => commands::cmd_eval(args),
        Command::Plot(args) => commands::cmd_plot(args),
        Command::Split(args) => commands::cmd_split(args),
        Command::Gen(args) => commands::cmd_gen(args),
        Command::Compare(args) => commands::cmd_compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
