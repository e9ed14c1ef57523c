use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "tensorinf", version, about = "Low-rank tensor estimation, inference and Monte Carlo experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte Carlo experiment and summarize it
    Sim(SimArgs),
    /// Fit an estimator to a data file and report plug-in confidence regions
    Fit {
        #[command(subcommand)]
        model: FitCommand,
    },
    /// Describe a TNSR tensor file or a regression dataset
    Info(InfoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TruthArg {
    Redraw,
    Fixed,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Experiment kind: pca-normal, pca-plugin, orth, rank1-linear, rank1-entry,
    /// coverage-entry, coverage-subspace, regression, rank1-subgaussian
    pub kind: String,
    /// Dimension of every mode
    #[arg(long)]
    pub p: usize,
    /// Tucker rank or number of orthogonal components
    #[arg(long, default_value_t = 3)]
    pub r: usize,
    /// Signal strength exponent, lambda_min = p^gamma
    #[arg(long, default_value_t = 0.9)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Regression sample size (default 5 ceil(p^1.5))
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// spectral, oracle, or oracle:<epsilon>
    #[arg(long, default_value = "spectral")]
    pub init: String,
    /// gaussian or rademacher
    #[arg(long, default_value = "gaussian")]
    pub noise: String,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write the output here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SimFormat::Json)]
    pub format: SimFormat,
    /// Redraw the signal for every replicate or keep the first draw
    #[arg(long, value_enum, default_value_t = TruthArg::Redraw)]
    pub truth: TruthArg,
    /// Orthogonal component (1-based) reported by the orth experiment
    #[arg(long)]
    pub component: Option<usize>,
    /// Use v = w = e_1 in the rank1-subgaussian experiment
    #[arg(long)]
    pub localized: bool,
    /// Entrywise floor: log-p, off, or a number
    #[arg(long)]
    pub floor: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitFormat {
    Json,
}

#[derive(Debug, Args)]
pub struct CommonFitArgs {
    /// Input file
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Recorded in the output; fits are deterministic
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FitFormat::Json)]
    pub format: FitFormat,
}

#[derive(Debug, Subcommand)]
pub enum FitCommand {
    /// Tucker PCA: HOOI start, two refinement sweeps, per-mode subspace regions
    Pca {
        #[command(flatten)]
        common: CommonFitArgs,
        /// Tucker rank, either one value or r1,r2,r3
        #[arg(long)]
        r: String,
        /// HOOI sweeps before the two refinement sweeps
        #[arg(long, default_value_t = 2)]
        sweeps: usize,
        /// Known noise level; estimated from the residual when absent
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Orthogonally decomposable PCA: deflation start, two power sweeps per component
    Orth {
        #[command(flatten)]
        common: CommonFitArgs,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Rank-one PCA by power iteration, with entrywise confidence intervals
    Rank1 {
        #[command(flatten)]
        common: CommonFitArgs,
        /// Entry i,j,k (0-based) to report; repeatable, default 0,0,0
        #[arg(long = "entry")]
        entries: Vec<String>,
        /// Number of power iterations (default max(10, ceil(2 ln p)))
        #[arg(long)]
        iters: Option<usize>,
        /// Entrywise floor: log-p, off, or a number
        #[arg(long, default_value = "log-p")]
        floor: String,
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Tucker regression: gradient-descent start, two alternating iterations
    Regression {
        #[command(flatten)]
        common: CommonFitArgs,
        #[arg(long)]
        r: String,
        /// Observations held out for the noise estimate (default ceil(p^1.5))
        #[arg(long)]
        holdout: Option<usize>,
        /// Known noise level; skips the sample-splitting estimate
        #[arg(long)]
        sigma: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InfoFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InfoFormat::Text)]
    pub format: InfoFormat,
}
