//! Monte Carlo laboratory for the tensor estimators and inference procedures
//! in `tensorinf-core`: instance generators, a deterministic parallel driver
//! and empirical summaries.

pub mod config;
pub mod driver;
pub mod error;
pub mod experiments;
pub mod generate;
pub mod rng;
pub mod stats;

pub use config::{ExperimentKind, InitMode, NoiseKind, SimConfig, TruthMode};
pub use driver::{run_monte_carlo, run_monte_carlo_with_threads, ReplicateSummary, SimReport, SummaryStats};
pub use error::{SimError, SimResult};
pub use experiments::Outcome;
pub use rng::GENERATOR_ID;
pub use stats::{coverage_rate, ks_distance, moments, Coverage, Moments};
