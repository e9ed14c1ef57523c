//! Parallel Monte Carlo driver.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentKind, SimConfig};
use crate::error::{SimError, SimResult};
use crate::experiments::{run_replicate, Outcome};
use crate::rng::GENERATOR_ID;
use crate::stats::{coverage_rate, ks_distance, moments, Coverage, Moments};

/// Largest tolerated fraction of failed replicates.
pub const MAX_FAILURE_FRACTION: f64 = 0.10;

/// Per-replicate arrays, all of length `reps` and indexed by replicate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub oracle: Vec<Option<f64>>,
    pub plug_in: Vec<Option<f64>>,
    pub raw: Vec<Option<f64>>,
    pub covered: Vec<Option<bool>>,
    pub sigma_ratio: Vec<Option<f64>>,
    pub max_sin_theta: Vec<Option<f64>>,
    pub components: Vec<Option<Vec<f64>>>,
    pub permutation: Vec<Option<Vec<usize>>>,
    /// Error message of each failed replicate.
    pub errors: Vec<Option<String>>,
    /// Wall-clock milliseconds per replicate. Not serialized so that output
    /// is reproducible byte for byte.
    #[serde(skip)]
    pub timing_ms: Vec<f64>,
}

impl ReplicateSummary {
    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }

    fn push(&mut self, result: SimResult<Outcome>, ms: f64) {
        let (o, err) = match result {
            Ok(o) => (o, None),
            Err(e) => (Outcome::default(), Some(e.to_string())),
        };
        self.oracle.push(o.oracle);
        self.plug_in.push(o.plug_in);
        self.raw.push(o.raw);
        self.covered.push(o.covered);
        self.sigma_ratio.push(o.sigma_ratio);
        self.max_sin_theta.push(o.max_sin_theta);
        self.components.push(o.components);
        self.permutation.push(o.permutation);
        self.errors.push(err);
        self.timing_ms.push(ms);
    }

    /// Oracle and plug-in values of the replicates where both exist.
    pub fn paired(&self) -> Vec<(f64, f64)> {
        self.oracle.iter().zip(&self.plug_in).filter_map(|(a, b)| Some(((*a)?, (*b)?))).collect()
    }
}

fn present<T: Copy>(xs: &[Option<T>]) -> Vec<T> {
    xs.iter().flatten().copied().collect()
}

/// Aggregates over the successful replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    /// `oracle` or `plug-in`: which statistic `ks` refers to.
    pub headline: String,
    pub ks: Option<f64>,
    pub ks_oracle: Option<f64>,
    pub ks_plug_in: Option<f64>,
    /// KS distance of each coordinate of vector-valued statistics.
    pub ks_components: Option<Vec<f64>>,
    pub oracle_moments: Option<Moments>,
    pub plug_in_moments: Option<Moments>,
    pub raw_moments: Option<Moments>,
    pub coverage: Option<Coverage>,
    pub failures: usize,
    /// Successful replicates for which no oracle statistic is defined.
    pub undefined: usize,
}

impl SummaryStats {
    fn from_replicates(kind: ExperimentKind, reps: &ReplicateSummary) -> SummaryStats {
        let oracle = present(&reps.oracle);
        let plug_in = present(&reps.plug_in);
        let ks_oracle = ks_distance(&oracle).ok();
        let ks_plug_in = ks_distance(&plug_in).ok();
        let plug_in_headline = kind == ExperimentKind::PcaPlugin;
        let ks_components = (kind == ExperimentKind::Rank1Linear)
            .then(|| {
                let rows: Vec<&Vec<f64>> = reps.components.iter().flatten().collect();
                (0..3)
                    .map(|j| ks_distance(&rows.iter().map(|c| c[j]).collect::<Vec<_>>()).ok())
                    .collect::<Option<Vec<f64>>>()
            })
            .flatten();
        let failures = reps.errors.iter().filter(|e| e.is_some()).count();
        SummaryStats {
            headline: if plug_in_headline { "plug-in" } else { "oracle" }.to_string(),
            ks: if plug_in_headline { ks_plug_in } else { ks_oracle },
            ks_oracle,
            ks_plug_in,
            ks_components,
            oracle_moments: moments(&oracle).ok(),
            plug_in_moments: moments(&plug_in).ok(),
            raw_moments: moments(&present(&reps.raw)).ok(),
            coverage: coverage_rate(&present(&reps.covered)).ok(),
            failures,
            undefined: reps.len() - failures - oracle.len(),
        }
    }
}

/// Full output of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub generator: String,
    pub seed: u64,
    pub config: SimConfig,
    pub summary: SummaryStats,
    pub replicates: ReplicateSummary,
}

/// Runs every replicate on the current rayon pool.
pub fn run_monte_carlo(config: &SimConfig) -> SimResult<SimReport> {
    let config = config.resolved()?;
    let results: Vec<(SimResult<Outcome>, f64)> = (0..config.reps as u64)
        .into_par_iter()
        .map(|i| {
            let start = Instant::now();
            let r = run_replicate(&config, i);
            (r, start.elapsed().as_secs_f64() * 1e3)
        })
        .collect();

    let mut replicates = ReplicateSummary::default();
    for (r, ms) in results {
        replicates.push(r, ms);
    }
    let failed: Vec<usize> = (0..replicates.len()).filter(|&i| replicates.errors[i].is_some()).collect();
    if failed.len() as f64 > MAX_FAILURE_FRACTION * config.reps as f64 {
        let first = failed[0];
        return Err(SimError::TooManyFailures {
            failed: failed.len(),
            reps: config.reps,
            first_index: first,
            first_message: replicates.errors[first].clone().unwrap_or_default(),
        });
    }
    let summary = SummaryStats::from_replicates(config.kind, &replicates);
    Ok(SimReport { generator: GENERATOR_ID.to_string(), seed: config.seed, config, summary, replicates })
}

/// Runs on a dedicated pool of `threads` workers (`None`: available parallelism).
pub fn run_monte_carlo_with_threads(config: &SimConfig, threads: Option<usize>) -> SimResult<SimReport> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(SimError::Config("thread count must be positive".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| SimError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_monte_carlo(config))
}
