use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tensorinf_core::inference::EntryFloor;

use crate::error::{SimError, SimResult};

/// Experiment families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Tucker PCA, headline statistic uses the true `sigma` and `Lambda_1`.
    PcaNormal,
    /// Tucker PCA, headline statistic uses `sigma_hat` and `Lambda_hat_1`.
    PcaPlugin,
    /// Orthogonally decomposable PCA, overlap statistic of one component.
    Orth,
    /// Rank-one PCA, linear forms of the three loadings.
    Rank1Linear,
    /// Rank-one PCA with flat loadings, entrywise statistic at `(0, 0, 0)`.
    Rank1Entry,
    /// Rank-one PCA with Haar loadings, entrywise interval coverage at `(0, 0, 0)`.
    CoverageEntry,
    /// Tucker PCA, subspace region coverage.
    CoverageSubspace,
    /// Tucker regression with two-step alternating minimization.
    Regression,
    /// Rank-one PCA under non-Gaussian noise with the kurtosis-corrected scale.
    Rank1Subgaussian,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::PcaNormal,
        ExperimentKind::PcaPlugin,
        ExperimentKind::Orth,
        ExperimentKind::Rank1Linear,
        ExperimentKind::Rank1Entry,
        ExperimentKind::CoverageEntry,
        ExperimentKind::CoverageSubspace,
        ExperimentKind::Regression,
        ExperimentKind::Rank1Subgaussian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::PcaNormal => "pca-normal",
            ExperimentKind::PcaPlugin => "pca-plugin",
            ExperimentKind::Orth => "orth",
            ExperimentKind::Rank1Linear => "rank1-linear",
            ExperimentKind::Rank1Entry => "rank1-entry",
            ExperimentKind::CoverageEntry => "coverage-entry",
            ExperimentKind::CoverageSubspace => "coverage-subspace",
            ExperimentKind::Regression => "regression",
            ExperimentKind::Rank1Subgaussian => "rank1-subgaussian",
        }
    }

    /// Whether the signal has rank one regardless of `r`.
    pub fn is_rank_one(self) -> bool {
        matches!(
            self,
            ExperimentKind::Rank1Linear
                | ExperimentKind::Rank1Entry
                | ExperimentKind::CoverageEntry
                | ExperimentKind::Rank1Subgaussian
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = SimError;

    fn from_str(s: &str) -> SimResult<Self> {
        ExperimentKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
            SimError::Config(format!("unknown experiment kind '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

/// How the estimator pipeline is started.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum InitMode {
    /// Data-driven start: HOOI for Tucker PCA, deflated power iterations for
    /// orthogonal components, spectral power iterations for rank one and
    /// gradient descent for regression.
    Spectral,
    /// Truth perturbed to spectral `sinΘ` distance `epsilon` in every mode.
    /// Without an explicit value the distance is `sqrt(p) sigma / lambda_min`
    /// for PCA and `sqrt(p / n) sigma / lambda_min` for regression.
    OraclePerturbed { epsilon: Option<f64> },
}

impl FromStr for InitMode {
    type Err = SimError;

    /// `spectral`, `oracle`, or `oracle:<epsilon>`.
    fn from_str(s: &str) -> SimResult<Self> {
        match s {
            "spectral" => Ok(InitMode::Spectral),
            "oracle" => Ok(InitMode::OraclePerturbed { epsilon: None }),
            _ => match s.strip_prefix("oracle:").map(str::parse::<f64>) {
                Some(Ok(e)) => Ok(InitMode::OraclePerturbed { epsilon: Some(e) }),
                _ => Err(SimError::Config(format!("unknown init mode '{s}' (spectral, oracle, oracle:<eps>)"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Gaussian,
    /// `±sigma` with equal probability; kurtosis 1.
    Rademacher,
}

impl NoiseKind {
    /// `E[Z^4] / sigma^4`.
    pub fn kurtosis(self) -> f64 {
        match self {
            NoiseKind::Gaussian => 3.0,
            NoiseKind::Rademacher => 1.0,
        }
    }
}

impl FromStr for NoiseKind {
    type Err = SimError;

    fn from_str(s: &str) -> SimResult<Self> {
        match s {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "rademacher" => Ok(NoiseKind::Rademacher),
            _ => Err(SimError::Config(format!("unknown noise kind '{s}' (gaussian, rademacher)"))),
        }
    }
}

/// Whether the signal is redrawn for every replicate or drawn once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruthMode {
    Redraw,
    Fixed,
}

/// A fully specified Monte Carlo experiment.
///
/// `n`, `component` and `floor` are optional in input and filled in by
/// [`SimConfig::resolved`]; the echoed configuration is always resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub kind: ExperimentKind,
    pub p: usize,
    pub r: usize,
    /// Signal strength exponent: `lambda_min = p^gamma`.
    pub gamma: f64,
    pub sigma: f64,
    /// Regression sample size; defaults to `5 ceil(p^{3/2})`.
    pub n: Option<usize>,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
    pub init: InitMode,
    pub noise: NoiseKind,
    pub truth: TruthMode,
    /// Orthogonal component (1-based) whose statistic is reported; defaults to `r`.
    pub component: Option<usize>,
    /// Use `v = w = e_1` in the sub-Gaussian rank-one experiment.
    pub localized: bool,
    /// Entrywise interval floor; defaults to `log(p) sigma^2 / lambda_hat^2`.
    pub floor: Option<EntryFloor>,
}

impl SimConfig {
    /// Defaults: `sigma = 1`, `alpha = 0.05`, seed 0, spectral init,
    /// Gaussian noise, truth redrawn per replicate.
    pub fn new(kind: ExperimentKind, p: usize, r: usize, gamma: f64, reps: usize) -> Self {
        SimConfig {
            kind,
            p,
            r,
            gamma,
            sigma: 1.0,
            n: None,
            reps,
            alpha: 0.05,
            seed: 0,
            init: InitMode::Spectral,
            noise: NoiseKind::Gaussian,
            truth: TruthMode::Redraw,
            component: None,
            localized: false,
            floor: None,
        }
    }

    pub fn validate(&self) -> SimResult<()> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.p == 0 || self.r == 0 {
            return bad(format!("dimensions must be positive (p = {}, r = {})", self.p, self.r));
        }
        if self.r > self.p {
            return bad(format!("rank {} exceeds dimension {}", self.r, self.p));
        }
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if (self.reps as u64) >= crate::rng::MAX_REPLICATES {
            return bad(format!("reps must be below 2^56, got {}", self.reps));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.5) {
            return bad(format!("gamma must lie in (0, 1.5], got {}", self.gamma));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be a nonnegative finite number, got {}", self.sigma));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if let Some(n) = self.n {
            if n == 0 {
                return bad("n must be positive".into());
            }
        }
        if let InitMode::OraclePerturbed { epsilon: Some(e) } = self.init {
            if !(0.0..1.0).contains(&e) {
                return bad(format!("init perturbation must lie in [0, 1), got {e}"));
            }
        }
        if let Some(c) = self.component {
            if c == 0 || c > self.r {
                return bad(format!("component must lie in 1..={}, got {c}", self.r));
            }
        }
        if let Some(EntryFloor::Fixed(f)) = self.floor {
            if !(f >= 0.0 && f.is_finite()) {
                return bad(format!("entry floor must be nonnegative, got {f}"));
            }
        }
        if self.kind == ExperimentKind::Regression {
            let n = self.resolved_n();
            let unknowns = self.p * self.r;
            if n < 2 * unknowns.max(self.r.pow(3)) {
                return bad(format!("regression with n = {n} is too small for {unknowns} unknowns per factor"));
            }
        }
        Ok(())
    }

    fn resolved_n(&self) -> usize {
        self.n.unwrap_or_else(|| 5 * (self.p as f64).powf(1.5).ceil() as usize)
    }

    /// Effective rank of the simulated signal.
    pub fn signal_rank(&self) -> usize {
        if self.kind.is_rank_one() {
            1
        } else {
            self.r
        }
    }

    /// Validates and fills in every optional field.
    pub fn resolved(&self) -> SimResult<SimConfig> {
        self.validate()?;
        let mut c = self.clone();
        if c.kind.is_rank_one() {
            c.r = 1;
        }
        c.n = (c.kind == ExperimentKind::Regression).then(|| self.resolved_n());
        c.component = (c.kind == ExperimentKind::Orth).then(|| self.component.unwrap_or(c.r));
        c.floor = matches!(c.kind, ExperimentKind::Rank1Entry | ExperimentKind::CoverageEntry)
            .then(|| self.floor.unwrap_or(EntryFloor::LogP));
        c.localized = c.kind == ExperimentKind::Rank1Subgaussian && self.localized;
        Ok(c)
    }

    /// `lambda_min = p^gamma`.
    pub fn lambda(&self) -> f64 {
        (self.p as f64).powf(self.gamma)
    }
}
