//! Maximum likelihood for Gibbs models: the hardcore estimator, the contrast,
//! Monte Carlo maximum likelihood over a parameter box with a profile over
//! the range, and a pseudolikelihood baseline.

mod contrast;
mod hardcore;
mod mcmle;
mod nelder_mead;
mod pseudo;
mod result;
mod space;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::models::ModelError;
use crate::partition::PartitionError;
use crate::sampler::SamplerError;

pub use contrast::{contrast, ContrastEval};
pub use hardcore::{hardcore_mle, HardcoreEstimate};
pub use mcmle::{mc_mle, profile_range};
pub use nelder_mead::{minimize_in_box, Minimum, NelderMeadOptions};
pub use pseudo::{pl_gradient, pl_objective, pseudolikelihood_fit};
pub use result::{FitMethod, FitResult, TraceRow};
pub use space::ParamSpace;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("infeasible data: {0}")]
    InfeasibleData(String),
    #[error("importance weights degenerate after {rounds} rounds: ESS {ess:.2} below {threshold:.2}")]
    DegenerateOverlap { rounds: usize, ess: f64, threshold: f64 },
    #[error("invalid search box: {0}")]
    InvalidBox(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// How candidate ranges are chosen for the profile search.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum RangeGrid {
    /// Observed distances for pairwise kinds, a uniform grid for area.
    #[default]
    Auto,
    /// Interpoint distances of the data inside the range box, plus the box
    /// endpoints.
    Observed,
    /// `n` evenly spaced values spanning the range box.
    Uniform(usize),
    Values(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    /// Per-parameter search box; `lo == hi` pins a parameter. Parameters not
    /// listed get defaults (see [`ParamSpace::resolve`]).
    pub bounds: BTreeMap<String, (f64, f64)>,
    /// Admissible hardcore distances `[δ_min, δ_max]`; an infinite upper end
    /// is replaced by a quarter of the shortest window side.
    pub delta_interval: (f64, f64),
    /// Simplex runs per profile candidate.
    pub restarts: usize,
    /// Tolerance on the contrast.
    pub tolerance: f64,
    pub max_evals: usize,
    /// Share one sample set between all range candidates. When false each
    /// candidate is simulated separately.
    pub common_random_numbers: bool,
    pub range_grid: RangeGrid,
    /// Cap on the number of profile candidates; observed grids beyond it are
    /// thinned evenly.
    pub max_candidates: usize,
    pub max_rounds: usize,
    /// Re-anchor when the ESS at the optimum falls below this fraction of
    /// the draws.
    pub min_relative_ess: f64,
    /// Surface points whose ESS is below this fraction of the draws are
    /// outside the trusted region and evaluate to `+inf`.
    pub trust_ess: f64,
    /// Midpoints per side of the pseudolikelihood quadrature; `None` picks
    /// about ten per unit length.
    pub quadrature: Option<usize>,
    /// Added to every evaluation of the Monte Carlo surface.
    pub surface_offset: f64,
    /// When positive, the reference `ln Z` is bridged from the Poisson anchor
    /// with this many legs so the reported contrast is absolute.
    pub bridge_legs: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            bounds: BTreeMap::new(),
            delta_interval: (1e-9, f64::INFINITY),
            restarts: 3,
            tolerance: 1e-8,
            max_evals: 400,
            common_random_numbers: true,
            range_grid: RangeGrid::Auto,
            max_candidates: 256,
            max_rounds: 5,
            min_relative_ess: 0.1,
            trust_ess: 0.05,
            quadrature: None,
            surface_offset: 0.0,
            bridge_legs: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_bound(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.bounds.insert(name.to_string(), (lo, hi));
        self
    }

    pub fn pin(self, name: &str, value: f64) -> Self {
        self.with_bound(name, value, value)
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        for (k, &(lo, hi)) in &self.bounds {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(EstimatorError::InvalidBox(format!("{k}: [{lo}, {hi}]")));
            }
        }
        let (dl, dh) = self.delta_interval;
        if !(dl >= 0.0 && dl <= dh) {
            return Err(EstimatorError::InvalidBox(format!("delta interval [{dl}, {dh}]")));
        }
        if !(self.tolerance > 0.0) {
            return Err(EstimatorError::InvalidBox(format!("tolerance {}", self.tolerance)));
        }
        if self.restarts == 0 || self.max_rounds == 0 {
            return Err(EstimatorError::InvalidBox("restarts and rounds must be >= 1".into()));
        }
        if let RangeGrid::Values(v) = &self.range_grid {
            if v.is_empty() {
                return Err(EstimatorError::InvalidBox("empty range grid".into()));
            }
        }
        Ok(())
    }

    pub(crate) fn nm_options(&self) -> NelderMeadOptions {
        NelderMeadOptions {
            max_evals: self.max_evals,
            f_tol: self.tolerance,
            ..NelderMeadOptions::default()
        }
    }
}
