//! Birth-death-move Metropolis-Hastings for finite-window Gibbs densities
//! relative to the unit-rate Poisson process, plus direct Poisson sampling
//! and the GNZ residual check.

mod export;
mod gnz;

use log::warn;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{Point, PointConfig, Window};
use crate::models::{
    hamiltonian, hamiltonian_periodic, local_energy_with, GibbsModel, ModelError,
};
use crate::rng::{rng_from_seed, ChainRng};

pub use export::{read_sample_set, write_sample_set, SampleIoError};
pub(crate) use gnz::grid_nodes;
pub use gnz::{gnz_residual, gnz_residual_with, GnzEstimate, GnzOptions, TestFunction};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("periodic boundary is only available for pairwise models")]
    UnsupportedBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Free,
    Periodic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub p_birth: f64,
    pub p_death: f64,
    pub p_move: f64,
    pub move_radius: f64,
    pub seed: u64,
    pub boundary: Boundary,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            sweeps: 1100,
            burn_in: 100,
            thin: 5,
            p_birth: 0.35,
            p_death: 0.35,
            p_move: 0.3,
            move_radius: 0.25,
            seed: 0,
            boundary: Boundary::Free,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        SamplerConfig {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        let p = [self.p_birth, self.p_death, self.p_move];
        if p.iter().any(|&x| !(x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(SamplerError::InvalidConfig(format!(
                "move probabilities must be nonnegative and sum to 1, got {p:?}"
            )));
        }
        if self.thin == 0 {
            return Err(SamplerError::InvalidConfig("thin must be >= 1".into()));
        }
        if self.burn_in > self.sweeps {
            return Err(SamplerError::InvalidConfig(format!(
                "burn-in {} exceeds sweeps {}",
                self.burn_in, self.sweeps
            )));
        }
        if self.p_move > 0.0 && !(self.move_radius > 0.0) {
            return Err(SamplerError::InvalidConfig(
                "move radius must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Number of draws a run keeps.
    pub fn draw_count(&self) -> usize {
        (self.sweeps - self.burn_in) / self.thin
    }
}

/// Proposals per sweep: one per unit of window volume.
pub fn sweep_length(w: &Window) -> usize {
    (w.volume().ceil() as usize).max(1)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MoveCounts {
    pub proposed: u64,
    pub accepted: u64,
}

impl MoveCounts {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    fn add(&mut self, other: &MoveCounts) {
        self.proposed += other.proposed;
        self.accepted += other.accepted;
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChainDiagnostics {
    pub birth: MoveCounts,
    pub death: MoveCounts,
    pub moves: MoveCounts,
    /// Overall acceptance over the burn-in sweeps.
    pub burn_in_acceptance: f64,
    /// Largest `|cached - fresh|` energy gap seen at a thinning point,
    /// relative to `max(1, |fresh|)`.
    pub max_energy_drift: f64,
    pub non_ergodic: bool,
}

impl ChainDiagnostics {
    pub fn acceptance(&self) -> f64 {
        let p = self.birth.proposed + self.death.proposed + self.moves.proposed;
        let a = self.birth.accepted + self.death.accepted + self.moves.accepted;
        if p == 0 {
            0.0
        } else {
            a as f64 / p as f64
        }
    }

    fn merge(&mut self, other: &ChainDiagnostics) {
        self.birth.add(&other.birth);
        self.death.add(&other.death);
        self.moves.add(&other.moves);
        self.burn_in_acceptance = self.burn_in_acceptance.min(other.burn_in_acceptance);
        self.max_energy_drift = self.max_energy_drift.max(other.max_energy_drift);
        self.non_ergodic |= other.non_ergodic;
    }
}

/// Single-owner state of one chain.
#[derive(Clone, Debug)]
pub struct ChainState {
    config: PointConfig,
    energy: f64,
    steps: u64,
    rng: ChainRng,
    counts: [MoveCounts; 3],
}

impl ChainState {
    /// Empty configuration, which is in the support of every model.
    pub fn new(model: &GibbsModel, w: &Window, seed: u64) -> Self {
        Self::from_config(model, PointConfig::empty(*w, index_cell_size(model, w)), seed)
    }

    pub fn from_config(model: &GibbsModel, config: PointConfig, seed: u64) -> Self {
        let cell = index_cell_size(model, config.window());
        let config = config.reindexed(cell);
        let energy = hamiltonian(model, &config, &config.window().clone());
        ChainState {
            config,
            energy,
            steps: 0,
            rng: rng_from_seed(seed),
            counts: [MoveCounts::default(); 3],
        }
    }

    pub fn config(&self) -> &PointConfig {
        &self.config
    }

    /// Cached total energy, updated incrementally.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn fresh_energy(&self, model: &GibbsModel, periodic: bool) -> f64 {
        if periodic {
            hamiltonian_periodic(model, &self.config)
        } else {
            hamiltonian(model, &self.config, self.config.window())
        }
    }
}

fn index_cell_size(model: &GibbsModel, w: &Window) -> f64 {
    let floor = w.min_side() / 256.0;
    let r = model.interaction_range();
    if r > 0.0 {
        r.max(floor).min(w.min_side())
    } else {
        w.min_side().min(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Proposal {
    Birth,
    Death,
    Move,
}

/// One proposal of the birth-death-move kernel; returns the proposal type and
/// whether it was accepted.
pub fn mh_step(state: &mut ChainState, model: &GibbsModel, cfg: &SamplerConfig) -> (Proposal, bool) {
    let w = *state.config.window();
    let periodic = cfg.boundary == Boundary::Periodic;
    let n = state.config.len();
    let u: f64 = state.rng.random();
    let kind = if u < cfg.p_birth {
        Proposal::Birth
    } else if u < cfg.p_birth + cfg.p_death {
        Proposal::Death
    } else {
        Proposal::Move
    };
    // ratio of reverse to forward move-type probabilities
    let bd = if cfg.p_birth > 0.0 && cfg.p_death > 0.0 {
        (cfg.p_death / cfg.p_birth).ln()
    } else {
        0.0
    };
    state.steps += 1;
    let accepted = match kind {
        Proposal::Birth => {
            let x = w.uniform_point(&mut state.rng);
            let h = local_energy_with(model, &x, &state.config, None, periodic);
            let log_a = bd + w.volume().ln() - h - ((n + 1) as f64).ln();
            let ok = h < f64::INFINITY && accept(&mut state.rng, log_a);
            if ok {
                state.config.push(x);
                state.energy += h;
            }
            ok
        }
        Proposal::Death => {
            if n == 0 {
                false
            } else {
                let i = state.rng.random_range(0..n);
                let x = state.config.points()[i];
                let h = local_energy_with(model, &x, &state.config, Some(i), periodic);
                let log_a = -bd + (n as f64).ln() + h - w.volume().ln();
                let ok = accept(&mut state.rng, log_a);
                if ok {
                    state.config.swap_remove(i);
                    state.energy -= h;
                }
                ok
            }
        }
        Proposal::Move => {
            if n == 0 {
                false
            } else {
                let i = state.rng.random_range(0..n);
                let x = state.config.points()[i];
                let y = displaced(&mut state.rng, &x, cfg.move_radius, w.dim());
                let y = if periodic { Some(w.wrap(&y)) } else { w.contains(&y).then_some(y) };
                match y {
                    None => false,
                    Some(y) => {
                        let h_new = local_energy_with(model, &y, &state.config, Some(i), periodic);
                        if h_new == f64::INFINITY {
                            false
                        } else {
                            let h_old =
                                local_energy_with(model, &x, &state.config, Some(i), periodic);
                            let ok = accept(&mut state.rng, h_old - h_new);
                            if ok {
                                state.config.set(i, y);
                                state.energy += h_new - h_old;
                            }
                            ok
                        }
                    }
                }
            }
        }
    };
    let c = &mut state.counts[kind as usize];
    c.proposed += 1;
    c.accepted += accepted as u64;
    (kind, accepted)
}

#[inline]
fn accept(rng: &mut ChainRng, log_a: f64) -> bool {
    if log_a >= 0.0 {
        return true;
    }
    if log_a.is_nan() || log_a == f64::NEG_INFINITY {
        return false;
    }
    let u: f64 = rng.random();
    u.ln() < log_a
}

/// Uniform point in the ball of radius `r` around `x` (an interval in 1-D).
fn displaced(rng: &mut ChainRng, x: &Point, r: f64, dim: usize) -> Point {
    if dim == 1 {
        return [x[0] + r * (2.0 * rng.random::<f64>() - 1.0), 0.0];
    }
    loop {
        let dx = 2.0 * rng.random::<f64>() - 1.0;
        let dy = 2.0 * rng.random::<f64>() - 1.0;
        if dx * dx + dy * dy <= 1.0 {
            return [x[0] + r * dx, x[1] + r * dy];
        }
    }
}

/// Thinned draws from one or more chains of the same model and window.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub model: GibbsModel,
    pub window: Window,
    pub config: SamplerConfig,
    /// Seeds of the merged chains, in merge order.
    pub seeds: Vec<u64>,
    pub draws: Vec<PointConfig>,
    /// Fresh Hamiltonian of each draw under `model`.
    pub energies: Vec<f64>,
    pub diagnostics: ChainDiagnostics,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn mean_count(&self) -> f64 {
        crate::stats::mean(&self.draws.iter().map(|d| d.len() as f64).collect::<Vec<_>>())
    }

    /// Concatenates chains in the given order. All sets must share model and
    /// window.
    pub fn merge(sets: Vec<SampleSet>) -> Option<SampleSet> {
        let mut it = sets.into_iter();
        let mut acc = it.next()?;
        for s in it {
            assert!(
                s.model == acc.model && s.window == acc.window,
                "merging sample sets of different targets"
            );
            acc.seeds.extend(s.seeds);
            acc.draws.extend(s.draws);
            acc.energies.extend(s.energies);
            acc.diagnostics.merge(&s.diagnostics);
        }
        Some(acc)
    }
}

/// Runs one chain from the empty configuration. Deterministic in `cfg.seed`.
pub fn run_chain(model: &GibbsModel, w: &Window, cfg: &SamplerConfig) -> Result<SampleSet, SamplerError> {
    cfg.validate()?;
    model.check_dimension(w.dim())?;
    let periodic = cfg.boundary == Boundary::Periodic;
    if periodic && !model.is_pairwise() {
        return Err(SamplerError::UnsupportedBoundary);
    }
    let mut state = ChainState::new(model, w, cfg.seed);
    let per_sweep = sweep_length(w);
    let mut diag = ChainDiagnostics::default();
    let mut draws = Vec::with_capacity(cfg.draw_count());
    let mut energies = Vec::with_capacity(cfg.draw_count());
    let mut burn_acc = 0u64;
    for sweep in 0..cfg.sweeps {
        for _ in 0..per_sweep {
            let (_, ok) = mh_step(&mut state, model, cfg);
            if sweep < cfg.burn_in {
                burn_acc += ok as u64;
            }
        }
        if sweep + 1 == cfg.burn_in {
            diag.burn_in_acceptance = burn_acc as f64 / (cfg.burn_in * per_sweep) as f64;
        }
        if sweep >= cfg.burn_in && (sweep - cfg.burn_in + 1) % cfg.thin == 0 {
            let fresh = state.fresh_energy(model, periodic);
            let drift = if fresh.is_finite() {
                (state.energy - fresh).abs() / fresh.abs().max(1.0)
            } else {
                f64::INFINITY
            };
            diag.max_energy_drift = diag.max_energy_drift.max(drift);
            state.energy = fresh;
            draws.push(
                PointConfig::new(*w, state.config.points().to_vec()).expect("chain stays in window"),
            );
            energies.push(fresh);
        }
    }
    if cfg.burn_in == 0 {
        diag.burn_in_acceptance = 1.0;
    }
    if diag.burn_in_acceptance < 1e-3 {
        diag.non_ergodic = true;
        warn!(
            "chain for {model} (seed {}) accepted {:.2e} of burn-in proposals; draws are likely unrepresentative",
            cfg.seed, diag.burn_in_acceptance
        );
    }
    [diag.birth, diag.death, diag.moves] = state.counts;
    Ok(SampleSet {
        model: model.clone(),
        window: *w,
        config: cfg.clone(),
        seeds: vec![cfg.seed],
        draws,
        energies,
        diagnostics: diag,
    })
}

/// One chain per seed, run in parallel and merged in seed-list order.
pub fn run_chains(
    model: &GibbsModel,
    w: &Window,
    cfg: &SamplerConfig,
    seeds: &[u64],
) -> Result<SampleSet, SamplerError> {
    if seeds.is_empty() {
        return Err(SamplerError::InvalidConfig("no seeds".into()));
    }
    let sets: Result<Vec<SampleSet>, SamplerError> = seeds
        .par_iter()
        .map(|&s| run_chain(model, w, &cfg.with_seed(s)))
        .collect();
    Ok(SampleSet::merge(sets?).expect("at least one chain"))
}

/// Poisson process of intensity `rate` on `w`.
pub fn direct_poisson_sample(w: &Window, rate: f64, seed: u64) -> PointConfig {
    direct_poisson_sample_with(w, rate, &mut rng_from_seed(seed))
}

pub fn direct_poisson_sample_with<R: Rng + ?Sized>(w: &Window, rate: f64, rng: &mut R) -> PointConfig {
    let mean = rate * w.volume();
    let n = if mean > 0.0 {
        Poisson::new(mean).expect("finite positive mean").sample(rng) as usize
    } else {
        0
    };
    let pts = (0..n).map(|_| w.uniform_point(rng)).collect();
    PointConfig::new(*w, pts).expect("uniform points lie in the window")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pairwise_min_distance;

    fn quick() -> SamplerConfig {
        SamplerConfig {
            sweeps: 300,
            burn_in: 50,
            thin: 2,
            ..SamplerConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::default().validate().is_ok());
        let bad = SamplerConfig {
            p_move: 0.4,
            ..SamplerConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SamplerConfig {
            thin: 0,
            ..SamplerConfig::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(SamplerConfig::default().draw_count(), 200);
    }

    #[test]
    fn same_seed_same_draws() {
        let w = Window::rect(0.0, 3.0, 0.0, 3.0).unwrap();
        let m = GibbsModel::strauss(0.3, 0.7, 0.2).unwrap();
        let a = run_chain(&m, &w, &quick()).unwrap();
        let b = run_chain(&m, &w, &quick()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), quick().draw_count());
    }

    #[test]
    fn hardcore_support_and_cache_coherence() {
        let w = Window::rect(0.0, 4.0, 0.0, 4.0).unwrap();
        let m = GibbsModel::hardcore_strauss(0.05, -1.0, 0.3, 0.1).unwrap();
        let s = run_chain(&m, &w, &quick()).unwrap();
        for d in &s.draws {
            assert!(pairwise_min_distance(d) >= 0.05);
        }
        assert!(s.diagnostics.max_energy_drift < 1e-8);
        let area = GibbsModel::area_interaction(0.0, 1.5, 0.2).unwrap();
        let s = run_chain(&area, &w, &quick()).unwrap();
        assert!(s.diagnostics.max_energy_drift < 1e-8);
    }

    #[test]
    fn periodic_area_rejected() {
        let w = Window::rect(0.0, 2.0, 0.0, 2.0).unwrap();
        let area = GibbsModel::area_interaction(0.0, 1.5, 0.2).unwrap();
        let cfg = SamplerConfig {
            boundary: Boundary::Periodic,
            ..quick()
        };
        assert!(matches!(run_chain(&area, &w, &cfg), Err(SamplerError::UnsupportedBoundary)));
        let s = GibbsModel::strauss(0.0, 0.5, 0.3).unwrap();
        let set = run_chain(&s, &w, &cfg).unwrap();
        assert!(set.diagnostics.max_energy_drift < 1e-8);
    }

    #[test]
    fn poisson_sample_rate_zero() {
        let w = Window::rect(0.0, 2.0, 0.0, 2.0).unwrap();
        assert!(direct_poisson_sample(&w, 0.0, 3).is_empty());
    }

    #[test]
    fn chains_merge_in_seed_order() {
        let w = Window::rect(0.0, 2.0, 0.0, 2.0).unwrap();
        let m = GibbsModel::strauss(0.0, 0.5, 0.3).unwrap();
        let cfg = quick();
        let merged = run_chains(&m, &w, &cfg, &[5, 9]).unwrap();
        let a = run_chain(&m, &w, &cfg.with_seed(5)).unwrap();
        let b = run_chain(&m, &w, &cfg.with_seed(9)).unwrap();
        assert_eq!(merged, SampleSet::merge(vec![a, b]).unwrap());
    }
}
