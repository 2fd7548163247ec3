//! Log partition functions: importance ratios between parameters, bridged
//! paths from an analytic Poisson anchor, and direct Monte Carlo under the
//! unit-rate Poisson reference.

use std::fmt;
use std::io::{self, Write};

use log::debug;
use thiserror::Error;

use crate::geometry::{PointConfig, Window};
use crate::models::{hamiltonian, GibbsModel};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sampler::{direct_poisson_sample_with, run_chain, SampleSet, SamplerConfig, SamplerError};
use crate::stats::{batch_means_se, ess_from_log_weights};

pub const RATIO_MIN_ESS: f64 = 10.0;
pub const BRUTE_MIN_ESS: f64 = 30.0;
/// Legs whose ESS falls below this fraction of the draw count are split.
pub const LEG_MIN_RELATIVE_ESS: f64 = 0.1;
const MAX_REFINE_DEPTH: usize = 6;
const SE_BATCHES: usize = 30;

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("importance weights degenerate: ESS {ess:.2} < {threshold}{}", leg.map(|l| format!(" on leg {l}")).unwrap_or_default())]
    DegenerateOverlap {
        ess: f64,
        threshold: f64,
        leg: Option<usize>,
    },
    #[error("ratio from delta={from} to delta={to} is not absolutely continuous (needs to >= from)")]
    HardcoreDirection { from: f64, to: f64 },
    #[error("incompatible models or samples: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogZMethod {
    Ratio,
    Bridged,
    Brute,
    Analytic,
}

impl fmt::Display for LogZMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogZMethod::Ratio => "ratio",
            LogZMethod::Bridged => "bridged",
            LogZMethod::Brute => "brute",
            LogZMethod::Analytic => "analytic",
        })
    }
}

/// A Monte Carlo estimate of a log partition function or of a log-ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct LogZEstimate {
    pub value: f64,
    pub std_error: f64,
    pub ess: f64,
    /// Raw number of weights behind the estimate.
    pub samples: usize,
    pub method: LogZMethod,
    pub model: String,
}

impl LogZEstimate {
    pub fn analytic(value: f64, model: &GibbsModel) -> Self {
        LogZEstimate {
            value,
            std_error: 0.0,
            ess: f64::INFINITY,
            samples: 0,
            method: LogZMethod::Analytic,
            model: model.fingerprint(),
        }
    }
}

/// `ln Z = |Λ| (e^{-z} - 1)` for the Poisson model `H = z N`.
pub fn analytic_poisson_log_z(z: f64, w: &Window) -> f64 {
    w.volume() * (-z).exp_m1()
}

/// Analytic `ln Z` when the model has no interaction and no hardcore.
pub fn analytic_log_z(model: &GibbsModel, w: &Window) -> Option<LogZEstimate> {
    (model.is_interaction_free() && model.delta() == 0.0)
        .then(|| LogZEstimate::analytic(analytic_poisson_log_z(model.z(), w), model))
}

/// Energies of every draw under `model`; reuses the stored ones when `model`
/// generated the samples.
pub fn draw_energies(model: &GibbsModel, samples: &SampleSet) -> Vec<f64> {
    if *model == samples.model && samples.energies.len() == samples.draws.len() {
        return samples.energies.clone();
    }
    samples
        .draws
        .iter()
        .map(|d| hamiltonian(model, d, &samples.window))
        .collect()
}

/// Estimate from log-weights: `ln mean(e^{lw})`, delta-method SE from batch
/// means of the (shifted) weights, and Kish ESS. `shift` must be at least the
/// largest finite log-weight.
fn estimate_from_log_weights(lw: &[f64], shift: f64, method: LogZMethod, model: &GibbsModel) -> LogZEstimate {
    let n = lw.len();
    let w: Vec<f64> = lw.iter().map(|&l| (l - shift).exp()).collect();
    let sum: f64 = w.iter().sum();
    let value = shift + sum.ln() - (n as f64).ln();
    let mean = sum / n as f64;
    let se = if mean > 0.0 {
        batch_means_se(&w, SE_BATCHES) / mean
    } else {
        f64::INFINITY
    };
    LogZEstimate {
        value,
        std_error: se,
        ess: ess_from_log_weights(lw),
        samples: n,
        method,
        model: model.fingerprint(),
    }
}

fn check_pair(from: &GibbsModel, to: &GibbsModel, samples: &SampleSet) -> Result<(), PartitionError> {
    if from.is_pairwise() != to.is_pairwise() {
        return Err(PartitionError::Mismatch(format!("{from} vs {to}")));
    }
    if to.delta() < from.delta() {
        return Err(PartitionError::HardcoreDirection {
            from: from.delta(),
            to: to.delta(),
        });
    }
    if samples.is_empty() {
        return Err(PartitionError::Mismatch("empty sample set".into()));
    }
    Ok(())
}

/// `ln Z(θ') - ln Z(θ) = ln E_θ[e^{-(H_θ' - H_θ)}]` from draws under `θ`.
pub fn log_z_ratio(
    model_from: &GibbsModel,
    model_to: &GibbsModel,
    samples: &SampleSet,
) -> Result<LogZEstimate, PartitionError> {
    check_pair(model_from, model_to, samples)?;
    let e_from = draw_energies(model_from, samples);
    let e_to = if model_to == model_from {
        e_from.clone()
    } else {
        draw_energies(model_to, samples)
    };
    let lw = log_weights(&e_from, &e_to);
    let shift = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Err(PartitionError::DegenerateOverlap {
            ess: 0.0,
            threshold: RATIO_MIN_ESS,
            leg: None,
        });
    }
    let est = estimate_from_log_weights(&lw, shift, LogZMethod::Ratio, model_to);
    if est.ess < RATIO_MIN_ESS {
        return Err(PartitionError::DegenerateOverlap {
            ess: est.ess,
            threshold: RATIO_MIN_ESS,
            leg: None,
        });
    }
    Ok(est)
}

fn log_weights(e_from: &[f64], e_to: &[f64]) -> Vec<f64> {
    e_from
        .iter()
        .zip(e_to)
        .map(|(&a, &b)| if b == f64::INFINITY { f64::NEG_INFINITY } else { -(b - a) })
        .collect()
}

/// Log-ratios to a family of targets from one sample set, with a common
/// log-weight shift and a fixed summation order. Pointwise-ordered weights
/// therefore give exactly ordered estimates. ESS is reported, not enforced.
pub fn log_z_ratio_family(
    model_from: &GibbsModel,
    targets: &[GibbsModel],
    samples: &SampleSet,
) -> Result<Vec<LogZEstimate>, PartitionError> {
    for t in targets {
        check_pair(model_from, t, samples)?;
    }
    let e_from = draw_energies(model_from, samples);
    let lws: Vec<Vec<f64>> = targets
        .iter()
        .map(|t| log_weights(&e_from, &draw_energies(t, samples)))
        .collect();
    Ok(family_estimates(&lws, targets, LogZMethod::Ratio))
}

fn family_estimates(lws: &[Vec<f64>], models: &[GibbsModel], method: LogZMethod) -> Vec<LogZEstimate> {
    let shift = lws
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let shift = if shift.is_finite() { shift } else { 0.0 };
    lws.iter()
        .zip(models)
        .map(|(lw, m)| estimate_from_log_weights(lw, shift, method, m))
        .collect()
}

/// Where a bridge starts from.
#[derive(Clone, Debug, PartialEq)]
pub enum Baseline {
    /// The first model is interaction-free without hardcore.
    AnalyticPoisson,
    Supplied(LogZEstimate),
}

/// A parameter path `θ_0 → … → θ_m` at fixed `δ`, with the number of draws
/// taken at the start of each leg.
#[derive(Clone, Debug, PartialEq)]
pub struct BridgeSchedule {
    pub path: Vec<GibbsModel>,
    pub leg_draws: Vec<usize>,
    pub baseline: Baseline,
}

impl BridgeSchedule {
    /// `legs` equal steps in parameter space from `from` to `to`.
    pub fn linear(from: &GibbsModel, to: &GibbsModel, legs: usize, draws: usize) -> Result<Self, PartitionError> {
        let legs = legs.max(1);
        let (a, b) = (from.params(), to.params());
        if a.len() != b.len() || from.kind() != to.kind() || from.delta() != to.delta() {
            return Err(PartitionError::Mismatch(format!("cannot bridge {from} to {to}")));
        }
        let mut path = Vec::with_capacity(legs + 1);
        path.push(from.clone());
        for k in 1..legs {
            let t = k as f64 / legs as f64;
            let p: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + t * (y - x)).collect();
            path.push(from.with_params(&p).map_err(|e| PartitionError::Mismatch(e.to_string()))?);
        }
        path.push(to.clone());
        Ok(BridgeSchedule {
            path,
            leg_draws: vec![draws; legs],
            baseline: Baseline::AnalyticPoisson,
        })
    }

    pub fn with_baseline(mut self, baseline: Baseline) -> Self {
        self.baseline = baseline;
        self
    }

    pub fn legs(&self) -> usize {
        self.path.len().saturating_sub(1)
    }

    pub fn target(&self) -> &GibbsModel {
        self.path.last().expect("nonempty path")
    }
}

/// Telescoped ratios along `schedule` plus the baseline. Legs with relative
/// ESS below [`LEG_MIN_RELATIVE_ESS`] are split at their midpoint.
pub fn log_z_bridged(
    schedule: &BridgeSchedule,
    w: &Window,
    scfg: &SamplerConfig,
) -> Result<LogZEstimate, PartitionError> {
    let first = schedule
        .path
        .first()
        .ok_or_else(|| PartitionError::Mismatch("empty bridge".into()))?;
    let base = match &schedule.baseline {
        Baseline::AnalyticPoisson => analytic_log_z(first, w).ok_or_else(|| {
            PartitionError::Mismatch(format!("{first} has no analytic partition function"))
        })?,
        Baseline::Supplied(e) => e.clone(),
    };
    let mut value = base.value;
    let mut var = base.std_error * base.std_error;
    let mut ess = f64::INFINITY;
    let mut samples = 0;
    for leg in 0..schedule.legs() {
        let draws = schedule.leg_draws.get(leg).copied().unwrap_or(scfg.draw_count());
        let seed = derive_seed(scfg.seed, leg as u64);
        let est = bridge_leg(
            &schedule.path[leg],
            &schedule.path[leg + 1],
            w,
            scfg,
            draws,
            seed,
            0,
        )
        .map_err(|e| match e {
            PartitionError::DegenerateOverlap { ess, threshold, .. } => {
                PartitionError::DegenerateOverlap {
                    ess,
                    threshold,
                    leg: Some(leg),
                }
            }
            other => other,
        })?;
        value += est.value;
        var += est.std_error * est.std_error;
        ess = ess.min(est.ess);
        samples += est.samples;
    }
    Ok(LogZEstimate {
        value,
        std_error: var.sqrt(),
        ess,
        samples,
        method: LogZMethod::Bridged,
        model: schedule.target().fingerprint(),
    })
}

fn bridge_leg(
    from: &GibbsModel,
    to: &GibbsModel,
    w: &Window,
    scfg: &SamplerConfig,
    draws: usize,
    seed: u64,
    depth: usize,
) -> Result<LogZEstimate, PartitionError> {
    let cfg = SamplerConfig {
        sweeps: scfg.burn_in + draws.max(1) * scfg.thin,
        seed,
        ..scfg.clone()
    };
    let set = run_chain(from, w, &cfg)?;
    let est = log_z_ratio(from, to, &set);
    let weak = match &est {
        Ok(e) => e.ess < LEG_MIN_RELATIVE_ESS * e.samples as f64,
        Err(PartitionError::DegenerateOverlap { .. }) => true,
        Err(_) => false,
    };
    if !weak || depth >= MAX_REFINE_DEPTH {
        return est;
    }
    debug!("splitting bridge leg {from} -> {to} (depth {depth})");
    let (a, b) = (from.params(), to.params());
    let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
    let mid = from
        .with_params(&mid)
        .map_err(|e| PartitionError::Mismatch(e.to_string()))?;
    let left = bridge_leg(from, &mid, w, scfg, draws, derive_seed(seed, 1), depth + 1)?;
    let right = bridge_leg(&mid, to, w, scfg, draws, derive_seed(seed, 2), depth + 1)?;
    Ok(LogZEstimate {
        value: left.value + right.value,
        std_error: left.std_error.hypot(right.std_error),
        ess: left.ess.min(right.ess),
        samples: left.samples + right.samples,
        method: LogZMethod::Ratio,
        model: to.fingerprint(),
    })
}

/// `ln Z = ln E_π[e^{-H} 1_support]` by direct unit-rate Poisson draws.
pub fn log_z_brute(model: &GibbsModel, w: &Window, n_mc: usize, seed: u64) -> Result<LogZEstimate, PartitionError> {
    let est = log_z_brute_family(std::slice::from_ref(model), w, n_mc, seed)?
        .pop()
        .expect("one model");
    if est.ess < BRUTE_MIN_ESS {
        return Err(PartitionError::DegenerateOverlap {
            ess: est.ess,
            threshold: BRUTE_MIN_ESS,
            leg: None,
        });
    }
    Ok(est)
}

/// [`log_z_brute`] for several models on common Poisson draws and a common
/// weight shift; ESS is reported, not enforced.
pub fn log_z_brute_family(
    models: &[GibbsModel],
    w: &Window,
    n_mc: usize,
    seed: u64,
) -> Result<Vec<LogZEstimate>, PartitionError> {
    if n_mc == 0 {
        return Err(PartitionError::Mismatch("n_mc must be positive".into()));
    }
    for m in models {
        m.check_dimension(w.dim())
            .map_err(|e| PartitionError::Sampler(SamplerError::Model(e)))?;
    }
    let mut rng = rng_from_seed(seed);
    let mut lws = vec![Vec::with_capacity(n_mc); models.len()];
    for _ in 0..n_mc {
        let draw: PointConfig = direct_poisson_sample_with(w, 1.0, &mut rng);
        for (m, lw) in models.iter().zip(lws.iter_mut()) {
            lw.push(-hamiltonian(m, &draw, w));
        }
    }
    let mut out = family_estimates(&lws, models, LogZMethod::Brute);
    for e in &mut out {
        e.samples = n_mc;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PressureEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// `ln Z / |Λ|`.
pub fn finite_volume_pressure(logz: &LogZEstimate, w: &Window) -> PressureEstimate {
    let v = w.volume();
    PressureEstimate {
        value: logz.value / v,
        std_error: logz.std_error / v,
    }
}

/// CSV rows `method,value,std_error,ess,model`.
pub fn write_estimates_csv<W: Write>(mut out: W, estimates: &[LogZEstimate]) -> io::Result<()> {
    writeln!(out, "method,value,std_error,ess,model")?;
    for e in estimates {
        writeln!(
            out,
            "{},{},{},{},\"{}\"",
            e.method, e.value, e.std_error, e.ess, e.model
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SamplerConfig {
        SamplerConfig {
            sweeps: 600,
            burn_in: 100,
            thin: 2,
            seed: 1,
            ..SamplerConfig::default()
        }
    }

    #[test]
    fn identity_leg_is_exactly_zero() {
        let w = Window::rect(0.0, 3.0, 0.0, 3.0).unwrap();
        let m = GibbsModel::strauss(0.5, 0.7, 0.2).unwrap();
        let s = run_chain(&m, &w, &small()).unwrap();
        let e = log_z_ratio(&m, &m, &s).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.std_error, 0.0);
        assert!(e.ess <= s.len() as f64 + 1e-9);
    }

    #[test]
    fn reverse_hardcore_direction_rejected() {
        let w = Window::rect(0.0, 3.0, 0.0, 3.0).unwrap();
        let m = GibbsModel::hardcore_strauss(0.1, 0.5, 0.7, 0.2).unwrap();
        let s = run_chain(&m, &w, &small()).unwrap();
        let lower = m.with_delta(0.05).unwrap();
        assert!(matches!(
            log_z_ratio(&m, &lower, &s),
            Err(PartitionError::HardcoreDirection { .. })
        ));
    }

    #[test]
    fn single_leg_identity_bridge_is_baseline() {
        let w = Window::rect(0.0, 3.0, 0.0, 3.0).unwrap();
        let p = GibbsModel::strauss(0.8, 0.0, 0.1).unwrap();
        let sched = BridgeSchedule::linear(&p, &p, 1, 50).unwrap();
        let e = log_z_bridged(&sched, &w, &small()).unwrap();
        assert_eq!(e.value, analytic_poisson_log_z(0.8, &w));
    }

    #[test]
    fn pressure_scales() {
        let w = Window::centered(2.0, 2).unwrap();
        let m = GibbsModel::poisson(0.0).unwrap();
        let e = LogZEstimate::analytic(0.0, &m);
        assert_eq!(finite_volume_pressure(&e, &w).value, 0.0);
        let z = 0.4;
        let e = analytic_log_z(&GibbsModel::poisson(z).unwrap(), &w).unwrap();
        assert!((finite_volume_pressure(&e, &w).value - ((-z).exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn csv_header() {
        let m = GibbsModel::poisson(0.0).unwrap();
        let mut buf = Vec::new();
        write_estimates_csv(&mut buf, &[LogZEstimate::analytic(0.0, &m)]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("method,value,std_error,ess,model\nanalytic,0,0,inf,"));
    }
}
