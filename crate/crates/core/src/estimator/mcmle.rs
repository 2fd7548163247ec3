//! Monte Carlo maximum likelihood: draws at a reference parameter turn the
//! contrast into `ln Ê_ref e^{-(H_θ - H_ref)}/|Λ| + H_θ(data)/|Λ|` up to a
//! constant, which is minimized over the box with a profile over the range.

use log::{debug, info, warn};
use rayon::prelude::*;

use crate::geometry::{pairwise_min_distance, PointConfig, Window};
use crate::models::{GibbsModel, Summary};
use crate::partition::{log_z_bridged, BridgeSchedule};
use crate::rng::derive_seed;
use crate::sampler::{run_chain, SampleSet, SamplerConfig};
use crate::stats::{batch_means_se, ess_from_log_weights, logsumexp};

use super::nelder_mead::minimize_in_box;
use super::pseudo::fit_in_space;
use super::space::ParamSpace;
use super::{
    hardcore_mle, EstimatorError, FitMethod, FitResult, HardcoreEstimate, OptimizerConfig, RangeGrid,
    TraceRow,
};

const SE_BATCHES: usize = 30;

/// `δ̂` for kinds with a hardcore parameter, the family's own `δ` otherwise.
/// Data below the admissible hardcore is an error.
pub(crate) fn resolve_hardcore(
    data: &PointConfig,
    w: &Window,
    family: &GibbsModel,
    ocfg: &OptimizerConfig,
) -> Result<(GibbsModel, HardcoreEstimate), EstimatorError> {
    let hc = if family.kind().has_hardcore() {
        let (lo, hi) = ocfg.delta_interval;
        let hi = if hi.is_finite() { hi } else { (w.min_side() / 4.0).max(lo) };
        hardcore_mle(data, (lo, hi))
    } else {
        let tilde = pairwise_min_distance(data);
        HardcoreEstimate {
            delta_hat: family.delta(),
            delta_tilde: tilde,
            infeasible: tilde < family.delta(),
        }
    };
    if hc.infeasible {
        return Err(EstimatorError::InfeasibleData(format!(
            "minimum interpoint distance {} is below the smallest admissible hardcore {}",
            hc.delta_tilde,
            if family.kind().has_hardcore() { ocfg.delta_interval.0 } else { family.delta() }
        )));
    }
    let template = if family.kind().has_hardcore() {
        family.with_delta(hc.delta_hat)?
    } else {
        family.clone()
    };
    Ok((template, hc))
}

/// Importance-weighted surface over the pooled draws at a fixed summary
/// shape; `reference` holds minus the log mixture density of each draw.
struct Surface<'a> {
    draws: &'a [Summary],
    data: &'a Summary,
    reference: &'a [f64],
    vol: f64,
    offset: f64,
    /// Evaluations whose ESS falls below this are treated as `+∞`.
    min_ess: f64,
}

impl Surface<'_> {
    fn log_weights(&self, model: &GibbsModel) -> Vec<f64> {
        self.draws
            .iter()
            .zip(self.reference)
            .map(|(s, &r)| {
                let e = s.energy(model);
                if e == f64::INFINITY {
                    f64::NEG_INFINITY
                } else {
                    r - e
                }
            })
            .collect()
    }

    /// `(value, standard error, ESS)`.
    fn eval(&self, model: &GibbsModel) -> (f64, f64, f64) {
        let ed = self.data.energy(model);
        if ed == f64::INFINITY {
            return (f64::INFINITY, f64::INFINITY, 0.0);
        }
        let lw = self.log_weights(model);
        let shift = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if shift == f64::NEG_INFINITY {
            return (f64::INFINITY, f64::INFINITY, 0.0);
        }
        let w: Vec<f64> = lw.iter().map(|l| (l - shift).exp()).collect();
        let sum: f64 = w.iter().sum();
        let mean = sum / lw.len() as f64;
        let value = (shift + sum.ln() + ed) / self.vol + self.offset;
        let se = batch_means_se(&w, SE_BATCHES) / mean / self.vol;
        (value, se, ess_from_log_weights(&lw))
    }

    fn objective(&self, model: &GibbsModel) -> f64 {
        let (v, _, ess) = self.eval(model);
        if ess < self.min_ess {
            f64::INFINITY
        } else {
            v
        }
    }
}

struct CandidateBest {
    range: Option<f64>,
    free: Vec<f64>,
    value: f64,
    trace: Vec<TraceRow>,
}

/// Starting points: the reference, halfway to the box centre, then halfway
/// to alternating corners. Whole-box jumps land where the weights are
/// degenerate.
fn starts(space: &ParamSpace, reference: &GibbsModel, count: usize) -> Vec<Vec<f64>> {
    let (lo, hi) = space.free_bounds();
    let r = space.free_values(reference);
    let half = |t: &[f64]| -> Vec<f64> { r.iter().zip(t).map(|(a, b)| 0.5 * (a + b)).collect() };
    let mut s = vec![r.clone(), half(&space.center())];
    let mut k = 0usize;
    while s.len() < count {
        let corner: Vec<f64> = (0..lo.len())
            .map(|i| if (k >> (i % 64)) & 1 == 0 { lo[i] } else { hi[i] })
            .collect();
        let corner = half(&corner);
        s.push(corner);
        k += 1;
        if k > 1 << lo.len().min(16) {
            break;
        }
    }
    s.truncate(count.max(1));
    s
}

#[allow(clippy::too_many_arguments)]
fn optimize_candidate(
    space: &ParamSpace,
    surface: &Surface<'_>,
    range: Option<f64>,
    reference: &GibbsModel,
    ocfg: &OptimizerConfig,
    round: usize,
) -> Option<CandidateBest> {
    let (lo, hi) = space.free_bounds();
    let f = |x: &[f64]| match space.build(x, range) {
        Ok(m) => surface.objective(&m),
        Err(_) => f64::INFINITY,
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut trace = Vec::new();
    let mut push = |x: &[f64], value: f64, evals: usize, start: usize, stage: &'static str| {
        let ess = space.build(x, range).map(|m| surface.eval(&m).2).unwrap_or(0.0);
        trace.push(TraceRow {
            round,
            stage,
            range: range.unwrap_or(f64::NAN),
            start,
            evals,
            params: space.assemble(x, range),
            value,
            ess,
        });
    };
    for (k, x0) in starts(space, reference, ocfg.restarts).into_iter().enumerate() {
        let m = minimize_in_box(f, &x0, &lo, &hi, &ocfg.nm_options());
        push(&m.x, m.value, m.evals, k, "simplex");
        if best.as_ref().is_none_or(|b| m.value < b.1) {
            best = Some((m.x, m.value));
        }
    }
    let (x, v) = best?;
    if !v.is_finite() {
        return None;
    }
    // restart once from the incumbent
    let m = minimize_in_box(f, &x, &lo, &hi, &ocfg.nm_options());
    push(&m.x, m.value, m.evals, ocfg.restarts, "polish");
    let (x, v) = if m.value < v { (m.x, m.value) } else { (x, v) };
    Some(CandidateBest {
        range,
        free: x,
        value: v,
        trace,
    })
}

struct RoundOutcome {
    model: GibbsModel,
    value: f64,
    se: f64,
    ess: f64,
    profile: Vec<(f64, f64)>,
    trace: Vec<TraceRow>,
    warnings: Vec<String>,
}

/// Every reference chain run so far. The surface reweights the pooled draws
/// against the mixture of references, so earlier rounds keep contributing.
struct Pool {
    references: Vec<GibbsModel>,
    sets: Vec<SampleSet>,
}

impl Pool {
    fn draws(&self) -> impl Iterator<Item = &PointConfig> {
        self.sets.iter().flat_map(|s| s.draws.iter())
    }

    fn len(&self) -> usize {
        self.sets.iter().map(SampleSet::len).sum()
    }
}

/// `ln Σ_j M_j e^{-H_j(x_n) - g_j}` for every pooled draw, with the relative
/// `g_j = ln Z_j` solved self-consistently (`g_0 = 0`). `energies[j][n]` is
/// `H_j` at draw `n`.
fn log_mixture(energies: &[Vec<f64>], counts: &[usize]) -> Vec<f64> {
    let k = energies.len();
    let n = energies[0].len();
    let ln_m: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let mut g = vec![0.0; k];
    let mut mix = vec![0.0; n];
    let mut terms = vec![0.0; k];
    for _ in 0..2000 {
        for (i, m) in mix.iter_mut().enumerate() {
            for j in 0..k {
                terms[j] = ln_m[j] - energies[j][i] - g[j];
            }
            *m = logsumexp(&terms);
        }
        if k == 1 {
            break;
        }
        let next: Vec<f64> = energies
            .iter()
            .map(|e| {
                let t: Vec<f64> = e.iter().zip(&mix).map(|(e, m)| -e - m).collect();
                logsumexp(&t)
            })
            .collect();
        let change = next
            .iter()
            .zip(&g)
            .map(|(a, b)| ((a - next[0]) - b).abs())
            .fold(0.0, f64::max);
        for (gj, nj) in g.iter_mut().zip(&next) {
            *gj = nj - next[0];
        }
        if change < 1e-10 {
            for (i, m) in mix.iter_mut().enumerate() {
                for j in 0..k {
                    terms[j] = ln_m[j] - energies[j][i] - g[j];
                }
                *m = logsumexp(&terms);
            }
            break;
        }
    }
    mix
}

fn run_round(
    data: &PointConfig,
    w: &Window,
    space: &ParamSpace,
    pool: &Pool,
    ocfg: &OptimizerConfig,
    chain_draws: usize,
    round: usize,
) -> Result<RoundOutcome, EstimatorError> {
    let reference = pool.references.last().expect("pool has a chain");
    let vol = w.volume();
    let min_ess = ocfg.trust_ess * chain_draws as f64;
    let ranges: Vec<Option<f64>> = if space.candidates().is_empty() {
        vec![None]
    } else {
        space.candidates().iter().map(|&r| Some(r)).collect()
    };
    let counts: Vec<usize> = pool.sets.iter().map(SampleSet::len).collect();
    let draws_all: Vec<&PointConfig> = pool.draws().collect();

    let template = space.template();
    let mut warnings = Vec::new();
    let pairwise = template.is_pairwise();
    let reach = ranges
        .iter()
        .flatten()
        .copied()
        .chain(pool.references.iter().map(GibbsModel::interaction_range))
        .fold(0.0, f64::max);
    let summaries: Vec<Summary> = if pairwise {
        draws_all.par_iter().map(|d| Summary::of(template, d, reach)).collect()
    } else {
        Vec::new()
    };
    let energies: Vec<Vec<f64>> = pool
        .references
        .iter()
        .map(|r| {
            if pairwise {
                summaries.iter().map(|s| s.energy(r)).collect()
            } else {
                draws_all.par_iter().map(|d| Summary::of(r, d, 0.0).energy(r)).collect()
            }
        })
        .collect();
    let neg_mix: Vec<f64> = log_mixture(&energies, &counts).into_iter().map(|m| -m).collect();

    let results: Vec<Option<CandidateBest>> = if pairwise {
        let data_s = Summary::of(template, data, reach);
        let surface = Surface {
            draws: &summaries,
            data: &data_s,
            reference: &neg_mix,
            vol,
            offset: ocfg.surface_offset,
            min_ess,
        };
        ranges
            .par_iter()
            .map(|&r| optimize_candidate(space, &surface, r, reference, ocfg, round))
            .collect()
    } else {
        ranges
            .par_iter()
            .map(|&r| {
                let shape = space.build(&space.center(), r).ok()?;
                let draws: Vec<Summary> = draws_all.iter().map(|d| Summary::of(&shape, d, 0.0)).collect();
                let data_s = Summary::of(&shape, data, 0.0);
                let surface = Surface {
                    draws: &draws,
                    data: &data_s,
                    reference: &neg_mix,
                    vol,
                    offset: ocfg.surface_offset,
                    min_ess,
                };
                optimize_candidate(space, &surface, r, reference, ocfg, round)
            })
            .collect()
    };

    let mut best: Option<CandidateBest> = None;
    let mut profile = Vec::new();
    let mut trace = Vec::new();
    let mut skipped = 0usize;
    for (r, res) in ranges.iter().zip(results) {
        let Some(res) = res else {
            debug!("round {round}: candidate {r:?} has no admissible point");
            skipped += 1;
            continue;
        };
        if let Some(r) = r {
            profile.push((*r, res.value));
        }
        trace.extend(res.trace.iter().cloned());
        if best.as_ref().is_none_or(|b| res.value < b.value) {
            best = Some(res);
        }
    }
    if skipped > 0 {
        warnings.push(format!("{skipped} range candidates had no admissible point"));
    }
    let best = best.ok_or_else(|| EstimatorError::DegenerateOverlap {
        rounds: round + 1,
        ess: 0.0,
        threshold: min_ess,
    })?;
    let model = space.build(&best.free, best.range)?;

    // diagnostics at the optimum on the surface of its own range
    let (value, se, ess) = {
        let draws: Vec<Summary> = draws_all.iter().map(|d| Summary::of(&model, d, 0.0)).collect();
        let data_s = Summary::of(&model, data, 0.0);
        let surface = Surface {
            draws: &draws,
            data: &data_s,
            reference: &neg_mix,
            vol,
            offset: ocfg.surface_offset,
            min_ess: 0.0,
        };
        surface.eval(&model)
    };
    debug!("round {round}: {model} value {value} (searched {}) ess {ess:.1}", best.value);
    Ok(RoundOutcome {
        model,
        value,
        se,
        ess,
        profile,
        trace,
        warnings,
    })
}

/// Reference `ln Z` bridged from the interaction-free model with the same
/// `z`; `None` when no analytic anchor exists.
fn reference_log_z(
    reference: &GibbsModel,
    w: &Window,
    ocfg: &OptimizerConfig,
    scfg: &SamplerConfig,
    draws: usize,
) -> Option<crate::partition::LogZEstimate> {
    if reference.delta() != 0.0 {
        return None;
    }
    let names = reference.param_names();
    let mut v = reference.params();
    for (i, n) in names.iter().enumerate() {
        if n.starts_with("beta") {
            v[i] = 0.0;
        }
    }
    let anchor = reference.with_params(&v).ok()?;
    if !anchor.is_interaction_free() {
        return None;
    }
    let sched = BridgeSchedule::linear(&anchor, reference, ocfg.bridge_legs, draws).ok()?;
    match log_z_bridged(&sched, w, scfg) {
        Ok(e) => Some(e),
        Err(e) => {
            warn!("bridging the reference failed: {e}");
            None
        }
    }
}

/// Monte Carlo maximum likelihood for the family of `family` (its kind and
/// any shape parameters not searched over) on the points of `data` in `w`.
pub fn mc_mle(
    data: &PointConfig,
    w: &Window,
    family: &GibbsModel,
    ocfg: &OptimizerConfig,
    scfg: &SamplerConfig,
) -> Result<FitResult, EstimatorError> {
    ocfg.validate()?;
    scfg.validate()?;
    family.check_dimension(w.dim())?;
    let data = data.restrict(w);
    if data.is_empty() {
        return Err(EstimatorError::InfeasibleData(
            "no points in the window: the intensity estimate diverges".into(),
        ));
    }
    let (template, hc) = resolve_hardcore(&data, w, family, ocfg)?;
    let space = ParamSpace::resolve(&template, &data, w, ocfg)?;

    let mut trace = Vec::new();
    let mut reference = match fit_in_space(&space, &data, w, ocfg) {
        Some(pl) => {
            trace.extend(pl.trace);
            pl.model
        }
        None => {
            let r = space.candidates().first().copied();
            space.build(&space.center(), r)?
        }
    };
    info!("mc_mle reference {reference}");
    let mut pool = Pool {
        references: Vec::new(),
        sets: Vec::new(),
    };
    let mut last_ess = 0.0;
    let mut threshold = 0.0;
    for round in 0..ocfg.max_rounds {
        let seed = if ocfg.common_random_numbers {
            scfg.seed
        } else {
            derive_seed(scfg.seed, round as u64)
        };
        let rcfg = scfg.with_seed(seed);
        let samples = run_chain(&reference, w, &rcfg)?;
        if samples.is_empty() {
            return Err(EstimatorError::Sampler(crate::sampler::SamplerError::InvalidConfig(
                "no draws".into(),
            )));
        }
        let chain_draws = samples.len();
        let non_ergodic = samples.diagnostics.non_ergodic;
        pool.references.push(reference.clone());
        pool.sets.push(samples);
        let out = run_round(&data, w, &space, &pool, ocfg, chain_draws, round)?;
        trace.extend(out.trace);
        threshold = ocfg.min_relative_ess * chain_draws as f64;
        last_ess = out.ess;
        if out.ess >= threshold {
            let pooled = pool.len();
            let mut warnings = out.warnings;
            if non_ergodic {
                warnings.push("reference chain flagged as possibly non-ergodic".into());
            }
            if let Some(p) = space.profile_index() {
                let beta = out.model.param("beta").unwrap_or(1.0);
                let (lo, hi) = space.bounds();
                let bi = space.names().iter().position(|n| n == "beta");
                let width = bi.map_or(1.0, |i| hi[i] - lo[i]);
                if beta.abs() <= 0.02 * width {
                    warnings.push(format!(
                        "fitted beta {beta} is near 0: {} = {} is not identifiable",
                        space.names()[p],
                        out.model.params()[p]
                    ));
                }
            }
            let (mut contrast, mut mc_error, mut absolute) = (out.value, out.se, false);
            if ocfg.bridge_legs > 0 {
                match reference_log_z(&pool.references[0], w, ocfg, &rcfg, chain_draws) {
                    Some(lz) => {
                        let vol = w.volume();
                        contrast = out.value - ocfg.surface_offset + lz.value / vol;
                        mc_error = out.se.hypot(lz.std_error / vol);
                        absolute = true;
                    }
                    None => warnings.push("absolute contrast unavailable for this reference".into()),
                }
            }
            return Ok(FitResult {
                method: FitMethod::McMle,
                model: out.model,
                delta_hat: hc.delta_hat,
                delta_tilde: hc.delta_tilde,
                infeasible: hc.infeasible,
                contrast,
                mc_error,
                contrast_absolute: absolute,
                references: pool.references,
                seed: scfg.seed,
                rounds: round + 1,
                draws: pooled,
                ess: out.ess,
                bridge_legs: if absolute { ocfg.bridge_legs } else { 0 },
                profile: out.profile,
                trace,
                warnings,
            });
        }
        debug!("round {round}: ESS {:.1} below {threshold:.1}, re-anchoring", out.ess);
        reference = out.model;
    }
    Err(EstimatorError::DegenerateOverlap {
        rounds: ocfg.max_rounds,
        ess: last_ess,
        threshold,
    })
}

/// [`mc_mle`] with the range profiled over `candidates`; returns the chosen
/// range with the fit.
pub fn profile_range(
    data: &PointConfig,
    w: &Window,
    family: &GibbsModel,
    candidates: &[f64],
    ocfg: &OptimizerConfig,
    scfg: &SamplerConfig,
) -> Result<(f64, FitResult), EstimatorError> {
    if candidates.is_empty() {
        return Err(EstimatorError::InvalidBox("empty range grid".into()));
    }
    let mut o = ocfg.clone();
    o.range_grid = RangeGrid::Values(candidates.to_vec());
    if candidates.len() == 1 {
        o.bounds.insert("range".into(), (candidates[0], candidates[0]));
    } else if !o.bounds.contains_key("range") {
        let lo = candidates.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = candidates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        o.bounds.insert("range".into(), (lo, hi));
    }
    let fit = mc_mle(data, w, family, &o, scfg)?;
    let r = fit
        .param("range")
        .ok_or_else(|| EstimatorError::InvalidBox(format!("{} has no range parameter", family.kind())))?;
    Ok((r, fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Two chains on four states with exact empirical frequencies: the
    // normalizers are recovered exactly.
    #[test]
    fn mixture_recovers_normalizer_ratio() {
        let p1 = [0.1, 0.2, 0.3, 0.4];
        let p2 = [0.4, 0.3, 0.2, 0.1];
        let mut states = Vec::new();
        for (s, &p) in p1.iter().enumerate() {
            states.extend(std::iter::repeat_n(s, (p * 10.0_f64).round() as usize));
        }
        for (s, &p) in p2.iter().enumerate() {
            states.extend(std::iter::repeat_n(s, (p * 10.0_f64).round() as usize));
        }
        let h1: Vec<f64> = states.iter().map(|&s| -p1[s].ln()).collect();
        let h2: Vec<f64> = states.iter().map(|&s| -(3.0 * p2[s]).ln()).collect();
        let mix = log_mixture(&[h1.clone(), h2.clone()], &[10, 10]);
        let lz = |h: &[f64]| logsumexp(&h.iter().zip(&mix).map(|(h, m)| -h - m).collect::<Vec<_>>());
        assert!(lz(&h1).abs() < 1e-9);
        assert!((lz(&h2) - 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn single_chain_mixture_is_the_reference() {
        let h = [0.5, 1.5, -2.0];
        let mix = log_mixture(&[h.to_vec()], &[3]);
        for (m, h) in mix.iter().zip(h) {
            assert!((m - (3f64.ln() - h)).abs() < 1e-12);
        }
    }
}
