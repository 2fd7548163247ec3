//! Log-pseudolikelihood `-Σ_x h(x|ω\x) - ∫_Λ e^{-h(u|ω)} du`, with the
//! integral on a midpoint grid of dummy points.

use std::collections::HashMap;

use log::debug;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::geometry::{Point, PointConfig, Window};
use crate::models::{GibbsModel, Summary};
use crate::sampler::grid_nodes;

use super::nelder_mead::minimize_in_box;
use super::space::ParamSpace;
use super::{EstimatorError, FitMethod, FitResult, OptimizerConfig, TraceRow};

const NEWTON_MAX_ITER: usize = 100;

/// Grid resolution used when none is configured: about ten nodes per unit
/// length, between 50 and 400 per side.
pub(crate) fn default_quadrature(w: &Window) -> usize {
    let side = (0..w.dim()).map(|a| w.side(a)).fold(0.0, f64::max);
    ((10.0 * side).ceil() as usize).clamp(50, 400)
}

fn dummy_points(w: &Window, grid: usize) -> (Vec<Point>, f64) {
    let nodes = grid_nodes(w, grid.max(1));
    let cell = w.volume() / nodes.len() as f64;
    (nodes, cell)
}

/// The log-pseudolikelihood of `model` on the points of `data` inside `w`,
/// with `grid` dummy points per side.
pub fn pl_objective(model: &GibbsModel, data: &PointConfig, w: &Window, grid: usize) -> f64 {
    let (nodes, cell) = dummy_points(w, grid);
    let mut value = 0.0;
    for (i, x) in data.points().iter().enumerate() {
        if w.contains(x) {
            value -= Summary::local(model, x, data, Some(i), 0.0).energy(model);
        }
    }
    for u in &nodes {
        let h = Summary::local(model, u, data, None, 0.0).energy(model);
        value -= cell * (-h).exp();
    }
    value
}

/// Gradient of [`pl_objective`] in the linear parameters of `model` (the
/// entries flagged by its linear mask, in order).
pub fn pl_gradient(model: &GibbsModel, data: &PointConfig, w: &Window, grid: usize) -> Vec<f64> {
    let (nodes, cell) = dummy_points(w, grid);
    let p = model.linear_mask().iter().filter(|b| **b).count();
    let mut g = vec![0.0; p];
    for (i, x) in data.points().iter().enumerate() {
        if w.contains(x) {
            let s = Summary::local(model, x, data, Some(i), 0.0);
            for (gk, sk) in g.iter_mut().zip(s.linear_statistics(model)) {
                *gk -= sk;
            }
        }
    }
    for u in &nodes {
        let s = Summary::local(model, u, data, None, 0.0);
        let h = s.energy(model);
        if h == f64::INFINITY {
            continue;
        }
        let e = cell * (-h).exp();
        for (gk, sk) in g.iter_mut().zip(s.linear_statistics(model)) {
            *gk += e * sk;
        }
    }
    g
}

/// Local summaries of the data points (each against the rest) and of the
/// dummy points, at one disc radius for area models.
struct LocalSummaries {
    data: Vec<Summary>,
    dummy: Vec<Summary>,
    cell: f64,
}

impl LocalSummaries {
    fn new(shape: &GibbsModel, data: &PointConfig, w: &Window, nodes: &[Point], cell: f64, reach: f64) -> Self {
        let data_s = data
            .points()
            .iter()
            .enumerate()
            .filter(|(_, x)| w.contains(x))
            .map(|(i, x)| Summary::local(shape, x, data, Some(i), reach))
            .collect();
        let dummy = nodes
            .par_iter()
            .map(|u| Summary::local(shape, u, data, None, reach))
            .collect();
        LocalSummaries {
            data: data_s,
            dummy,
            cell,
        }
    }

    /// Data statistic totals and dummy statistics grouped by value, for a
    /// model of the summarized shape. `None` when a data point is outside the
    /// support.
    fn aggregate(&self, model: &GibbsModel) -> Option<Aggregated> {
        let p = model.linear_mask().iter().filter(|b| **b).count();
        let mut total = vec![0.0; p];
        for s in &self.data {
            if s.violates_support(model) {
                return None;
            }
            for (t, v) in total.iter_mut().zip(s.linear_statistics(model)) {
                *t += v;
            }
        }
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut groups: Vec<(Vec<f64>, f64)> = Vec::new();
        for s in &self.dummy {
            if s.violates_support(model) {
                continue;
            }
            let st = s.linear_statistics(model);
            let key: Vec<u64> = st.iter().map(|v| v.to_bits()).collect();
            match index.get(&key) {
                Some(&g) => groups[g].1 += self.cell,
                None => {
                    index.insert(key, groups.len());
                    groups.push((st, self.cell));
                }
            }
        }
        Some(Aggregated { total, groups })
    }
}

struct Aggregated {
    total: Vec<f64>,
    groups: Vec<(Vec<f64>, f64)>,
}

impl Aggregated {
    /// Negative log-pseudolikelihood at linear parameters `theta`.
    fn neg_pl(&self, theta: &[f64]) -> f64 {
        let a: f64 = theta.iter().zip(&self.total).map(|(t, s)| t * s).sum();
        let b: f64 = self
            .groups
            .iter()
            .map(|(s, wgt)| wgt * (-dot(theta, s)).exp())
            .sum();
        a + b
    }

    /// Gradient and Hessian of `neg_pl` in the coordinates `idx`.
    fn derivatives(&self, theta: &[f64], idx: &[usize]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let k = idx.len();
        let mut g: Vec<f64> = idx.iter().map(|&i| self.total[i]).collect();
        let mut h = vec![vec![0.0; k]; k];
        for (s, wgt) in &self.groups {
            let e = wgt * (-dot(theta, s)).exp();
            for a in 0..k {
                let sa = s[idx[a]];
                g[a] -= e * sa;
                for b in 0..=a {
                    h[a][b] += e * sa * s[idx[b]];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                h[b][a] = h[a][b];
            }
        }
        (g, h)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `h x = g` for a positive definite `h`; `None` when the Cholesky
/// factor has a negligible pivot.
fn solve(h: Vec<Vec<f64>>, g: Vec<f64>) -> Option<Vec<f64>> {
    let n = g.len();
    let m = DMatrix::from_fn(n, n, |i, j| h[i][j]);
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    let chol = m.cholesky()?;
    let l = chol.l();
    if (0..n).any(|i| l[(i, i)] * l[(i, i)] <= 1e-12 * scale) {
        return None;
    }
    Some(chol.solve(&DVector::from_vec(g)).iter().copied().collect())
}

/// The optimum at one range candidate.
struct CandidateFit {
    model: GibbsModel,
    neg_pl: f64,
    evals: usize,
    stage: &'static str,
}

fn fit_candidate(
    space: &ParamSpace,
    summaries: &LocalSummaries,
    range: Option<f64>,
    start: &[f64],
    ocfg: &OptimizerConfig,
) -> Option<CandidateFit> {
    let shape = space.build(start, range).ok()?;
    let free = space.free_indices();
    let mask = shape.linear_mask();
    let (lo, hi) = space.free_bounds();
    // positions of the free parameters among the linear ones
    let linear_pos: Vec<usize> = (0..mask.len())
        .filter(|&i| mask[i])
        .enumerate()
        .map(|(k, i)| (i, k))
        .filter(|(i, _)| free.contains(i))
        .map(|(_, k)| k)
        .collect();
    let all_linear = linear_pos.len() == free.len();
    let lin_theta = |x: &[f64]| -> Vec<f64> {
        let full = space.assemble(x, range);
        full.iter().zip(&mask).filter_map(|(v, m)| m.then_some(*v)).collect()
    };

    if all_linear {
        let agg = summaries.aggregate(&shape)?;
        let f = |x: &[f64]| agg.neg_pl(&lin_theta(x));
        let mut x = start.to_vec();
        let mut fx = f(&x);
        let mut evals = 1;
        let mut newton_ok = true;
        for _ in 0..NEWTON_MAX_ITER {
            let (g, h) = agg.derivatives(&lin_theta(&x), &linear_pos);
            let Some(step) = solve(h, g.clone()) else {
                newton_ok = false;
                break;
            };
            let slope: f64 = -dot(&g, &step);
            if slope.abs() <= 1e-12 * (1.0 + fx.abs()) {
                break;
            }
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..40 {
                let cand: Vec<f64> = (0..x.len())
                    .map(|k| (x[k] - t * step[k]).clamp(lo[k], hi[k]))
                    .collect();
                let fc = f(&cand);
                evals += 1;
                if fc < fx {
                    moved = cand != x;
                    x = cand;
                    fx = fc;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                // no progress: either converged or stuck on the box boundary
                newton_ok = slope.abs() <= 1e-8 * (1.0 + fx.abs());
                break;
            }
        }
        let mut stage = "newton";
        if !newton_ok {
            let m = minimize_in_box(f, &x, &lo, &hi, &ocfg.nm_options());
            evals += m.evals;
            if m.value <= fx {
                x = m.x;
                fx = m.value;
            }
            stage = "simplex";
        }
        let model = space.build(&x, range).ok()?;
        return Some(CandidateFit {
            model,
            neg_pl: fx,
            evals,
            stage,
        });
    }

    // shape parameters move too: recompute statistics at every evaluation
    let f = |x: &[f64]| -> f64 {
        let Ok(m) = space.build(x, range) else {
            return f64::INFINITY;
        };
        match summaries.aggregate(&m) {
            Some(agg) => agg.neg_pl(&lin_theta(x)),
            None => f64::INFINITY,
        }
    };
    let m = minimize_in_box(f, start, &lo, &hi, &ocfg.nm_options());
    Some(CandidateFit {
        model: space.build(&m.x, range).ok()?,
        neg_pl: m.value,
        evals: m.evals,
        stage: "simplex",
    })
}

pub(crate) struct PlOutcome {
    pub model: GibbsModel,
    pub neg_pl: f64,
    pub profile: Vec<(f64, f64)>,
    pub trace: Vec<TraceRow>,
}

/// Pseudolikelihood fit within `space`, profiling the range when it has a
/// candidate grid. Ties go to the smaller range.
pub(crate) fn fit_in_space(
    space: &ParamSpace,
    data: &PointConfig,
    w: &Window,
    ocfg: &OptimizerConfig,
) -> Option<PlOutcome> {
    let grid = ocfg.quadrature.unwrap_or_else(|| default_quadrature(w));
    let (nodes, cell) = dummy_points(w, grid);
    let start = space.center();
    let ranges: Vec<Option<f64>> = if space.candidates().is_empty() {
        vec![None]
    } else {
        space.candidates().iter().map(|&r| Some(r)).collect()
    };
    let template = space.template();
    let shared = template.is_pairwise().then(|| {
        let reach = ranges
            .iter()
            .flatten()
            .copied()
            .fold(template.interaction_range(), f64::max);
        LocalSummaries::new(template, data, w, &nodes, cell, reach)
    });
    let fits: Vec<Option<CandidateFit>> = ranges
        .par_iter()
        .map(|&r| match &shared {
            Some(s) => fit_candidate(space, s, r, &start, ocfg),
            None => {
                let shape = space.build(&start, r).ok()?;
                let s = LocalSummaries::new(&shape, data, w, &nodes, cell, 0.0);
                fit_candidate(space, &s, r, &start, ocfg)
            }
        })
        .collect();
    let vol = w.volume();
    let mut best: Option<CandidateFit> = None;
    let mut profile = Vec::new();
    let mut trace = Vec::new();
    for (r, fit) in ranges.iter().zip(fits) {
        let Some(fit) = fit else {
            debug!("pseudolikelihood candidate {r:?} skipped");
            continue;
        };
        if let Some(r) = r {
            profile.push((*r, fit.neg_pl / vol));
        }
        trace.push(TraceRow {
            round: 0,
            stage: fit.stage,
            range: r.unwrap_or(f64::NAN),
            start: 0,
            evals: fit.evals,
            params: fit.model.params(),
            value: fit.neg_pl / vol,
            ess: f64::NAN,
        });
        if best.as_ref().is_none_or(|b| fit.neg_pl < b.neg_pl) {
            best = Some(fit);
        }
    }
    best.map(|b| PlOutcome {
        model: b.model,
        neg_pl: b.neg_pl,
        profile,
        trace,
    })
}

/// Maximum pseudolikelihood over the box of `ocfg`. The hardcore distance
/// is set by [`super::hardcore_mle`] for kinds that have one.
pub fn pseudolikelihood_fit(
    data: &PointConfig,
    w: &Window,
    family: &GibbsModel,
    ocfg: &OptimizerConfig,
) -> Result<FitResult, EstimatorError> {
    ocfg.validate()?;
    family.check_dimension(w.dim())?;
    if ocfg.quadrature == Some(0) {
        return Err(EstimatorError::InvalidBox("quadrature resolution must be positive".into()));
    }
    let data = data.restrict(w);
    let (template, hc) = super::mcmle::resolve_hardcore(&data, w, family, ocfg)?;
    let space = ParamSpace::resolve(&template, &data, w, ocfg)?;
    let out = fit_in_space(&space, &data, w, ocfg)
        .ok_or_else(|| EstimatorError::InfeasibleData("no admissible parameter in the box".into()))?;
    Ok(FitResult {
        method: FitMethod::Pseudolikelihood,
        model: out.model,
        delta_hat: hc.delta_hat,
        delta_tilde: hc.delta_tilde,
        infeasible: hc.infeasible,
        contrast: out.neg_pl / w.volume(),
        mc_error: 0.0,
        contrast_absolute: false,
        references: Vec::new(),
        seed: 0,
        rounds: 0,
        draws: 0,
        ess: f64::NAN,
        bridge_legs: 0,
        profile: out.profile,
        trace: out.trace,
        warnings: Vec::new(),
    })
}
