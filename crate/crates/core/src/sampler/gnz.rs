use std::fmt;
use std::sync::Arc;

use crate::geometry::{Point, PointConfig, Window};
use crate::models::{local_energy_with, GibbsModel};
use crate::stats::{batch_means_se, mean};

use super::SampleSet;

/// Test statistic `f(x, ω)`. The callback receives the point, the
/// configuration and the index of `x` in it when `x` is a member (to be
/// excluded).
#[derive(Clone)]
pub enum TestFunction {
    Zero,
    Constant(f64),
    /// Number of other points within distance `r`.
    NeighborCount(f64),
    Custom(Arc<dyn Fn(&Point, &PointConfig, Option<usize>) -> f64 + Send + Sync>),
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Zero => write!(f, "Zero"),
            TestFunction::Constant(c) => write!(f, "Constant({c})"),
            TestFunction::NeighborCount(r) => write!(f, "NeighborCount({r})"),
            TestFunction::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl TestFunction {
    fn eval(&self, x: &Point, config: &PointConfig, exclude: Option<usize>) -> f64 {
        match self {
            TestFunction::Zero => 0.0,
            TestFunction::Constant(c) => *c,
            TestFunction::NeighborCount(r) => {
                let mut n = 0usize;
                config.for_each_neighbor(x, *r, exclude, false, |_, _| n += 1);
                n as f64
            }
            TestFunction::Custom(f) => f(x, config, exclude),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GnzOptions {
    /// Midpoints per side of the quadrature grid.
    pub grid: usize,
    /// Multiplier on the interaction part of the local energy; `-1` gives a
    /// deliberately wrong energy for negative controls.
    pub interaction_sign: f64,
    pub batches: usize,
}

impl Default for GnzOptions {
    fn default() -> Self {
        GnzOptions {
            grid: 100,
            interaction_sign: 1.0,
            batches: 30,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GnzEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Per-draw residuals.
    pub per_draw: Vec<f64>,
}

impl GnzEstimate {
    /// `|value| <= k·SE`; an exactly zero residual always passes.
    pub fn within(&self, k: f64) -> bool {
        self.value == 0.0 || self.value.abs() <= k * self.std_error
    }
}

pub fn gnz_residual(samples: &SampleSet, model: &GibbsModel, w: &Window, f: &TestFunction) -> GnzEstimate {
    gnz_residual_with(samples, model, w, f, &GnzOptions::default())
}

/// Mean over draws of `Σ_x f(x, ω\x) - Σ_u f(u, ω) e^{-h(u|ω)} |cell|` on a
/// midpoint grid over `w`, with a batch-means standard error.
pub fn gnz_residual_with(
    samples: &SampleSet,
    model: &GibbsModel,
    w: &Window,
    f: &TestFunction,
    opts: &GnzOptions,
) -> GnzEstimate {
    let nodes = grid_nodes(w, opts.grid.max(1));
    let cell = w.volume() / nodes.len() as f64;
    let h = |u: &Point, c: &PointConfig, ex: Option<usize>| {
        let full = local_energy_with(model, u, c, ex, false);
        if opts.interaction_sign == 1.0 || !full.is_finite() {
            full
        } else {
            model.z() + opts.interaction_sign * (full - model.z())
        }
    };
    let per_draw: Vec<f64> = samples
        .draws
        .iter()
        .map(|c| {
            if matches!(f, TestFunction::Zero) {
                return 0.0;
            }
            let sum: f64 = c
                .points()
                .iter()
                .enumerate()
                .filter(|(_, x)| w.contains(x))
                .map(|(i, x)| f.eval(x, c, Some(i)))
                .sum();
            let integral: f64 = nodes
                .iter()
                .map(|u| {
                    let e = h(u, c, None);
                    if e == f64::INFINITY {
                        0.0
                    } else {
                        f.eval(u, c, None) * (-e).exp()
                    }
                })
                .sum::<f64>()
                * cell;
            sum - integral
        })
        .collect();
    GnzEstimate {
        value: mean(&per_draw),
        std_error: batch_means_se(&per_draw, opts.batches),
        per_draw,
    }
}

pub(crate) fn grid_nodes(w: &Window, k: usize) -> Vec<Point> {
    let (lo, hi) = (w.lower(), w.upper());
    let hx = (hi[0] - lo[0]) / k as f64;
    if w.dim() == 1 {
        return (0..k).map(|i| [lo[0] + (i as f64 + 0.5) * hx, 0.0]).collect();
    }
    let hy = (hi[1] - lo[1]) / k as f64;
    let mut out = Vec::with_capacity(k * k);
    for j in 0..k {
        for i in 0..k {
            out.push([lo[0] + (i as f64 + 0.5) * hx, lo[1] + (j as f64 + 0.5) * hy]);
        }
    }
    out
}
