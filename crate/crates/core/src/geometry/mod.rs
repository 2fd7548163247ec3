//! Point configurations on bounded rectangular windows.
//!
//! Points are stored as `[f64; 2]`; in dimension 1 the second coordinate is
//! always zero, so Euclidean distances reduce to the one-dimensional ones.

mod grid;
pub mod io;

use rand::Rng;
use thiserror::Error;

pub(crate) use grid::CellGrid;

/// A location in the plane (or on the line, with `p[1] == 0`).
pub type Point = [f64; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("unsupported dimension {0} (expected 1 or 2)")]
    UnsupportedDimension(usize),
    #[error("degenerate window: lower {lower:?} must be below upper {upper:?}")]
    DegenerateWindow { lower: Vec<f64>, upper: Vec<f64> },
    #[error("erosion by {radius} leaves an empty window")]
    EmptyWindow { radius: f64 },
    #[error("point {point:?} lies outside the window")]
    PointOutsideWindow { point: Point },
}

/// Euclidean distance. Written out without fused operations so that results
/// are bit-reproducible on a given platform.
#[inline]
pub fn distance(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Axis-aligned box `[lower, upper]` in dimension 1 or 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    dim: usize,
    lower: [f64; 2],
    upper: [f64; 2],
}

impl Window {
    pub fn new(lower: &[f64], upper: &[f64]) -> Result<Self, GeometryError> {
        let dim = lower.len();
        if !(1..=2).contains(&dim) || upper.len() != dim {
            return Err(GeometryError::UnsupportedDimension(dim.max(upper.len())));
        }
        let degenerate = lower
            .iter()
            .zip(upper)
            .any(|(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite());
        if degenerate {
            return Err(GeometryError::DegenerateWindow {
                lower: lower.to_vec(),
                upper: upper.to_vec(),
            });
        }
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        lo[..dim].copy_from_slice(lower);
        hi[..dim].copy_from_slice(upper);
        Ok(Window {
            dim,
            lower: lo,
            upper: hi,
        })
    }

    pub fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self, GeometryError> {
        Self::new(&[x0, y0], &[x1, y1])
    }

    pub fn interval(x0: f64, x1: f64) -> Result<Self, GeometryError> {
        Self::new(&[x0], &[x1])
    }

    /// The experiment window `[-n, n]^dim`.
    pub fn centered(n: f64, dim: usize) -> Result<Self, GeometryError> {
        Self::new(&vec![-n; dim], &vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> [f64; 2] {
        self.lower
    }

    pub fn upper(&self) -> [f64; 2] {
        self.upper
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn min_side(&self) -> f64 {
        (0..self.dim).map(|a| self.side(a)).fold(f64::INFINITY, f64::min)
    }

    /// Lebesgue measure `|Λ|`.
    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|a| self.side(a)).product()
    }

    /// Closed-box membership.
    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim).all(|a| p[a] >= self.lower[a] && p[a] <= self.upper[a])
            && (self.dim == 2 || p[1] == 0.0)
    }

    /// Minkowski erosion of the box by a ball of radius `r`.
    pub fn shrink(&self, r: f64) -> Result<Window, GeometryError> {
        if (0..self.dim).any(|a| 2.0 * r >= self.side(a)) {
            return Err(GeometryError::EmptyWindow { radius: r });
        }
        let lo: Vec<f64> = (0..self.dim).map(|a| self.lower[a] + r).collect();
        let hi: Vec<f64> = (0..self.dim).map(|a| self.upper[a] - r).collect();
        Window::new(&lo, &hi)
    }

    /// Enlargement by `r` on every side (the bounding box of `Λ ⊕ B(0, r)`).
    pub fn expand(&self, r: f64) -> Window {
        let mut w = *self;
        for a in 0..self.dim {
            w.lower[a] -= r;
            w.upper[a] += r;
        }
        w
    }

    /// Intersection of two boxes of the same dimension, if it has positive volume.
    pub fn intersect(&self, other: &Window) -> Option<Window> {
        let lo: Vec<f64> = (0..self.dim)
            .map(|a| self.lower[a].max(other.lower[a]))
            .collect();
        let hi: Vec<f64> = (0..self.dim)
            .map(|a| self.upper[a].min(other.upper[a]))
            .collect();
        Window::new(&lo, &hi).ok()
    }

    pub fn uniform_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let mut p = [0.0; 2];
        for (a, c) in p.iter_mut().enumerate().take(self.dim) {
            *c = self.lower[a] + rng.random::<f64>() * self.side(a);
        }
        p
    }

    /// Wraps a point onto the torus obtained by identifying opposite faces.
    pub fn wrap(&self, p: &Point) -> Point {
        let mut q = *p;
        for (a, c) in q.iter_mut().enumerate().take(self.dim) {
            *c = self.lower[a] + (*c - self.lower[a]).rem_euclid(self.side(a));
        }
        q
    }

    /// Minimum-image distance on the torus.
    pub fn periodic_distance(&self, a: &Point, b: &Point) -> f64 {
        let mut sq = 0.0;
        for axis in 0..self.dim {
            let l = self.side(axis);
            let mut d = (a[axis] - b[axis]).abs();
            if d > 0.5 * l {
                d = l - d;
            }
            sq += d * d;
        }
        sq.sqrt()
    }
}

/// Heuristic bucket size aiming at a couple of points per cell.
fn default_cell_size(window: &Window, n: usize) -> f64 {
    let per_point = window.volume() / n.max(1) as f64;
    let c = if window.dim() == 2 {
        (2.0 * per_point).sqrt()
    } else {
        2.0 * per_point
    };
    c.min(window.min_side())
}

/// A finite point pattern inside a window, indexed by a uniform cell grid.
///
/// Read-only after construction; the sampler mutates its own chain state
/// through crate-private methods.
#[derive(Clone, Debug)]
pub struct PointConfig {
    window: Window,
    points: Vec<Point>,
    grid: CellGrid,
}

impl PartialEq for PointConfig {
    fn eq(&self, other: &Self) -> bool {
        self.window == other.window && self.points == other.points
    }
}

impl PointConfig {
    pub fn new(window: Window, points: Vec<Point>) -> Result<Self, GeometryError> {
        let cell = default_cell_size(&window, points.len());
        Self::with_cell_size(window, points, cell)
    }

    pub fn with_cell_size(
        window: Window,
        points: Vec<Point>,
        cell_size: f64,
    ) -> Result<Self, GeometryError> {
        if let Some(p) = points.iter().find(|p| !window.contains(p)) {
            return Err(GeometryError::PointOutsideWindow { point: *p });
        }
        let mut grid = CellGrid::new(&window, cell_size);
        for (i, p) in points.iter().enumerate() {
            grid.insert(i, p);
        }
        Ok(PointConfig {
            window,
            points,
            grid,
        })
    }

    pub fn empty(window: Window, cell_size: f64) -> Self {
        PointConfig {
            window,
            points: Vec::new(),
            grid: CellGrid::new(&window, cell_size),
        }
    }

    /// Same points, re-bucketed with a different cell size.
    pub fn reindexed(&self, cell_size: f64) -> Self {
        Self::with_cell_size(self.window, self.points.clone(), cell_size)
            .expect("points already validated")
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn cell_size(&self) -> f64 {
        self.grid.cell_width()
    }

    /// Points of this configuration that fall in `w`, re-windowed to `w`.
    pub fn restrict(&self, w: &Window) -> PointConfig {
        let pts = self
            .points
            .iter()
            .filter(|p| w.contains(p))
            .copied()
            .collect();
        PointConfig::with_cell_size(*w, pts, self.cell_size()).expect("filtered to window")
    }

    /// Visits every point `j != exclude` within distance `r` of `x`,
    /// passing its index and distance.
    pub fn for_each_neighbor(
        &self,
        x: &Point,
        r: f64,
        exclude: Option<usize>,
        periodic: bool,
        mut f: impl FnMut(usize, f64),
    ) {
        self.grid.for_each_candidate(x, r, periodic, |j| {
            if Some(j) == exclude {
                return;
            }
            let d = if periodic {
                self.window.periodic_distance(x, &self.points[j])
            } else {
                distance(x, &self.points[j])
            };
            if d <= r {
                f(j, d);
            }
        });
    }

    /// All points `y != x` with `|x - y| <= r`, in grid order.
    pub fn neighbors_within(&self, x: &Point, r: f64) -> Vec<Point> {
        let mut out = Vec::new();
        self.for_each_neighbor(x, r, None, false, |j, _| {
            let y = self.points[j];
            if y != *x {
                out.push(y);
            }
        });
        out
    }

    pub(crate) fn push(&mut self, p: Point) -> usize {
        let idx = self.points.len();
        self.points.push(p);
        self.grid.insert(idx, &p);
        idx
    }

    pub(crate) fn swap_remove(&mut self, idx: usize) -> Point {
        let p = self.points[idx];
        self.grid.remove(idx, &p);
        let last = self.points.len() - 1;
        if idx != last {
            let moved = self.points[last];
            self.grid.relabel(last, idx, &moved);
        }
        self.points.swap_remove(idx);
        p
    }

    pub(crate) fn set(&mut self, idx: usize, p: Point) {
        let old = self.points[idx];
        self.grid.remove(idx, &old);
        self.points[idx] = p;
        self.grid.insert(idx, &p);
    }
}

/// Smallest distance over unordered pairs; `+∞` with fewer than two points.
pub fn pairwise_min_distance(config: &PointConfig) -> f64 {
    min_distance_of(config.points())
}

/// Sweep over x-sorted points, pruning on the x gap.
pub(crate) fn min_distance_of(points: &[Point]) -> f64 {
    let mut sorted: Vec<Point> = points.to_vec();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut best = f64::INFINITY;
    for i in 0..sorted.len() {
        for j in (i + 1)..sorted.len() {
            if sorted[j][0] - sorted[i][0] >= best {
                break;
            }
            best = best.min(distance(&sorted[i], &sorted[j]));
        }
    }
    best
}

pub fn window_volume(w: &Window) -> f64 {
    w.volume()
}

/// Unit box `k + [0,1]^d` clipped to a window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitCell {
    pub index: [i64; 2],
    pub bounds: Window,
}

/// Partition of a window into translates of the unit cell `Δ_0 = [0,1]^d`.
/// For `Λ_n = [-n, n]^d` the indices are exactly `{-n, …, n-1}^d`.
#[derive(Clone, Debug)]
pub struct CellPartition {
    window: Window,
    cells: Vec<UnitCell>,
    first: [i64; 2],
    last: [i64; 2],
}

impl CellPartition {
    pub fn unit(window: &Window) -> Self {
        let dim = window.dim();
        let mut first = [0i64; 2];
        let mut last = [0i64; 2];
        for a in 0..dim {
            first[a] = window.lower()[a].floor() as i64;
            last[a] = (window.upper()[a].ceil() as i64 - 1).max(first[a]);
        }
        let mut cells = Vec::new();
        for ky in first[1]..=last[1] {
            for kx in first[0]..=last[0] {
                let k = [kx, ky];
                let lo: Vec<f64> = (0..dim).map(|a| k[a] as f64).collect();
                let hi: Vec<f64> = (0..dim).map(|a| (k[a] + 1) as f64).collect();
                let unit = Window::new(&lo, &hi).expect("unit box");
                if let Some(bounds) = unit.intersect(window) {
                    cells.push(UnitCell { index: k, bounds });
                }
            }
        }
        CellPartition {
            window: *window,
            cells,
            first,
            last,
        }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn cells(&self) -> &[UnitCell] {
        &self.cells
    }

    /// Index of the cell owning `p` (half-open `[k, k+1)`, with the top face
    /// of the window assigned to the last cell). `None` outside the window.
    pub fn cell_of(&self, p: &Point) -> Option<[i64; 2]> {
        if !self.window.contains(p) {
            return None;
        }
        let mut k = [0i64; 2];
        for a in 0..self.window.dim() {
            k[a] = (p[a].floor() as i64).clamp(self.first[a], self.last[a]);
        }
        Some(k)
    }

    pub fn find(&self, index: [i64; 2]) -> Option<&UnitCell> {
        self.cells.iter().find(|c| c.index == index)
    }
}
