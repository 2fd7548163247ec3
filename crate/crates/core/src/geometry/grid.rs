use super::{Point, Window};

/// Upper bound on the number of cells a grid will allocate.
const MAX_CELLS: usize = 1 << 22;

/// Uniform bucket grid over a window. Cell widths are `side / count` per axis,
/// so they never fall below the requested cell size and tile the window
/// exactly (needed for periodic wrapping).
#[derive(Clone, Debug)]
pub(crate) struct CellGrid {
    origin: [f64; 2],
    side: [f64; 2],
    width: [f64; 2],
    counts: [usize; 2],
    cells: Vec<Vec<usize>>,
}

impl CellGrid {
    pub(crate) fn new(window: &Window, cell_size: f64) -> Self {
        let dim = window.dim();
        let mut counts = [1usize; 2];
        let mut side = [1.0f64; 2];
        for axis in 0..dim {
            side[axis] = window.side(axis);
            let n = if cell_size > 0.0 && cell_size.is_finite() {
                (side[axis] / cell_size).floor().max(1.0)
            } else {
                1.0
            };
            counts[axis] = n.min(1e7) as usize;
        }
        // Coarsen uniformly until the allocation is reasonable.
        while counts[0] * counts[1] > MAX_CELLS {
            counts[0] = (counts[0] / 2).max(1);
            counts[1] = (counts[1] / 2).max(1);
        }
        let width = [side[0] / counts[0] as f64, side[1] / counts[1] as f64];
        CellGrid {
            origin: window.lower(),
            side,
            width,
            counts,
            cells: vec![Vec::new(); counts[0] * counts[1]],
        }
    }

    pub(crate) fn cell_width(&self) -> f64 {
        self.width[0].min(self.width[1])
    }

    fn axis_index(&self, axis: usize, coord: f64) -> usize {
        let k = ((coord - self.origin[axis]) / self.width[axis]).floor();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.counts[axis] - 1)
        }
    }

    fn slot(&self, p: &Point) -> usize {
        self.axis_index(0, p[0]) + self.counts[0] * self.axis_index(1, p[1])
    }

    pub(crate) fn insert(&mut self, idx: usize, p: &Point) {
        let s = self.slot(p);
        self.cells[s].push(idx);
    }

    pub(crate) fn remove(&mut self, idx: usize, p: &Point) {
        let s = self.slot(p);
        let cell = &mut self.cells[s];
        if let Some(pos) = cell.iter().position(|&j| j == idx) {
            cell.swap_remove(pos);
        }
    }

    /// Renames point `from` (stored at `p`) to `to`.
    pub(crate) fn relabel(&mut self, from: usize, to: usize, p: &Point) {
        let s = self.slot(p);
        if let Some(j) = self.cells[s].iter_mut().find(|j| **j == from) {
            *j = to;
        }
    }

    /// Calls `f` with every stored index whose cell may hold a point within
    /// `r` of `x`. Each index is visited at most once.
    pub(crate) fn for_each_candidate(
        &self,
        x: &Point,
        r: f64,
        periodic: bool,
        mut f: impl FnMut(usize),
    ) {
        let mut ranges: [(i64, i64); 2] = [(0, 0); 2];
        for axis in 0..2 {
            let n = self.counts[axis] as i64;
            if n == 1 {
                ranges[axis] = (0, 0);
                continue;
            }
            let reach = if r.is_finite() {
                (r / self.width[axis]).ceil() as i64
            } else {
                n
            };
            let c = if periodic {
                let rel = (x[axis] - self.origin[axis]).rem_euclid(self.side[axis]);
                ((rel / self.width[axis]).floor() as i64).clamp(0, n - 1)
            } else {
                self.axis_index(axis, x[axis]) as i64
            };
            if periodic {
                if 2 * reach + 1 >= n {
                    ranges[axis] = (0, n - 1);
                } else {
                    ranges[axis] = (c - reach, c + reach);
                }
            } else {
                ranges[axis] = ((c - reach).max(0), (c + reach).min(n - 1));
            }
        }
        let (nx, ny) = (self.counts[0] as i64, self.counts[1] as i64);
        for gy in ranges[1].0..=ranges[1].1 {
            let iy = gy.rem_euclid(ny) as usize;
            for gx in ranges[0].0..=ranges[0].1 {
                let ix = gx.rem_euclid(nx) as usize;
                for &j in &self.cells[ix + self.counts[0] * iy] {
                    f(j);
                }
            }
        }
    }
}
