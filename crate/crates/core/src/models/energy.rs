use crate::geometry::{CellPartition, Point, PointConfig, Window};

use super::area::{union_area, uncovered_disc_area};
use super::{AreaInteraction, GibbsModel, Interaction};

/// `true` iff no pair of points is closer than `delta`.
pub fn support_indicator(delta: f64, config: &PointConfig) -> bool {
    if delta <= 0.0 || config.len() < 2 {
        return true;
    }
    let mut ok = true;
    for (i, x) in config.points().iter().enumerate() {
        config.for_each_neighbor(x, delta, Some(i), false, |_, d| {
            if d < delta {
                ok = false;
            }
        });
        if !ok {
            break;
        }
    }
    ok
}

/// Free-boundary Hamiltonian `H_Λ(ω_Λ)`: points of `config` outside `w` are
/// ignored.
pub fn hamiltonian(model: &GibbsModel, config: &PointConfig, w: &Window) -> f64 {
    let inside = |p: &Point| w.contains(p);
    match model.interaction() {
        Interaction::Area(a) => {
            let pts: Vec<Point> = config.points().iter().copied().filter(inside).collect();
            area_energy(model.z(), a, &pts, &[])
        }
        _ => pair_hamiltonian(model, config, false, |i| inside(&config.points()[i]), |_| false),
    }
}

/// `H_Λ(ω)` with the points of `config` outside `w` acting as a boundary
/// condition. Equals [`hamiltonian`] when `config` lies inside `w`.
pub fn hamiltonian_conditional(model: &GibbsModel, config: &PointConfig, w: &Window) -> f64 {
    let pts = config.points();
    match model.interaction() {
        Interaction::Area(a) => {
            let inner: Vec<Point> = pts.iter().copied().filter(|p| w.contains(p)).collect();
            let reach = w.expand(2.0 * a.radius);
            let outer: Vec<Point> = pts
                .iter()
                .copied()
                .filter(|p| !w.contains(p) && reach.contains(p))
                .collect();
            area_energy(model.z(), a, &inner, &outer)
        }
        _ => pair_hamiltonian(
            model,
            config,
            false,
            |i| w.contains(&pts[i]),
            |j| !w.contains(&pts[j]),
        ),
    }
}

/// Hamiltonian on the torus built from `config.window()`. Pairwise kinds only;
/// returns `NaN` for area-interaction.
pub fn hamiltonian_periodic(model: &GibbsModel, config: &PointConfig) -> f64 {
    if !model.is_pairwise() {
        return f64::NAN;
    }
    pair_hamiltonian(model, config, true, |_| true, |_| false)
}

/// `z N + β (A(inner ∪ outer) - A(outer))`.
fn area_energy(z: f64, a: &AreaInteraction, inner: &[Point], outer: &[Point]) -> f64 {
    let mut h = z * inner.len() as f64;
    if a.beta != 0.0 && a.radius > 0.0 && !inner.is_empty() {
        let mut all = inner.to_vec();
        all.extend_from_slice(outer);
        let covered = union_area(&all, a.radius, None) - union_area(outer, a.radius, None);
        h += a.beta * covered;
    }
    h
}

/// `z·#{i: counted(i)} + Σ φ` over pairs where both are counted (once) or one
/// is counted and the other is `extra`.
fn pair_hamiltonian(
    model: &GibbsModel,
    config: &PointConfig,
    periodic: bool,
    counted: impl Fn(usize) -> bool,
    extra: impl Fn(usize) -> bool,
) -> f64 {
    let range = model.interaction_range();
    let mut n = 0usize;
    let mut pairs = 0.0;
    for (i, x) in config.points().iter().enumerate() {
        if !counted(i) {
            continue;
        }
        n += 1;
        if range <= 0.0 {
            continue;
        }
        config.for_each_neighbor(x, range, Some(i), periodic, |j, d| {
            if (j > i && counted(j)) || extra(j) {
                pairs += model.pair_energy(d);
            }
        });
    }
    model.z() * n as f64 + pairs
}

/// Local energy `h(x|ω) = H(ω ∪ x) - H(ω)` against every point of `config`.
pub fn local_energy(model: &GibbsModel, x: &Point, config: &PointConfig) -> f64 {
    local_energy_with(model, x, config, None, false)
}

/// [`local_energy`] skipping the point with index `exclude` (so `h(x|ω\x)`
/// for a member of `ω`), optionally on the torus. Area-interaction ignores
/// `periodic`.
pub fn local_energy_with(
    model: &GibbsModel,
    x: &Point,
    config: &PointConfig,
    exclude: Option<usize>,
    periodic: bool,
) -> f64 {
    match model.interaction() {
        Interaction::Area(a) => {
            let mut h = model.z();
            if a.beta != 0.0 && a.radius > 0.0 {
                let mut near = Vec::new();
                config.for_each_neighbor(x, 2.0 * a.radius, exclude, false, |j, _| {
                    near.push(config.points()[j]);
                });
                h += a.beta * uncovered_disc_area(x, &near, a.radius);
            }
            h
        }
        _ => {
            let range = model.interaction_range();
            let mut h = model.z();
            if range > 0.0 {
                config.for_each_neighbor(x, range, exclude, periodic, |_, d| {
                    h += model.pair_energy(d);
                });
            }
            h
        }
    }
}

/// Energy attributed to cell `k` of `partition`: `z N_cell` plus the pairs
/// inside the cell plus half of the pairs leaving it (pairwise kinds), or
/// `z N_cell + β·area(cell ∩ ⋃ B(x,R))` (area-interaction). Points outside
/// the partition's window count as exterior.
pub fn mean_energy_cell(
    model: &GibbsModel,
    config: &PointConfig,
    partition: &CellPartition,
    k: [i64; 2],
) -> f64 {
    let Some(cell) = partition.find(k) else {
        return 0.0;
    };
    let pts = config.points();
    let in_cell = |p: &Point| partition.cell_of(p) == Some(k);
    match model.interaction() {
        Interaction::Area(a) => {
            let n = pts.iter().filter(|p| in_cell(p)).count();
            let mut h = model.z() * n as f64;
            if a.beta != 0.0 && a.radius > 0.0 {
                let reach = cell.bounds.expand(a.radius);
                let near: Vec<Point> = pts.iter().copied().filter(|p| reach.contains(p)).collect();
                h += a.beta * union_area(&near, a.radius, Some(&cell.bounds));
            }
            h
        }
        _ => {
            let range = model.interaction_range();
            let mut n = 0usize;
            let mut pairs = 0.0;
            for (i, x) in pts.iter().enumerate() {
                if !in_cell(x) {
                    continue;
                }
                n += 1;
                if range <= 0.0 {
                    continue;
                }
                config.for_each_neighbor(x, range, Some(i), false, |j, d| {
                    if in_cell(&pts[j]) {
                        if j > i {
                            pairs += model.pair_energy(d);
                        }
                    } else {
                        pairs += 0.5 * model.pair_energy(d);
                    }
                });
            }
            model.z() * n as f64 + pairs
        }
    }
}

/// Boundary term making `Σ_k mean_energy_cell + boundary_energy` equal to
/// [`hamiltonian_conditional`] on `w`.
///
/// Pairwise: half the energy of pairs with one point in `w` and one outside.
/// Area: `β [area(w^c ∩ ⋃_all B) - area(⋃_ext B)]`.
pub fn boundary_energy(model: &GibbsModel, config: &PointConfig, w: &Window) -> f64 {
    let pts = config.points();
    match model.interaction() {
        Interaction::Area(a) => {
            if a.beta == 0.0 || a.radius == 0.0 {
                return 0.0;
            }
            let r = a.radius;
            let reach = w.expand(2.0 * r);
            let near: Vec<Point> = pts.iter().copied().filter(|p| reach.contains(p)).collect();
            let outer: Vec<Point> = near.iter().copied().filter(|p| !w.contains(p)).collect();
            let outside: f64 = ring_boxes(w, 3.0 * r)
                .iter()
                .map(|b| union_area(&near, r, Some(b)))
                .sum();
            a.beta * (outside - union_area(&outer, r, None))
        }
        _ => {
            let range = model.interaction_range();
            if range <= 0.0 {
                return 0.0;
            }
            let mut sum = 0.0;
            for (i, x) in pts.iter().enumerate() {
                if !w.contains(x) {
                    continue;
                }
                config.for_each_neighbor(x, range, Some(i), false, |j, d| {
                    if !w.contains(&pts[j]) {
                        sum += model.pair_energy(d);
                    }
                });
            }
            0.5 * sum
        }
    }
}

/// The eight boxes tiling `w.expand(m) \ w` (2-D).
fn ring_boxes(w: &Window, m: f64) -> Vec<Window> {
    let (lo, hi) = (w.lower(), w.upper());
    let xs = [lo[0] - m, lo[0], hi[0], hi[0] + m];
    let ys = [lo[1] - m, lo[1], hi[1], hi[1] + m];
    let mut out = Vec::with_capacity(8);
    for iy in 0..3 {
        for ix in 0..3 {
            if ix == 1 && iy == 1 {
                continue;
            }
            if let Ok(b) = Window::rect(xs[ix], xs[ix + 1], ys[iy], ys[iy + 1]) {
                out.push(b);
            }
        }
    }
    out
}
