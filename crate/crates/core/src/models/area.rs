//! Area of a union of equal discs, optionally clipped to a box.
//!
//! The exact method integrates `½ (x dy − y dx)` along the boundary of
//! `(⋃ B(c_i, r)) ∩ box`: circle arcs that lie inside the box and outside
//! every other disc, plus the pieces of the box edges covered by the union.
//! A column-wise quadrature is kept alongside as an independent reference.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use super::ModelError;
use crate::geometry::{distance, Point, Window};

/// `λ²(⋃_{x} B(x, r) ∩ region)`.
pub fn disc_union_area(points: &[Point], r: f64, region: &Window) -> Result<f64, ModelError> {
    if region.dim() != 2 {
        return Err(ModelError::UnsupportedDimension(region.dim()));
    }
    Ok(union_area(points, r, Some(region)))
}

/// `λ²(⋃_{x} B(x, r))` over the whole plane.
pub fn disc_union_area_unbounded(points: &[Point], r: f64) -> f64 {
    union_area(points, r, None)
}

/// `λ²(B(x, r) \ ⋃_{y} B(y, r))`; `others` may contain far-away points.
pub fn uncovered_disc_area(x: &Point, others: &[Point], r: f64) -> f64 {
    if !(r > 0.0) {
        return 0.0;
    }
    let near: Vec<Point> = others
        .iter()
        .filter(|y| distance(x, y) < 2.0 * r)
        .copied()
        .collect();
    if near.is_empty() {
        return PI * r * r;
    }
    if near.iter().any(|y| y == x) {
        return 0.0;
    }
    let mut with_x = near.clone();
    with_x.push(*x);
    let gain = union_area(&with_x, r, None) - union_area(&near, r, None);
    gain.clamp(0.0, PI * r * r)
}

/// Column-wise reference quadrature: midpoint rule in `x` with step at most
/// `step`, exact union of chord intervals in `y`.
pub fn quadrature_union_area(points: &[Point], r: f64, region: &Window, step: f64) -> f64 {
    let (lo, hi) = (region.lower(), region.upper());
    let (mut x0, mut x1) = (lo[0], hi[0]);
    if let (Some(min_x), Some(max_x)) = (
        points.iter().map(|p| p[0] - r).reduce(f64::min),
        points.iter().map(|p| p[0] + r).reduce(f64::max),
    ) {
        x0 = x0.max(min_x);
        x1 = x1.min(max_x);
    }
    if !(x1 > x0) || !(r > 0.0) {
        return 0.0;
    }
    let n = ((x1 - x0) / step).ceil().max(1.0) as usize;
    let h = (x1 - x0) / n as f64;
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut total = 0.0;
    for i in 0..n {
        let x = x0 + (i as f64 + 0.5) * h;
        intervals.clear();
        for p in points {
            let dx = x - p[0];
            let s2 = r * r - dx * dx;
            if s2 > 0.0 {
                let s = s2.sqrt();
                let a = (p[1] - s).max(lo[1]);
                let b = (p[1] + s).min(hi[1]);
                if b > a {
                    intervals.push((a, b));
                }
            }
        }
        intervals.sort_by(|u, v| u.0.total_cmp(&v.0));
        let mut covered = 0.0;
        let mut cur: Option<(f64, f64)> = None;
        for &(a, b) in &intervals {
            cur = match cur {
                Some((ca, cb)) if a <= cb => Some((ca, cb.max(b))),
                Some((ca, cb)) => {
                    covered += cb - ca;
                    Some((a, b))
                }
                None => Some((a, b)),
            };
        }
        if let Some((ca, cb)) = cur {
            covered += cb - ca;
        }
        total += covered * h;
    }
    total
}

struct Buckets {
    size: f64,
    map: HashMap<(i64, i64), Vec<usize>>,
}

impl Buckets {
    fn new(centers: &[Point], size: f64) -> Self {
        let mut map: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, c) in centers.iter().enumerate() {
            map.entry(Self::key(c, size)).or_default().push(i);
        }
        Buckets { size, map }
    }

    fn key(c: &Point, size: f64) -> (i64, i64) {
        ((c[0] / size).floor() as i64, (c[1] / size).floor() as i64)
    }

    /// Indices in the 3×3 block of buckets around `c`, in ascending order.
    fn around(&self, c: &Point) -> Vec<usize> {
        let (kx, ky) = Self::key(c, self.size);
        let mut out = Vec::new();
        for dy in -1..=1 {
            for dx in -1..=1 {
                if let Some(v) = self.map.get(&(kx + dx, ky + dy)) {
                    out.extend_from_slice(v);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

fn normalize_angle(a: f64) -> f64 {
    let t = a.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// `½ ∫ (x dy − y dx)` over the CCW arc of the circle `(c, r)` from `a` to `b`.
fn arc_term(c: &Point, r: f64, a: f64, b: f64) -> f64 {
    0.5 * (r * c[0] * (b.sin() - a.sin()) - r * c[1] * (b.cos() - a.cos()) + r * r * (b - a))
}

pub(crate) fn union_area(points: &[Point], r: f64, clip: Option<&Window>) -> f64 {
    if !(r > 0.0) || points.is_empty() {
        return 0.0;
    }
    // Translate so that coordinates are small; the area is invariant.
    let origin = match clip {
        Some(w) => [
            0.5 * (w.lower()[0] + w.upper()[0]),
            0.5 * (w.lower()[1] + w.upper()[1]),
        ],
        None => points[0],
    };
    let rect = clip.map(|w| {
        [
            w.lower()[0] - origin[0],
            w.upper()[0] - origin[0],
            w.lower()[1] - origin[1],
            w.upper()[1] - origin[1],
        ]
    });
    let mut centers: Vec<Point> = points
        .iter()
        .map(|p| [p[0] - origin[0], p[1] - origin[1]])
        .filter(|c| match rect {
            Some([x0, x1, y0, y1]) => {
                let dx = (x0 - c[0]).max(0.0).max(c[0] - x1);
                let dy = (y0 - c[1]).max(0.0).max(c[1] - y1);
                dx * dx + dy * dy < r * r
            }
            None => true,
        })
        .collect();
    centers.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    centers.dedup();
    if centers.is_empty() {
        return 0.0;
    }

    let buckets = Buckets::new(&centers, 2.0 * r);
    let inside_rect = |p: &Point| match rect {
        Some([x0, x1, y0, y1]) => p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1,
        None => true,
    };

    let mut total = 0.0;
    let mut angles: Vec<f64> = Vec::new();
    let mut near: Vec<usize> = Vec::new();
    for (i, c) in centers.iter().enumerate() {
        angles.clear();
        near.clear();
        for j in buckets.around(c) {
            if j == i {
                continue;
            }
            let d = distance(c, &centers[j]);
            if d < 2.0 * r {
                near.push(j);
                let base = (centers[j][1] - c[1]).atan2(centers[j][0] - c[0]);
                let half = (d / (2.0 * r)).min(1.0).acos();
                angles.push(normalize_angle(base - half));
                angles.push(normalize_angle(base + half));
            }
        }
        if let Some([x0, x1, y0, y1]) = rect {
            for xv in [x0, x1] {
                let u = (xv - c[0]) / r;
                if u.abs() < 1.0 {
                    let t = u.acos();
                    angles.push(normalize_angle(t));
                    angles.push(normalize_angle(-t));
                }
            }
            for yv in [y0, y1] {
                let v = (yv - c[1]) / r;
                if v.abs() < 1.0 {
                    let t = v.asin();
                    angles.push(normalize_angle(t));
                    angles.push(normalize_angle(PI - t));
                }
            }
        }
        let visible = |m: f64| {
            let p = [c[0] + r * m.cos(), c[1] + r * m.sin()];
            inside_rect(&p) && near.iter().all(|&j| distance(&p, &centers[j]) >= r)
        };
        if angles.is_empty() {
            if visible(0.0) {
                total += arc_term(c, r, 0.0, TAU);
            }
            continue;
        }
        angles.sort_by(f64::total_cmp);
        let k = angles.len();
        for s in 0..k {
            let a = angles[s];
            let b = if s + 1 < k { angles[s + 1] } else { angles[0] + TAU };
            if b - a <= 0.0 {
                continue;
            }
            if visible(0.5 * (a + b)) {
                total += arc_term(c, r, a, b);
            }
        }
    }

    if let Some([x0, x1, y0, y1]) = rect {
        let corners = [[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
        for e in 0..4 {
            let p = corners[e];
            let q = corners[(e + 1) % 4];
            total += covered_edge_term(&centers, r, &p, &q);
        }
    }
    total
}

/// Contribution of the parts of segment `p → q` (axis-aligned) covered by the union.
fn covered_edge_term(centers: &[Point], r: f64, p: &Point, q: &Point) -> f64 {
    let horizontal = p[1] == q[1];
    let (line, along) = if horizontal { (1, 0) } else { (0, 1) };
    let level = p[line];
    let (start, end) = (p[along], q[along]);
    let crossing: Vec<&Point> = centers
        .iter()
        .filter(|c| (c[line] - level).abs() < r)
        .collect();
    if crossing.is_empty() {
        return 0.0;
    }
    let mut ts = vec![0.0, 1.0];
    for c in &crossing {
        let off = c[line] - level;
        let s = (r * r - off * off).sqrt();
        for v in [c[along] - s, c[along] + s] {
            let t = (v - start) / (end - start);
            if t > 0.0 && t < 1.0 {
                ts.push(t);
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    let point_at = |t: f64| {
        let mut m = [0.0; 2];
        m[line] = level;
        m[along] = start + t * (end - start);
        m
    };
    let mut sum = 0.0;
    for w in ts.windows(2) {
        let (ta, tb) = (w[0], w[1]);
        if tb <= ta {
            continue;
        }
        let mid = point_at(0.5 * (ta + tb));
        if crossing.iter().any(|c| distance(&mid, c) < r) {
            let a = point_at(ta);
            let b = point_at(tb);
            sum += 0.5 * (a[0] * b[1] - a[1] * b[0]);
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn big() -> Window {
        Window::rect(-10.0, 10.0, -10.0, 10.0).unwrap()
    }

    /// Lens area of two radius-`r` discs at distance `t`.
    fn lens(t: f64, r: f64) -> f64 {
        2.0 * r * r * (t / (2.0 * r)).acos() - 0.5 * t * (4.0 * r * r - t * t).sqrt()
    }

    #[test]
    fn single_and_coincident_discs() {
        let a = disc_union_area(&[[0.0, 0.0]], 1.5, &big()).unwrap();
        assert!((a - PI * 2.25).abs() < 1e-12);
        let a = disc_union_area(&[[1.0, 1.0], [1.0, 1.0]], 0.5, &big()).unwrap();
        assert!((a - PI * 0.25).abs() < 1e-12);
    }

    #[test]
    fn two_discs_at_distance_r() {
        let r = 0.8;
        let exact = 2.0 * PI * r * r - lens(r, r);
        let a = disc_union_area(&[[0.0, 0.0], [r, 0.0]], r, &big()).unwrap();
        let oracle = quadrature_union_area(&[[0.0, 0.0], [r, 0.0]], r, &big(), 1e-4);
        assert!((a - exact).abs() < 1e-12);
        assert!((a - oracle).abs() / exact < 1e-6);
    }

    #[test]
    fn half_disc_on_an_edge() {
        let w = Window::rect(0.0, 4.0, 0.0, 4.0).unwrap();
        let a = disc_union_area(&[[0.0, 2.0]], 1.0, &w).unwrap();
        assert!((a - 0.5 * PI).abs() < 1e-12);
        // quarter disc in a corner
        let a = disc_union_area(&[[4.0, 4.0]], 1.0, &w).unwrap();
        assert!((a - 0.25 * PI).abs() < 1e-12);
    }

    #[test]
    fn disc_covering_whole_region() {
        let w = Window::rect(0.0, 1.0, 0.0, 1.0).unwrap();
        let a = disc_union_area(&[[0.5, 0.5]], 5.0, &w).unwrap();
        assert!((a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncovered_area_cases() {
        let r = 0.5;
        assert!((uncovered_disc_area(&[0.0, 0.0], &[], r) - PI * r * r).abs() < 1e-15);
        assert_eq!(uncovered_disc_area(&[0.0, 0.0], &[[0.0, 0.0]], r), 0.0);
        let t = 0.3;
        let got = uncovered_disc_area(&[0.0, 0.0], &[[t, 0.0], [5.0, 5.0]], r);
        assert!((got - (PI * r * r - lens(t, r))).abs() < 1e-12);
    }

    #[test]
    fn lens_matches_quadrature_oracle() {
        let r = 0.4;
        for t in [0.05, 0.3, 0.6, 0.79] {
            let w = Window::rect(-1.0, 2.0, -1.0, 1.0).unwrap();
            let pair = [[0.0, 0.0], [t, 0.0]];
            let quad_lens = quadrature_union_area(&[[0.0, 0.0]], r, &w, 1e-4) * 2.0
                - quadrature_union_area(&pair, r, &w, 1e-4);
            let got = uncovered_disc_area(&[0.0, 0.0], &[[t, 0.0]], r);
            assert!((got - (PI * r * r - quad_lens)).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn random_instances_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let w = Window::rect(0.0, 2.0, 0.0, 1.5).unwrap();
            let r = rng.random_range(0.1..0.6);
            let n = rng.random_range(2..=10);
            let pts: Vec<Point> = (0..n)
                .map(|_| [rng.random_range(-0.3..2.3), rng.random_range(-0.3..1.8)])
                .collect();
            let exact = disc_union_area(&pts, r, &w).unwrap();
            let oracle = quadrature_union_area(&pts, r, &w, 1e-4);
            assert!(
                (exact - oracle).abs() <= 1e-3 * oracle.max(1e-9),
                "{exact} vs {oracle}"
            );
        }
    }

    #[test]
    fn additivity_over_a_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let pts: Vec<Point> = (0..30)
            .map(|_| [rng.random_range(0.0..3.0), rng.random_range(0.0..3.0)])
            .collect();
        let whole = Window::rect(0.0, 3.0, 0.0, 3.0).unwrap();
        let left = Window::rect(0.0, 1.3, 0.0, 3.0).unwrap();
        let right = Window::rect(1.3, 3.0, 0.0, 3.0).unwrap();
        let a = disc_union_area(&pts, 0.35, &whole).unwrap();
        let b = disc_union_area(&pts, 0.35, &left).unwrap()
            + disc_union_area(&pts, 0.35, &right).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn rejects_one_dimensional_region() {
        let w = Window::interval(0.0, 1.0).unwrap();
        assert!(matches!(
            disc_union_area(&[[0.5, 0.0]], 0.1, &w),
            Err(ModelError::UnsupportedDimension(1))
        ));
    }
}
