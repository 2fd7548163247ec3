//! Sufficient summaries of a configuration, so that energies at many
//! parameter values can be evaluated without touching the points again.

use crate::geometry::{Point, PointConfig};

use super::area::{union_area, uncovered_disc_area};
use super::potential::LJ_NEAR_ZERO;
use super::{GibbsModel, Interaction};

#[derive(Clone, Debug, PartialEq)]
pub enum Summary {
    /// Point count plus every pair distance up to `reach`, sorted.
    Pairs {
        count: usize,
        dists: Vec<f64>,
        min_dist: f64,
        reach: f64,
    },
    /// Point count plus the union area of radius-`radius` discs.
    Area {
        count: usize,
        radius: f64,
        area: f64,
        min_dist: f64,
    },
}

impl Summary {
    /// Whole-configuration summary (free boundary). `reach` must cover the
    /// interaction range of every pairwise model it will be evaluated at;
    /// `radius` is the disc radius for area-interaction.
    pub fn of(model: &GibbsModel, config: &PointConfig, reach: f64) -> Summary {
        let min_dist = crate::geometry::pairwise_min_distance(config);
        match model.interaction() {
            Interaction::Area(a) => Summary::Area {
                count: config.len(),
                radius: a.radius,
                area: union_area(config.points(), a.radius, None),
                min_dist,
            },
            _ => {
                let reach = reach.max(model.interaction_range());
                let mut dists = Vec::new();
                if reach > 0.0 {
                    for (i, x) in config.points().iter().enumerate() {
                        config.for_each_neighbor(x, reach, None, false, |j, d| {
                            if j > i {
                                dists.push(d);
                            }
                        });
                    }
                }
                dists.sort_by(f64::total_cmp);
                Summary::Pairs {
                    count: config.len(),
                    dists,
                    min_dist,
                    reach,
                }
            }
        }
    }

    /// Summary of the local energy `h(x | ω \ exclude)`.
    pub fn local(
        model: &GibbsModel,
        x: &Point,
        config: &PointConfig,
        exclude: Option<usize>,
        reach: f64,
    ) -> Summary {
        match model.interaction() {
            Interaction::Area(a) => {
                let mut near = Vec::new();
                let mut min_dist = f64::INFINITY;
                config.for_each_neighbor(x, 2.0 * a.radius, exclude, false, |j, d| {
                    near.push(config.points()[j]);
                    min_dist = min_dist.min(d);
                });
                Summary::Area {
                    count: 1,
                    radius: a.radius,
                    area: uncovered_disc_area(x, &near, a.radius),
                    min_dist,
                }
            }
            _ => {
                let reach = reach.max(model.interaction_range());
                let mut dists = Vec::new();
                if reach > 0.0 {
                    config.for_each_neighbor(x, reach, exclude, false, |_, d| dists.push(d));
                }
                dists.sort_by(f64::total_cmp);
                let min_dist = dists.first().copied().unwrap_or(f64::INFINITY);
                Summary::Pairs {
                    count: 1,
                    dists,
                    min_dist,
                    reach,
                }
            }
        }
    }

    pub fn count(&self) -> usize {
        match self {
            Summary::Pairs { count, .. } | Summary::Area { count, .. } => *count,
        }
    }

    pub fn min_dist(&self) -> f64 {
        match self {
            Summary::Pairs { min_dist, .. } | Summary::Area { min_dist, .. } => *min_dist,
        }
    }

    /// Whether the support indicator for `model` is zero.
    pub fn violates_support(&self, model: &GibbsModel) -> bool {
        let m = self.min_dist();
        m < model.delta() || (matches!(model.interaction(), Interaction::LennardJones(_)) && m < LJ_NEAR_ZERO)
    }

    /// Derivative of the energy in each linear parameter (see
    /// [`GibbsModel::linear_mask`]), so that the energy is their dot product
    /// with the linear parameters. At an exact breakpoint tie the pair is
    /// attributed to whichever side attains the minimum.
    ///
    /// Panics if the summary does not match the model's shape.
    pub fn linear_statistics(&self, model: &GibbsModel) -> Vec<f64> {
        match (self, model.interaction()) {
            (Summary::Area { count, radius, area, .. }, Interaction::Area(a)) => {
                assert!(*radius == a.radius, "summary radius {radius} != model radius {}", a.radius);
                vec![*count as f64, *area]
            }
            (Summary::Pairs { count, dists, reach, .. }, Interaction::Pair(spec)) => {
                assert!(
                    spec.range() <= *reach,
                    "summary reach {reach} below model range {}",
                    spec.range()
                );
                let pieces = spec.pieces();
                let breaks = spec.breakpoints();
                let q = pieces.len();
                let mut stats = vec![0.0; 1 + q];
                stats[0] = *count as f64;
                let constant = pieces.iter().all(|p| p.decay == 0.0);
                if constant {
                    let mut prev_le = 0usize;
                    for k in 0..q {
                        let lt = dists.partition_point(|&d| d < breaks[k]);
                        let le = dists.partition_point(|&d| d <= breaks[k]);
                        stats[1 + k] += lt.saturating_sub(prev_le) as f64;
                        let ties = (le - lt) as f64;
                        if ties > 0.0 {
                            let next = pieces.get(k + 1).map_or(0.0, |p| p.beta);
                            if pieces[k].beta <= next {
                                stats[1 + k] += ties;
                            } else if k + 1 < q {
                                stats[2 + k] += ties;
                            }
                        }
                        prev_le = le;
                    }
                } else {
                    for &d in dists.iter() {
                        let k = breaks.partition_point(|&r| r < d);
                        if k == q {
                            break;
                        }
                        let mut owner = k;
                        let mut g = pieces[k].shape(d);
                        if breaks[k] == d {
                            let here = pieces[k].eval(d);
                            let next = pieces.get(k + 1).map_or(0.0, |p| p.eval(d));
                            if next < here {
                                owner = k + 1;
                                g = pieces.get(k + 1).map_or(0.0, |p| p.shape(d));
                            }
                        }
                        if owner < q {
                            stats[1 + owner] += g;
                        }
                    }
                }
                stats
            }
            (Summary::Pairs { count, dists, reach, .. }, Interaction::LennardJones(lj)) => {
                assert!(lj.cutoff <= *reach, "summary reach {reach} below cutoff {}", lj.cutoff);
                let end = dists.partition_point(|&d| d < lj.cutoff);
                let (mut rep, mut att) = (0.0, 0.0);
                for &d in &dists[..end] {
                    rep += d.powf(-lj.n);
                    att -= d.powf(-lj.m);
                }
                vec![*count as f64, rep, att]
            }
            _ => panic!("summary kind does not match model {model}"),
        }
    }

    /// Energy of the summarized configuration under `model`: `+∞` outside the
    /// support, otherwise the dot product of linear parameters and statistics.
    pub fn energy(&self, model: &GibbsModel) -> f64 {
        if self.violates_support(model) {
            return f64::INFINITY;
        }
        let stats = self.linear_statistics(model);
        let theta = linear_params(model);
        theta.iter().zip(&stats).map(|(t, s)| t * s).sum()
    }
}

/// The linear parameters of `model`, in the order of its linear mask.
pub(crate) fn linear_params(model: &GibbsModel) -> Vec<f64> {
    model
        .params()
        .into_iter()
        .zip(model.linear_mask())
        .filter_map(|(v, lin)| lin.then_some(v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;
    use crate::models::{hamiltonian, local_energy_with, LennardJones, Piece};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn models() -> Vec<GibbsModel> {
        let lj = LennardJones::new(0.001, 0.01, 12.0, 6.0, 0.5).unwrap();
        vec![
            GibbsModel::strauss(0.3, 0.7, 0.2).unwrap(),
            GibbsModel::hardcore_strauss(0.03, 0.3, -0.7, 0.2).unwrap(),
            GibbsModel::piecewise(
                0.02,
                0.1,
                vec![Piece::constant(1.0), Piece::constant(-0.4)],
                vec![0.1, 0.3],
            )
            .unwrap(),
            GibbsModel::piecewise(
                0.0,
                0.1,
                vec![Piece { beta: 1.0, decay: 3.0 }, Piece { beta: 0.5, decay: 1.0 }],
                vec![0.1, 0.3],
            )
            .unwrap(),
            GibbsModel::lennard_jones(0.2, lj).unwrap(),
            GibbsModel::area_interaction(0.1, 2.0, 0.15).unwrap(),
        ]
    }

    #[test]
    fn summary_energy_matches_hamiltonian() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = Window::rect(0.0, 3.0, 0.0, 3.0).unwrap();
        for m in models() {
            for _ in 0..20 {
                let pts = (0..40).map(|_| w.uniform_point(&mut rng)).collect();
                let c = PointConfig::new(w, pts).unwrap();
                let h = hamiltonian(&m, &c, &w);
                let s = Summary::of(&m, &c, 0.0).energy(&m);
                if h.is_finite() {
                    assert!((h - s).abs() < 1e-9 * (1.0 + h.abs()), "{m}: {h} vs {s}");
                } else {
                    assert_eq!(s, h);
                }
                let x = w.uniform_point(&mut rng);
                let hl = local_energy_with(&m, &x, &c, Some(0), false);
                let sl = Summary::local(&m, &x, &c, Some(0), 0.0).energy(&m);
                if hl.is_finite() {
                    assert!((hl - sl).abs() < 1e-9 * (1.0 + hl.abs()), "{m}: {hl} vs {sl}");
                } else {
                    assert_eq!(sl, hl);
                }
            }
        }
    }

    #[test]
    fn ties_follow_the_breakpoint_convention() {
        let w = Window::rect(0.0, 2.0, 0.0, 2.0).unwrap();
        let c = PointConfig::new(w, vec![[0.5, 0.5], [0.75, 0.5]]).unwrap();
        for beta in [0.6, -0.6] {
            let m = GibbsModel::hardcore_strauss(0.01, 0.0, beta, 0.25).unwrap();
            let s = Summary::of(&m, &c, 1.0);
            assert_eq!(s.energy(&m), hamiltonian(&m, &c, &w));
        }
    }

    #[test]
    fn reach_covers_other_ranges() {
        let w = Window::rect(0.0, 2.0, 0.0, 2.0).unwrap();
        let c = PointConfig::new(w, vec![[0.5, 0.5], [0.8, 0.5], [1.5, 1.5]]).unwrap();
        let m = GibbsModel::strauss(0.2, 0.5, 0.1).unwrap();
        let s = Summary::of(&m, &c, 0.5);
        let wider = m.with_param("range", 0.4).unwrap();
        assert_eq!(s.energy(&wider), hamiltonian(&wider, &c, &w));
    }
}
