use std::collections::BTreeMap;
use std::f64::consts::PI;

use proptest::prelude::*;

use gibbs_core::estimator::{hardcore_mle, minimize_in_box, NelderMeadOptions};
use gibbs_core::geometry::{distance, CellPartition, Point, PointConfig, Window};
use gibbs_core::models::{
    boundary_energy, disc_union_area, hamiltonian, hamiltonian_conditional, local_energy, mean_energy_cell,
    GibbsModel, Summary,
};

fn points(n: std::ops::Range<usize>, lo: f64, hi: f64) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((lo..hi, lo..hi).prop_map(|(x, y)| [x, y]), n)
}

fn config(pts: Vec<Point>, half: f64) -> PointConfig {
    PointConfig::new(Window::centered(half, 2).unwrap(), pts).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn summary_energy_is_the_hamiltonian(
        pts in points(0..60, -2.0, 2.0),
        z in -1.0f64..1.0, beta in 0.0f64..2.0, r in 0.02f64..0.6, r2 in 0.02f64..0.6,
    ) {
        let c = config(pts, 2.0);
        let m = GibbsModel::strauss(z, beta, r).unwrap();
        let s = Summary::of(&m, &c, 0.6);
        let other = m.with_param("range", r2).unwrap();
        prop_assert!(close(s.energy(&m), hamiltonian(&m, &c, c.window()), 1e-10));
        prop_assert!(close(s.energy(&other), hamiltonian(&other, &c, c.window()), 1e-10));
    }

    #[test]
    fn local_energy_is_a_hamiltonian_difference(
        pts in points(0..40, -2.0, 2.0),
        x in (-2.0f64..2.0, -2.0f64..2.0),
        area in any::<bool>(),
        z in -1.0f64..1.0, beta in 0.0f64..2.0, r in 0.05f64..0.5,
    ) {
        let m = if area {
            GibbsModel::area_interaction(z, beta, r)
        } else {
            GibbsModel::strauss(z, beta, r)
        }.unwrap();
        let c = config(pts.clone(), 2.0);
        let mut with = pts;
        with.push([x.0, x.1]);
        let cx = config(with, 2.0);
        let w = *c.window();
        let diff = hamiltonian(&m, &cx, &w) - hamiltonian(&m, &c, &w);
        prop_assert!(close(local_energy(&m, &[x.0, x.1], &c), diff, 1e-9));
    }

    #[test]
    fn cells_and_boundary_add_up(
        pts in points(0..80, -3.0, 3.0),
        area in any::<bool>(),
        z in -1.0f64..1.0, beta in 0.0f64..2.0, r in 0.05f64..0.6,
    ) {
        let m = if area {
            GibbsModel::area_interaction(z, beta, r)
        } else {
            GibbsModel::strauss(z, beta, r)
        }.unwrap();
        let c = config(pts, 3.0);
        let w = Window::centered(2.0, 2).unwrap();
        let part = CellPartition::unit(&w);
        let cells: f64 = part.cells().iter().map(|k| mean_energy_cell(&m, &c, &part, k.index)).sum();
        let total = cells + boundary_energy(&m, &c, &w);
        prop_assert!((total - hamiltonian_conditional(&m, &c, &w)).abs() < 1e-10);
    }

    #[test]
    fn hardcore_estimate_is_the_clamped_minimum_gap(
        pts in points(2..50, -2.0, 2.0),
        lo in 0.0f64..0.1, width in 0.0f64..1.0,
    ) {
        let c = config(pts.clone(), 2.0);
        let mut gap = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                gap = gap.min(distance(&pts[i], &pts[j]));
            }
        }
        let est = hardcore_mle(&c, (lo, lo + width));
        prop_assert_eq!(est.delta_tilde, gap);
        prop_assert_eq!(est.infeasible, gap < lo);
        prop_assert_eq!(est.delta_hat, gap.clamp(lo, lo + width));
    }

    #[test]
    fn union_area_lies_between_largest_and_total_disc(
        pts in points(1..10, 0.0, 2.0),
        r in 0.05f64..0.7,
    ) {
        let region = Window::rect(-1.0, 3.0, -1.0, 3.0).unwrap();
        let a = disc_union_area(&pts, r, &region).unwrap();
        let disc = PI * r * r;
        prop_assert!(a >= disc * (1.0 - 1e-12));
        prop_assert!(a <= pts.len() as f64 * disc * (1.0 + 1e-12));
        let mut rev = pts.clone();
        rev.reverse();
        prop_assert!(close(a, disc_union_area(&rev, r, &region).unwrap(), 1e-12));
    }

    #[test]
    fn bounded_minimum_stays_in_the_box_and_improves(
        c in prop::collection::vec(-3.0f64..3.0, 1..4),
        x0f in prop::collection::vec(0.0f64..1.0, 4),
    ) {
        let lo = vec![-1.0; c.len()];
        let hi = vec![1.0; c.len()];
        let x0: Vec<f64> = x0f.iter().take(c.len()).map(|t| -1.0 + 2.0 * t).collect();
        let f = |x: &[f64]| x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let m = minimize_in_box(f, &x0, &lo, &hi, &NelderMeadOptions::default());
        prop_assert!(m.x.iter().all(|v| (-1.0..=1.0).contains(v)));
        prop_assert!(m.value <= f(&x0));
        for (xi, ci) in m.x.iter().zip(&c) {
            prop_assert!((xi - ci.clamp(-1.0, 1.0)).abs() < 1e-3);
        }
    }

    #[test]
    fn model_record_round_trips(
        delta in 0.0f64..0.05, z in -1.0f64..1.0, beta in 0.0f64..2.0, r in 0.06f64..0.6, area in any::<bool>(),
    ) {
        let m = if area {
            GibbsModel::area_interaction(z, beta, r).unwrap()
        } else if delta > 0.0 {
            GibbsModel::hardcore_strauss(delta, z, beta, r).unwrap()
        } else {
            GibbsModel::strauss(z, beta, r).unwrap()
        };
        let kv: BTreeMap<String, String> = m.to_key_values().into_iter().collect();
        prop_assert_eq!(GibbsModel::from_key_values(&kv, None).unwrap(), m);
    }

    #[test]
    fn torus_distance_never_exceeds_the_plane(a in (0.0f64..4.0, 0.0f64..3.0), b in (0.0f64..4.0, 0.0f64..3.0)) {
        let w = Window::rect(0.0, 4.0, 0.0, 3.0).unwrap();
        let (p, q) = ([a.0, a.1], [b.0, b.1]);
        let d = w.periodic_distance(&p, &q);
        prop_assert!(d <= distance(&p, &q) + 1e-12);
        prop_assert!(d <= 0.5 * 5.0 + 1e-12);
    }
}
