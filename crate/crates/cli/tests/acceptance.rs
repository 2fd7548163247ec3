//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS|FAIL ...` line. Run with `--nocapture` to see them.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gibbs_cli::commands::{cmd_fit, validate_samples, FitArgs, FitMethodArg};
use gibbs_cli::experiment::{run_consistency, simulate_observation, ExperimentSpec};
use gibbs_core::estimator::{contrast, hardcore_mle, pl_gradient, pl_objective, pseudolikelihood_fit};
use gibbs_core::geometry::io::save_pattern;
use gibbs_core::geometry::{pairwise_min_distance, CellPartition, PointConfig, Window};
use gibbs_core::models::{
    boundary_energy, disc_union_area, hamiltonian_conditional, mean_energy_cell, quadrature_union_area,
    GibbsModel, LennardJones,
};
use gibbs_core::partition::{
    analytic_poisson_log_z, log_z_bridged, log_z_brute, log_z_ratio_family, BridgeSchedule,
};
use gibbs_core::rng::{derive_seed, derive_seeds};
use gibbs_core::sampler::{direct_poisson_sample, run_chain, run_chains, SamplerConfig};
use gibbs_core::stats::median;
use gibbs_core::OptimizerConfig;

fn verdict(n: u32, pass: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

fn chain_cfg(sweeps: usize, thin: usize, seed: u64) -> SamplerConfig {
    SamplerConfig {
        sweeps,
        burn_in: 100,
        thin,
        seed,
        ..SamplerConfig::default()
    }
}

fn uniform_config(rng: &mut ChaCha8Rng, w: Window, n: usize) -> PointConfig {
    let pts = (0..n).map(|_| w.uniform_point(rng)).collect();
    PointConfig::new(w, pts).unwrap()
}

#[test]
fn criterion_1_poisson_closed_form() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let w = Window::centered(8.0, 2).unwrap();
    let z_true: f64 = 0.7;
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let data = direct_poisson_sample(&w, (-z_true).exp(), 100 + seed);
        let path = dir.path().join(format!("poisson_{seed}.csv"));
        save_pattern(&path, &data).unwrap();
        let args = FitArgs {
            data: path,
            model: None,
            kind: Some("poisson".into()),
            window: None,
            bounds: BTreeMap::new(),
            delta_interval: None,
            method: FitMethodArg::McMle,
            sampler: SamplerConfig::default().with_seed(seed),
            bridge_legs: 0,
            out: None,
        };
        let fit = cmd_fit(&args).unwrap();
        let closed = -(data.len() as f64 / w.volume()).ln();
        worst = worst.max((fit.model.z() - closed).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        1,
        worst < 0.05 && secs < 60.0,
        format!("max |z_hat - closed form| = {worst:.2e} over 10 seeds (< 0.05), {secs:.1}s"),
    );
}

#[test]
fn criterion_2_gnz_validation() {
    let start = Instant::now();
    let w = Window::rect(0.0, 5.0, 0.0, 5.0).unwrap();
    let models = [
        GibbsModel::strauss(0.3, 0.7, 0.1).unwrap(),
        GibbsModel::hardcore_strauss(0.05, 0.3, 0.7, 0.1).unwrap(),
        GibbsModel::area_interaction(0.3, 2.0, 0.15).unwrap(),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, m) in models.iter().enumerate() {
        let seeds = derive_seeds(20 + k as u64, 4);
        let set = run_chains(m, &w, &chain_cfg(2100, 5, 0), &seeds).unwrap();
        let report = validate_samples(&set, m, &w, 3.0);
        pass &= report.passed();
        for r in &report.rows {
            parts.push(format!("{} {}: {:+.2} SE", m.kind(), r.test, r.value / r.std_error));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(2, pass && secs < 300.0, format!("[{}] within 3 SE, {secs:.1}s", parts.join("; ")));
}

#[test]
fn criterion_3_partition_oracles() {
    let start = Instant::now();
    let w = Window::rect(0.0, 3.0, 0.0, 3.0).unwrap();
    let settings = [
        (1.0, 0.5, 0.1),
        (0.5, 0.3, 0.15),
        (1.0, 1.0, 0.2),
        (0.3, 0.7, 0.1),
        (1.5, 2.0, 0.1),
    ];
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for (k, &(z, beta, r)) in settings.iter().enumerate() {
        let target = GibbsModel::strauss(z, beta, r).unwrap();
        let anchor = GibbsModel::strauss(z, 0.0, r).unwrap();
        let sched = BridgeSchedule::linear(&anchor, &target, 5, 400).unwrap();
        let bridged = log_z_bridged(&sched, &w, &chain_cfg(2100, 5, 30 + k as u64)).unwrap();
        let brute = log_z_brute(&target, &w, 200_000, 40 + k as u64).unwrap();
        let zs = (bridged.value - brute.value).abs() / bridged.std_error.hypot(brute.std_error);
        worst = worst.max(zs);
        pass &= zs <= 3.0;
    }
    let z = 0.7;
    let poisson = log_z_brute(&GibbsModel::poisson(z).unwrap(), &w, 50_000, 50).unwrap();
    let analytic = analytic_poisson_log_z(z, &w);
    let pz = (poisson.value - analytic).abs() / poisson.std_error;
    pass &= pz <= 3.0;
    let secs = start.elapsed().as_secs_f64();
    verdict(
        3,
        pass && secs < 120.0,
        format!("bridged vs brute worst {worst:.2} SE over 5 settings; Poisson {pz:.2} SE; {secs:.1}s"),
    );
}

#[test]
fn criterion_4_exact_monotonicity() {
    let w = Window::rect(0.0, 3.0, 0.0, 3.0).unwrap();
    let base = GibbsModel::strauss(0.2, 0.4, 0.15).unwrap();
    let data = run_chain(
        &GibbsModel::hardcore_strauss(0.05, 0.2, 0.4, 0.15).unwrap(),
        &w,
        &chain_cfg(600, 500, 61),
    )
    .unwrap()
    .draws
    .pop()
    .unwrap();
    let gap = pairwise_min_distance(&data);
    let deltas: Vec<GibbsModel> = (0..=10)
        .map(|k| base.with_delta(gap * k as f64 / 10.0).unwrap())
        .collect();
    let betas: Vec<GibbsModel> = (0..12)
        .map(|k| base.with_param("beta", 0.25 * k as f64).unwrap())
        .collect();
    let mut pass = true;
    let mut checked = 0usize;
    for seed in 0..5 {
        let s = run_chain(&base, &w, &chain_cfg(1100, 5, 70 + seed)).unwrap();
        for fam in [&deltas, &betas] {
            let est = log_z_ratio_family(&base, fam, &s).unwrap();
            pass &= est.windows(2).all(|p| p[1].value <= p[0].value);
            checked += est.len() - 1;
        }
        let est = log_z_ratio_family(&base, &deltas, &s).unwrap();
        let k: Vec<f64> = deltas
            .iter()
            .zip(&est)
            .map(|(m, e)| contrast(m, &data, &w, e).value)
            .collect();
        pass &= k.iter().all(|v| v.is_finite()) && k.windows(2).all(|p| p[1] <= p[0]);
        checked += k.len() - 1;
    }
    verdict(
        4,
        pass,
        format!("{checked} consecutive pairs in delta, beta and K_n over [0, {gap:.4}] all ordered"),
    );
}

#[test]
fn criterion_5_hardcore_estimator() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = Window::rect(0.0, 4.0, 0.0, 4.0).unwrap();
    let mut exact = true;
    for _ in 0..100 {
        let n = rng.random_range(2..60);
        let c = uniform_config(&mut rng, w, n);
        let pts = c.points();
        let mut brute = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let (dx, dy) = (pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
                brute = brute.min((dx * dx + dy * dy).sqrt());
            }
        }
        let est = hardcore_mle(&c, (1e-9, 1.0));
        exact &= est.delta_tilde == brute && est.delta_hat == brute.min(1.0);
    }

    let truth = GibbsModel::hardcore_strauss(0.05, 0.3, 0.7, 0.1).unwrap();
    let mut above = true;
    let mut medians = Vec::new();
    for (rung, n) in [4.0, 16.0].into_iter().enumerate() {
        let w = Window::centered(n, 2).unwrap();
        let excess: Vec<f64> = (0..20u64)
            .map(|r| {
                let cfg = SamplerConfig::default().with_seed(derive_seed(55, 20 * rung as u64 + r));
                let data = simulate_observation(&truth, &w, &cfg).unwrap();
                let est = hardcore_mle(&data, (1e-9, w.min_side() / 4.0));
                est.delta_hat - 0.05
            })
            .collect();
        above &= excess.iter().all(|e| *e >= 0.0);
        medians.push(median(&excess));
    }
    verdict(
        5,
        exact && above && medians[1] < medians[0],
        format!(
            "exact on 100 configs: {exact}; delta_hat >= delta* always: {above}; median excess n=4 {:.2e}, n=16 {:.2e}",
            medians[0], medians[1]
        ),
    );
}

#[test]
fn criterion_6_consistency_trend() {
    let truth = GibbsModel::strauss(0.3, 0.7, 0.1).unwrap();
    let mut spec = ExperimentSpec::new(truth, vec![4.0, 8.0, 16.0], 20, 7).unwrap();
    spec.optimizer = OptimizerConfig::default().with_bound("range", 0.02, 0.5);
    let report = run_consistency(&spec).unwrap();
    let mut pass = report.runtime_secs < 900.0;
    let mut parts = Vec::new();
    for name in ["z", "beta", "range"] {
        let a = report.median_error(4.0, name).unwrap();
        let b = report.median_error(16.0, name).unwrap();
        pass &= b < a;
        parts.push(format!("{name} {a:.3} -> {b:.3}"));
    }
    verdict(
        6,
        pass,
        format!(
            "median |error| n=4 -> n=16: {}; {:.0}s",
            parts.join(", "),
            report.runtime_secs
        ),
    );
}

#[test]
fn criterion_7_decomposition_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let big = Window::centered(3.0, 2).unwrap();
    let w = Window::centered(2.0, 2).unwrap();
    let part = CellPartition::unit(&w);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let m = if k % 2 == 0 {
            GibbsModel::strauss(
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..2.0),
                rng.random_range(0.05..0.6),
            )
        } else {
            GibbsModel::area_interaction(
                rng.random_range(-1.0..1.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(0.05..0.4),
            )
        }
        .unwrap();
        let n = rng.random_range(0..120);
        let c = uniform_config(&mut rng, big, n);
        let cells: f64 = part
            .cells()
            .iter()
            .map(|cell| mean_energy_cell(&m, &c, &part, cell.index))
            .sum();
        let total = cells + boundary_energy(&m, &c, &w);
        worst = worst.max((total - hamiltonian_conditional(&m, &c, &w)).abs());
    }

    // boundary share on simulated patterns
    let truth = GibbsModel::strauss(0.3, 0.7, 0.3).unwrap();
    let outer = Window::centered(17.0, 2).unwrap();
    let mut share = [0.0; 2];
    for seed in 0..5 {
        let c = run_chain(&truth, &outer, &chain_cfg(600, 500, 80 + seed)).unwrap().draws.pop().unwrap();
        for (i, n) in [4.0, 16.0].into_iter().enumerate() {
            let wn = Window::centered(n, 2).unwrap();
            share[i] += boundary_energy(&truth, &c, &wn).abs() / wn.volume() / 5.0;
        }
    }
    verdict(
        7,
        worst < 1e-10 && share[1] < share[0],
        format!(
            "max identity gap {worst:.1e} on 100 instances; |dH|/|L| n=4 {:.2e}, n=16 {:.2e}",
            share[0], share[1]
        ),
    );
}

#[test]
fn criterion_8_geometry_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let region = Window::rect(0.0, 2.0, 0.0, 2.0).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.random_range(2..=10);
        let pts: Vec<_> = (0..k)
            .map(|_| [rng.random_range(-0.3..2.3), rng.random_range(-0.3..2.3)])
            .collect();
        let r = rng.random_range(0.05..0.7);
        let exact = disc_union_area(&pts, r, &region).unwrap();
        let quad = quadrature_union_area(&pts, r, &region, 1e-4);
        let rel = if quad > 0.0 { (exact - quad).abs() / quad } else { exact.abs() };
        worst = worst.max(rel);
    }
    let lj = LennardJones::new(1.0, 1.0, 12.0, 6.0, 3.0).unwrap();
    let v = lj.eval(2f64.powf(1.0 / 6.0));
    let lj_err = (v + 0.25).abs();
    verdict(
        8,
        worst < 1e-3 && lj_err < 1e-12,
        format!("max relative union-area error {worst:.1e} on 100 instances; LJ(2^(1/6)) + 0.25 = {lj_err:.1e}"),
    );
}

#[test]
fn criterion_9_pseudolikelihood() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let w = Window::rect(0.0, 2.0, 0.0, 2.0).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(5..40);
        let c = uniform_config(&mut rng, w, n);
        let m = GibbsModel::strauss(
            rng.random_range(-1.0..1.0),
            rng.random_range(0.0..2.0),
            rng.random_range(0.05..0.4),
        )
        .unwrap();
        let g = pl_gradient(&m, &c, &w, 40);
        let h = 1e-6;
        for (k, name) in ["z", "beta"].iter().enumerate() {
            let v = m.param(name).unwrap();
            let up = pl_objective(&m.with_param(name, v + h).unwrap(), &c, &w, 40);
            let dn = pl_objective(&m.with_param(name, v - h).unwrap(), &c, &w, 40);
            let fd = (up - dn) / (2.0 * h);
            worst = worst.max((g[k] - fd).abs() / g[k].abs().max(1.0));
        }
    }

    let pw = Window::rect(-3.0, 3.0, -3.0, 3.0).unwrap();
    let data = direct_poisson_sample(&pw, 0.8, 3);
    let target = -(data.len() as f64 / pw.volume()).ln();
    let family = GibbsModel::strauss(0.0, 0.0, 0.1).unwrap();
    let mut errs = Vec::new();
    for grid in [50, 100, 200] {
        let o = OptimizerConfig {
            quadrature: Some(grid),
            ..OptimizerConfig::default().pin("beta", 0.0).pin("range", 0.1)
        };
        let fit = pseudolikelihood_fit(&data, &pw, &family, &o).unwrap();
        errs.push((fit.model.z() - target).abs());
    }
    let converged = errs.iter().all(|e| *e < 1e-6);
    verdict(
        9,
        worst < 1e-5 && converged,
        format!(
            "max relative gradient error {worst:.1e} on 20 instances; Poisson PL error at grids 50/100/200: {:.1e}/{:.1e}/{:.1e}",
            errs[0], errs[1], errs[2]
        ),
    );
}
