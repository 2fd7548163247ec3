use gibbs_core::geometry::Window;
use gibbs_core::models::GibbsModel;
use gibbs_core::sampler::{
    direct_poisson_sample, gnz_residual, gnz_residual_with, read_sample_set, run_chain,
    write_sample_set, GnzOptions, SamplerConfig, TestFunction,
};
use gibbs_core::stats::{batch_means_se, mean};

fn counts(model: &GibbsModel, w: &Window, cfg: &SamplerConfig) -> (f64, f64) {
    let s = run_chain(model, w, cfg).unwrap();
    let c: Vec<f64> = s.draws.iter().map(|d| d.len() as f64).collect();
    (mean(&c), batch_means_se(&c, 30))
}

fn cfg(sweeps: usize, seed: u64) -> SamplerConfig {
    SamplerConfig {
        sweeps,
        burn_in: sweeps / 10,
        thin: 1,
        seed,
        ..SamplerConfig::default()
    }
}

#[test]
fn poisson_target_has_poisson_mean_count() {
    let w = Window::rect(0.0, 10.0, 0.0, 10.0).unwrap();
    for (z, seed) in [(0.5, 1), (0.0, 2)] {
        let m = GibbsModel::poisson(z).unwrap();
        let (mu, se) = counts(&m, &w, &cfg(3000, seed));
        let expect = (-z as f64).exp() * 100.0;
        assert!((mu - expect).abs() <= 3.0 * se, "z={z}: {mu} ± {se} vs {expect}");
    }
}

#[test]
fn two_state_chain_occupancy() {
    // at most one point fits, so P(1)/P(0) = |Λ| e^{-z}
    let w = Window::rect(0.0, 0.1, 0.0, 0.1).unwrap();
    let z = -(50f64.ln());
    let m = GibbsModel::hardcore_strauss(1.0, z, 0.0, 0.5).unwrap();
    let (p1, se) = counts(&m, &w, &cfg(200_000, 3));
    let ratio = w.volume() * (-z).exp();
    let expect = ratio / (1.0 + ratio);
    assert!((p1 - expect).abs() <= 3.0 * se, "{p1} ± {se} vs {expect}");
}

#[test]
fn repulsion_lowers_intensity() {
    let w = Window::rect(0.0, 8.0, 0.0, 8.0).unwrap();
    let c = cfg(2000, 9);
    let strauss = GibbsModel::strauss(0.3, 0.7, 0.3).unwrap();
    let poisson = GibbsModel::poisson(0.3).unwrap();
    let (ms, ss) = counts(&strauss, &w, &c);
    let (mp, sp) = counts(&poisson, &w, &c);
    assert!(ms <= mp + 3.0 * (ss * ss + sp * sp).sqrt());
    assert!(ms <= (-0.3f64).exp() * w.volume() + 3.0 * ss);
}

#[test]
fn direct_poisson_moments_and_uniformity() {
    let w = Window::rect(0.0, 10.0, 0.0, 10.0).unwrap();
    let samples: Vec<_> = (0..1000).map(|s| direct_poisson_sample(&w, 1.0, s)).collect();
    let m = mean(&samples.iter().map(|c| c.len() as f64).collect::<Vec<_>>());
    assert!((m - 100.0).abs() < 3.0 * (100.0f64 / 1000.0).sqrt());
    for axis in 0..2 {
        let mut v: Vec<f64> = samples[..20]
            .iter()
            .flat_map(|c| c.points().iter().map(move |p| p[axis] / 10.0))
            .collect();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let d = v
            .iter()
            .enumerate()
            .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
            .fold(0.0, f64::max);
        assert!(d < 1.628 / n.sqrt(), "axis {axis}: KS {d}");
    }
}

#[test]
fn gnz_residuals() {
    let w = Window::rect(0.0, 4.0, 0.0, 4.0).unwrap();
    let c = SamplerConfig {
        sweeps: 2100,
        burn_in: 100,
        thin: 10,
        seed: 4,
        ..SamplerConfig::default()
    };
    let opts = GnzOptions {
        grid: 60,
        ..GnzOptions::default()
    };
    let poisson = GibbsModel::poisson(0.4).unwrap();
    let s = run_chain(&poisson, &w, &c).unwrap();
    let r = gnz_residual_with(&s, &poisson, &w, &TestFunction::Constant(1.0), &opts);
    assert!(r.within(3.0), "{r:?}");
    assert_eq!(gnz_residual(&s, &poisson, &w, &TestFunction::Zero).value, 0.0);

    let strauss = GibbsModel::strauss(0.3, 0.7, 0.3).unwrap();
    let s = run_chain(&strauss, &w, &c).unwrap();
    for f in [TestFunction::Constant(1.0), TestFunction::NeighborCount(0.3)] {
        let r = gnz_residual_with(&s, &strauss, &w, &f, &opts);
        assert!(r.value.abs() <= 3.0 * r.std_error, "{f:?}: {} ± {}", r.value, r.std_error);
    }
    // wrong-signed energy must be caught
    let bad = GnzOptions {
        interaction_sign: -1.0,
        ..opts
    };
    let r = gnz_residual_with(&s, &strauss, &w, &TestFunction::NeighborCount(0.3), &bad);
    assert!(r.value.abs() > 3.0 * r.std_error);
}

#[test]
fn sample_set_round_trip() {
    let w = Window::rect(0.0, 3.0, 0.0, 3.0).unwrap();
    let m = GibbsModel::hardcore_strauss(0.05, 0.2, 0.5, 0.2).unwrap();
    let s = run_chain(&m, &w, &cfg(200, 8)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_sample_set(dir.path(), &s).unwrap();
    assert_eq!(read_sample_set(dir.path()).unwrap(), s);
}
