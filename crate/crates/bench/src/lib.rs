//! Fixtures shared by the benchmarks.

use gibbs_core::sampler::direct_poisson_sample;
use gibbs_core::{GibbsModel, PointConfig, Window};

/// Window `[-n, n]^2` with a Poisson pattern of intensity `rate`.
pub fn poisson_fixture(n: f64, rate: f64, seed: u64) -> (Window, PointConfig) {
    let w = Window::centered(n, 2).expect("positive half-width");
    let c = direct_poisson_sample(&w, rate, seed);
    (w, c)
}

pub fn strauss() -> GibbsModel {
    GibbsModel::strauss(0.3, 0.7, 0.1).expect("valid parameters")
}

pub fn area() -> GibbsModel {
    GibbsModel::area_interaction(0.3, 2.0, 0.15).expect("valid parameters")
}
