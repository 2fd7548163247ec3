use crate::geometry::{PointConfig, Window};
use crate::models::{hamiltonian, GibbsModel};
use crate::partition::LogZEstimate;

/// The contrast `ln Z/|Λ| + H(data)/|Λ|` and its two terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContrastEval {
    pub value: f64,
    pub mc_error: f64,
    /// `ln Z / |Λ|`, the finite-volume pressure.
    pub pressure_term: f64,
    /// `H(data) / |Λ|`; `+∞` when the data violates the hardcore.
    pub energy_term: f64,
}

/// Contrast of `model` on the part of `data` inside `w`. `logz` must belong
/// to `model` on `w`.
pub fn contrast(model: &GibbsModel, data: &PointConfig, w: &Window, logz: &LogZEstimate) -> ContrastEval {
    let vol = w.volume();
    let pressure_term = logz.value / vol;
    let energy_term = hamiltonian(model, data, w) / vol;
    ContrastEval {
        value: pressure_term + energy_term,
        mc_error: logz.std_error / vol,
        pressure_term,
        energy_term,
    }
}
