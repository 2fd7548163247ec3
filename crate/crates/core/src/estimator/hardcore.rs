use crate::geometry::{pairwise_min_distance, PointConfig};

/// The hardcore estimate together with the raw minimum gap it came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardcoreEstimate {
    pub delta_hat: f64,
    /// Minimum interpoint distance of the data (`+∞` below two points).
    pub delta_tilde: f64,
    /// The data has a gap below the smallest admissible hardcore distance,
    /// so no model of the family can produce it.
    pub infeasible: bool,
}

/// `δ̂ = clamp(δ̃, δ_min, δ_max)`, flagging `δ̃ < δ_min`.
pub fn hardcore_mle(data: &PointConfig, interval: (f64, f64)) -> HardcoreEstimate {
    let (lo, hi) = interval;
    let tilde = pairwise_min_distance(data);
    HardcoreEstimate {
        delta_hat: tilde.clamp(lo, hi),
        delta_tilde: tilde,
        infeasible: tilde < lo,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;

    fn pair(gap: f64) -> PointConfig {
        let w = Window::rect(0.0, 10.0, 0.0, 10.0).unwrap();
        PointConfig::new(w, vec![[1.0, 1.0], [1.0 + gap, 1.0], [8.0, 8.0]]).unwrap()
    }

    #[test]
    fn examples() {
        let e = hardcore_mle(&pair(0.5), (0.1, 1.0));
        assert_eq!((e.delta_hat, e.infeasible), (0.5, false));
        let e = hardcore_mle(&pair(2.0), (0.1, 1.0));
        assert_eq!((e.delta_hat, e.infeasible), (1.0, false));
        let e = hardcore_mle(&pair(0.05), (0.1, 1.0));
        assert_eq!((e.delta_hat, e.infeasible), (0.1, true));
        assert!((e.delta_tilde - 0.05).abs() < 1e-15);
    }

    #[test]
    fn sparse_data_takes_the_upper_end() {
        let w = Window::rect(0.0, 1.0, 0.0, 1.0).unwrap();
        let e = hardcore_mle(&PointConfig::new(w, vec![[0.5, 0.5]]).unwrap(), (0.01, 0.2));
        assert_eq!(e.delta_hat, 0.2);
        assert_eq!(e.delta_tilde, f64::INFINITY);
    }
}
