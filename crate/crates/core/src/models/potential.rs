use super::ModelError;

/// Distances below this evaluate the Lennard-Jones potential to `+∞`.
pub const LJ_NEAR_ZERO: f64 = 1e-8;

/// One piece `φ_k(r) = β_k · exp(-κ_k r)` of a piecewise pair potential.
/// `decay == 0` gives the piecewise-constant (multi-Strauss) family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub beta: f64,
    pub decay: f64,
}

impl Piece {
    pub fn constant(beta: f64) -> Self {
        Piece { beta, decay: 0.0 }
    }

    /// Shape function `g_k(r)` with `φ_k = β_k g_k`.
    #[inline]
    pub fn shape(&self, r: f64) -> f64 {
        if self.decay == 0.0 {
            1.0
        } else {
            (-self.decay * r).exp()
        }
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        if self.decay == 0.0 {
            self.beta
        } else {
            self.beta * self.shape(r)
        }
    }
}

/// Finite-range piecewise pair potential with a hardcore distance.
///
/// Between breakpoints the value is the owning piece; exactly at a breakpoint
/// `R_k` it is `min(φ_k(R_k), φ_{k+1}(R_k))` with `φ_{q+1} ≡ 0`, which makes
/// the potential lower semicontinuous in `(β, R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairPotentialSpec {
    delta: f64,
    pieces: Vec<Piece>,
    breakpoints: Vec<f64>,
}

impl PairPotentialSpec {
    pub fn new(delta: f64, pieces: Vec<Piece>, breakpoints: Vec<f64>) -> Result<Self, ModelError> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "hardcore distance must be finite and >= 0, got {delta}"
            )));
        }
        if pieces.len() != breakpoints.len() {
            return Err(ModelError::InvalidParameter(format!(
                "{} pieces but {} breakpoints",
                pieces.len(),
                breakpoints.len()
            )));
        }
        if breakpoints.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(ModelError::InvalidParameter(
                "breakpoints must be finite and nonnegative".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(ModelError::InvalidParameter(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if pieces
            .iter()
            .any(|p| !p.beta.is_finite() || !p.decay.is_finite() || p.decay < 0.0)
        {
            return Err(ModelError::InvalidParameter(
                "piece amplitudes must be finite and decays nonnegative".into(),
            ));
        }
        Ok(PairPotentialSpec {
            delta,
            pieces,
            breakpoints,
        })
    }

    /// `φ = ∞` below `δ`, `β` on `[δ, R)`, `0` from `R` on.
    pub fn strauss(delta: f64, beta: f64, range: f64) -> Result<Self, ModelError> {
        Self::new(delta, vec![Piece::constant(beta)], vec![range])
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Interaction range `R_q` (0 for the empty potential).
    pub fn range(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or(0.0)
    }

    /// Value at distance `dist`, ignoring the hardcore part.
    pub fn eval_soft(&self, dist: f64) -> f64 {
        // first breakpoint >= dist
        let k = self.breakpoints.partition_point(|&r| r < dist);
        if k == self.breakpoints.len() {
            return 0.0;
        }
        let here = self.pieces[k].eval(dist);
        if self.breakpoints[k] == dist {
            let next = self.pieces.get(k + 1).map_or(0.0, |p| p.eval(dist));
            here.min(next)
        } else {
            here
        }
    }

    pub fn eval(&self, dist: f64) -> f64 {
        if dist < self.delta {
            f64::INFINITY
        } else {
            self.eval_soft(dist)
        }
    }
}

pub fn pair_potential_eval(spec: &PairPotentialSpec, dist: f64) -> f64 {
    spec.eval(dist)
}

/// `φ(r) = A r^{-n} - B r^{-m}`, truncated to zero from `cutoff` on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LennardJones {
    pub a: f64,
    pub b: f64,
    pub n: f64,
    pub m: f64,
    pub cutoff: f64,
}

impl LennardJones {
    pub fn new(a: f64, b: f64, n: f64, m: f64, cutoff: f64) -> Result<Self, ModelError> {
        if !(a > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "Lennard-Jones needs A > 0 and finite B, got A={a}, B={b}"
            )));
        }
        if !(m > 1.0 && m < n) || !n.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "Lennard-Jones exponents need 1 <= d < m < n, got n={n}, m={m}"
            )));
        }
        if !(cutoff > 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "Lennard-Jones cutoff must be positive, got {cutoff}"
            )));
        }
        Ok(LennardJones { a, b, n, m, cutoff })
    }

    /// `5 · (A / max(|B|, ε))^{1/(n-m)}`, capped at half the window's shorter side.
    pub fn default_cutoff(a: f64, b: f64, n: f64, m: f64, min_side: f64) -> f64 {
        let scale = (a / b.abs().max(1e-12)).powf(1.0 / (n - m));
        (5.0 * scale).min(0.5 * min_side)
    }

    #[inline]
    pub fn eval(&self, dist: f64) -> f64 {
        if dist < LJ_NEAR_ZERO {
            f64::INFINITY
        } else if dist >= self.cutoff {
            0.0
        } else {
            self.a * dist.powf(-self.n) - self.b * dist.powf(-self.m)
        }
    }
}
