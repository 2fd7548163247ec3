//! The model zoo: Strauss, hardcore Strauss, piecewise pair potentials,
//! Lennard-Jones and area-interaction, with their energies.
//!
//! All energies are extended reals: `f64::INFINITY` encodes a configuration
//! outside the hardcore support.

pub mod area;
mod energy;
mod keyvalue;
pub mod potential;
mod summary;

use std::fmt;

use thiserror::Error;

pub use area::{disc_union_area, disc_union_area_unbounded, quadrature_union_area, uncovered_disc_area};
pub use energy::{
    boundary_energy, hamiltonian, hamiltonian_conditional, hamiltonian_periodic, local_energy,
    local_energy_with, mean_energy_cell, support_indicator,
};
pub use potential::{pair_potential_eval, LennardJones, PairPotentialSpec, Piece};
pub use summary::Summary;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(
        "no Gibbs measure exists for the Strauss model without hardcore and beta = {beta} < 0"
    )]
    NonexistentModel { beta: f64 },
    #[error("unsupported dimension {0} for this model")]
    UnsupportedDimension(usize),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Strauss,
    HardcoreStrauss,
    PiecewisePair,
    LennardJones,
    AreaInteraction,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Strauss => "strauss",
            ModelKind::HardcoreStrauss => "hardcore_strauss",
            ModelKind::PiecewisePair => "piecewise",
            ModelKind::LennardJones => "lennard_jones",
            ModelKind::AreaInteraction => "area_interaction",
        }
    }

    /// Whether the hardcore distance is a free parameter of the family.
    pub fn has_hardcore(&self) -> bool {
        matches!(self, ModelKind::HardcoreStrauss | ModelKind::PiecewisePair)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AreaInteraction {
    pub beta: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Interaction {
    Pair(PairPotentialSpec),
    LennardJones(LennardJones),
    Area(AreaInteraction),
}

/// A parametric Gibbs model: hardcore distance `δ`, intensity parameter `z`
/// and an interaction.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsModel {
    kind: ModelKind,
    delta: f64,
    z: f64,
    interaction: Interaction,
}

fn check_z(z: f64) -> Result<(), ModelError> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter(format!("z must be finite, got {z}")))
    }
}

impl GibbsModel {
    /// Strauss model without hardcore; requires `β >= 0`.
    pub fn strauss(z: f64, beta: f64, range: f64) -> Result<Self, ModelError> {
        check_z(z)?;
        if beta < 0.0 {
            return Err(ModelError::NonexistentModel { beta });
        }
        Ok(GibbsModel {
            kind: ModelKind::Strauss,
            delta: 0.0,
            z,
            interaction: Interaction::Pair(PairPotentialSpec::strauss(0.0, beta, range)?),
        })
    }

    /// Poisson process with intensity `e^{-z}` (Strauss with `β = R = 0`).
    pub fn poisson(z: f64) -> Result<Self, ModelError> {
        Self::strauss(z, 0.0, 0.0)
    }

    pub fn hardcore_strauss(delta: f64, z: f64, beta: f64, range: f64) -> Result<Self, ModelError> {
        check_z(z)?;
        if !(delta > 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "hardcore Strauss needs delta > 0, got {delta}"
            )));
        }
        Ok(GibbsModel {
            kind: ModelKind::HardcoreStrauss,
            delta,
            z,
            interaction: Interaction::Pair(PairPotentialSpec::strauss(delta, beta, range)?),
        })
    }

    pub fn piecewise(
        delta: f64,
        z: f64,
        pieces: Vec<Piece>,
        breakpoints: Vec<f64>,
    ) -> Result<Self, ModelError> {
        check_z(z)?;
        if breakpoints.first().is_some_and(|&r| r <= 0.0) {
            return Err(ModelError::InvalidParameter(
                "piecewise breakpoints must be positive".into(),
            ));
        }
        let spec = PairPotentialSpec::new(delta, pieces, breakpoints)?;
        if delta == 0.0 && spec.pieces().iter().any(|p| p.beta < 0.0) {
            let beta = spec
                .pieces()
                .iter()
                .map(|p| p.beta)
                .fold(f64::INFINITY, f64::min);
            return Err(ModelError::NonexistentModel { beta });
        }
        Ok(GibbsModel {
            kind: ModelKind::PiecewisePair,
            delta,
            z,
            interaction: Interaction::Pair(spec),
        })
    }

    pub fn lennard_jones(z: f64, lj: LennardJones) -> Result<Self, ModelError> {
        check_z(z)?;
        let lj = LennardJones::new(lj.a, lj.b, lj.n, lj.m, lj.cutoff)?;
        Ok(GibbsModel {
            kind: ModelKind::LennardJones,
            delta: 0.0,
            z,
            interaction: Interaction::LennardJones(lj),
        })
    }

    pub fn area_interaction(z: f64, beta: f64, radius: f64) -> Result<Self, ModelError> {
        check_z(z)?;
        if !(radius >= 0.0) || !radius.is_finite() || !beta.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "area-interaction needs finite beta and radius >= 0, got beta={beta}, R={radius}"
            )));
        }
        Ok(GibbsModel {
            kind: ModelKind::AreaInteraction,
            delta: 0.0,
            z,
            interaction: Interaction::Area(AreaInteraction { beta, radius }),
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn interaction(&self) -> &Interaction {
        &self.interaction
    }

    /// Same energy, different hardcore distance. Only meaningful for kinds with
    /// a hardcore parameter; `δ = 0` on a hardcore Strauss model yields a Strauss
    /// model (and is rejected for `β < 0`).
    pub fn with_delta(&self, delta: f64) -> Result<Self, ModelError> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "hardcore distance must be finite and >= 0, got {delta}"
            )));
        }
        match (&self.interaction, self.kind) {
            (Interaction::Pair(spec), ModelKind::Strauss | ModelKind::HardcoreStrauss) => {
                let beta = spec.pieces()[0].beta;
                let range = spec.range();
                if delta == 0.0 {
                    Self::strauss(self.z, beta, range)
                } else {
                    Self::hardcore_strauss(delta, self.z, beta, range)
                }
            }
            (Interaction::Pair(spec), _) => Self::piecewise(
                delta,
                self.z,
                spec.pieces().to_vec(),
                spec.breakpoints().to_vec(),
            ),
            _ if delta == 0.0 => Ok(self.clone()),
            _ => Err(ModelError::InvalidParameter(format!(
                "{} has no hardcore parameter",
                self.kind
            ))),
        }
    }

    /// Largest distance at which two points interact (`2R` for area-interaction).
    pub fn interaction_range(&self) -> f64 {
        let soft = match &self.interaction {
            Interaction::Pair(spec) => spec.range(),
            Interaction::LennardJones(lj) => lj.cutoff,
            Interaction::Area(a) => 2.0 * a.radius,
        };
        soft.max(self.delta)
    }

    /// True when the energy is `z N` (plus possibly a hardcore).
    pub fn is_interaction_free(&self) -> bool {
        match &self.interaction {
            Interaction::Pair(spec) => spec.pieces().iter().all(|p| p.beta == 0.0),
            Interaction::LennardJones(_) => false,
            Interaction::Area(a) => a.beta == 0.0 || a.radius == 0.0,
        }
    }

    pub fn check_dimension(&self, dim: usize) -> Result<(), ModelError> {
        match &self.interaction {
            Interaction::Area(_) if dim != 2 => Err(ModelError::UnsupportedDimension(dim)),
            Interaction::LennardJones(lj) if !(lj.m > dim as f64) => {
                Err(ModelError::InvalidParameter(format!(
                    "Lennard-Jones needs m > d, got m={} in dimension {dim}",
                    lj.m
                )))
            }
            _ => Ok(()),
        }
    }

    /// Names of the parameters in `θ`, in the order of [`GibbsModel::params`].
    pub fn param_names(&self) -> Vec<String> {
        let mut names = vec!["z".to_string()];
        match (&self.interaction, self.kind) {
            (Interaction::Pair(_), ModelKind::Strauss | ModelKind::HardcoreStrauss) => {
                names.extend(["beta".into(), "range".into()]);
            }
            (Interaction::Pair(spec), _) => {
                let q = spec.pieces().len();
                names.extend((1..=q).map(|k| format!("beta{k}")));
                names.extend((1..=q).map(|k| format!("range{k}")));
                names.extend((1..=q).map(|k| format!("decay{k}")));
            }
            (Interaction::LennardJones(_), _) => {
                names.extend(["a".into(), "b".into(), "n".into(), "m".into()]);
            }
            (Interaction::Area(_), _) => {
                names.extend(["beta".into(), "range".into()]);
            }
        }
        names
    }

    pub fn params(&self) -> Vec<f64> {
        let mut v = vec![self.z];
        match &self.interaction {
            Interaction::Pair(spec) => {
                v.extend(spec.pieces().iter().map(|p| p.beta));
                v.extend_from_slice(spec.breakpoints());
                if self.kind == ModelKind::PiecewisePair {
                    v.extend(spec.pieces().iter().map(|p| p.decay));
                }
            }
            Interaction::LennardJones(lj) => v.extend([lj.a, lj.b, lj.n, lj.m]),
            Interaction::Area(a) => v.extend([a.beta, a.radius]),
        }
        v
    }

    /// Which parameters the energy depends on linearly (the exponential-family
    /// directions). The rest are shape parameters: ranges, decays, exponents.
    pub fn linear_mask(&self) -> Vec<bool> {
        let mut mask = vec![true];
        match (&self.interaction, self.kind) {
            (Interaction::Pair(_), ModelKind::Strauss | ModelKind::HardcoreStrauss) => {
                mask.extend([true, false]);
            }
            (Interaction::Pair(spec), _) => {
                let q = spec.pieces().len();
                mask.extend(std::iter::repeat_n(true, q));
                mask.extend(std::iter::repeat_n(false, 2 * q));
            }
            (Interaction::LennardJones(_), _) => mask.extend([true, true, false, false]),
            (Interaction::Area(_), _) => mask.extend([true, false]),
        }
        mask
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        let names = self.param_names();
        names
            .iter()
            .position(|n| n == name)
            .map(|i| self.params()[i])
    }

    /// Same kind and `δ`, new parameter vector. Fails when the values leave
    /// the parameter space.
    pub fn with_params(&self, values: &[f64]) -> Result<Self, ModelError> {
        let expected = self.param_names().len();
        if values.len() != expected {
            return Err(ModelError::InvalidParameter(format!(
                "expected {expected} parameters, got {}",
                values.len()
            )));
        }
        let z = values[0];
        match (&self.interaction, self.kind) {
            (Interaction::Pair(_), ModelKind::Strauss) => Self::strauss(z, values[1], values[2]),
            (Interaction::Pair(_), ModelKind::HardcoreStrauss) => {
                Self::hardcore_strauss(self.delta, z, values[1], values[2])
            }
            (Interaction::Pair(spec), _) => {
                let q = spec.pieces().len();
                let pieces = (0..q)
                    .map(|k| Piece {
                        beta: values[1 + k],
                        decay: values[1 + 2 * q + k],
                    })
                    .collect();
                let breaks = values[1 + q..1 + 2 * q].to_vec();
                Self::piecewise(self.delta, z, pieces, breaks)
            }
            (Interaction::LennardJones(lj), _) => Self::lennard_jones(
                z,
                LennardJones {
                    a: values[1],
                    b: values[2],
                    n: values[3],
                    m: values[4],
                    cutoff: lj.cutoff,
                },
            ),
            (Interaction::Area(_), _) => Self::area_interaction(z, values[1], values[2]),
        }
    }

    pub fn with_param(&self, name: &str, value: f64) -> Result<Self, ModelError> {
        let names = self.param_names();
        let i = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ModelError::UnknownParameter(name.to_string()))?;
        let mut v = self.params();
        v[i] = value;
        self.with_params(&v)
    }

    /// Combined pair potential `∞·1{r < δ} + φ(r)` for pairwise kinds.
    #[inline]
    pub fn pair_energy(&self, r: f64) -> f64 {
        if r < self.delta {
            return f64::INFINITY;
        }
        match &self.interaction {
            Interaction::Pair(spec) => spec.eval_soft(r),
            Interaction::LennardJones(lj) => lj.eval(r),
            Interaction::Area(_) => 0.0,
        }
    }

    pub fn is_pairwise(&self) -> bool {
        !matches!(self.interaction, Interaction::Area(_))
    }

    /// Stable one-line description, used to tag exported estimates.
    pub fn fingerprint(&self) -> String {
        let names = self.param_names();
        let vals = self.params();
        let mut s = format!("{}(delta={}", self.kind, self.delta);
        for (n, v) in names.iter().zip(vals) {
            s.push_str(&format!(";{n}={v}"));
        }
        if let Interaction::LennardJones(lj) = &self.interaction {
            s.push_str(&format!(";cutoff={}", lj.cutoff));
        }
        s.push(')');
        s
    }
}

impl fmt::Display for GibbsModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fingerprint())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strauss_without_hardcore_rejects_negative_beta() {
        assert!(matches!(
            GibbsModel::strauss(1.0, -0.5, 0.1),
            Err(ModelError::NonexistentModel { .. })
        ));
        assert!(GibbsModel::hardcore_strauss(0.05, 1.0, -0.5, 0.1).is_ok());
    }

    #[test]
    fn param_round_trip() {
        let m = GibbsModel::piecewise(
            0.02,
            0.4,
            vec![Piece::constant(1.0), Piece { beta: -0.3, decay: 2.0 }],
            vec![0.1, 0.25],
        )
        .unwrap();
        assert_eq!(
            m.param_names(),
            ["z", "beta1", "beta2", "range1", "range2", "decay1", "decay2"]
        );
        assert_eq!(m.with_params(&m.params()).unwrap(), m);
        assert_eq!(
            m.linear_mask(),
            [true, true, true, false, false, false, false]
        );
        let s = GibbsModel::strauss(0.3, 0.7, 0.1).unwrap();
        let moved = s.with_param("range", 0.2).unwrap();
        assert_eq!(moved.param("range"), Some(0.2));
        assert!(s.with_param("nope", 1.0).is_err());
    }

    #[test]
    fn delta_changes() {
        let hc = GibbsModel::hardcore_strauss(0.05, 0.3, 0.7, 0.1).unwrap();
        let s = hc.with_delta(0.0).unwrap();
        assert_eq!(s.kind(), ModelKind::Strauss);
        let back = s.with_delta(0.05).unwrap();
        assert_eq!(back, hc);
        let area = GibbsModel::area_interaction(0.0, 1.0, 0.2).unwrap();
        assert!(area.with_delta(0.1).is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(
            GibbsModel::area_interaction(0.0, 1.0, 0.2)
                .unwrap()
                .interaction_range(),
            0.4
        );
        let lj = LennardJones::new(1.0, 1.0, 12.0, 6.0, 2.5).unwrap();
        assert_eq!(
            GibbsModel::lennard_jones(0.0, lj).unwrap().interaction_range(),
            2.5
        );
    }
}
