use crate::geometry::{PointConfig, Window};
use crate::models::{GibbsModel, ModelError, ModelKind};

use super::{EstimatorError, OptimizerConfig, RangeGrid};

const RANGE_EPS: f64 = 1e-6;
const Z_BOX: (f64, f64) = (-3.0, 3.0);
const BETA_BOX: (f64, f64) = (-5.0, 5.0);
const LJ_A_BOX: (f64, f64) = (1e-6, 10.0);
const LJ_B_BOX: (f64, f64) = (-10.0, 10.0);
const AREA_UNIFORM_GRID: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Role {
    Fixed,
    Free,
    Profiled,
}

/// The search box `K` resolved against a model family: which parameters the
/// simplex moves, which are pinned, and the candidate grid for the range.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSpace {
    template: GibbsModel,
    names: Vec<String>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    roles: Vec<Role>,
    fixed: Vec<f64>,
    candidates: Vec<f64>,
}

fn is_beta(name: &str) -> bool {
    name.starts_with("beta")
}

impl ParamSpace {
    /// Defaults: `z ∈ [-3, 3]`, every `β ∈ [-5, 5]` (lower end 0 without a
    /// hardcore for pairwise kinds), the single range of Strauss and
    /// area-interaction profiled over `[δ + ε, side/4]`, Lennard-Jones
    /// `a ∈ [1e-6, 10]`, `b ∈ [-10, 10]`. Remaining shape parameters stay at
    /// the template's values unless bounded.
    pub fn resolve(
        template: &GibbsModel,
        data: &PointConfig,
        w: &Window,
        ocfg: &OptimizerConfig,
    ) -> Result<Self, EstimatorError> {
        let names = template.param_names();
        let values = template.params();
        for k in ocfg.bounds.keys() {
            if !names.contains(k) {
                return Err(ModelError::UnknownParameter(k.clone()).into());
            }
        }
        let kind = template.kind();
        let delta = template.delta();
        let quarter = w.min_side() / 4.0;
        let single_range = matches!(
            kind,
            ModelKind::Strauss | ModelKind::HardcoreStrauss | ModelKind::AreaInteraction
        );
        let nonneg_beta = delta == 0.0 && matches!(kind, ModelKind::Strauss | ModelKind::PiecewisePair);

        let n = names.len();
        let (mut lo, mut hi, mut roles) = (vec![0.0; n], vec![0.0; n], vec![Role::Fixed; n]);
        for (i, name) in names.iter().enumerate() {
            let default = match name.as_str() {
                "z" => Some(Z_BOX),
                "a" if kind == ModelKind::LennardJones => Some(LJ_A_BOX),
                "b" if kind == ModelKind::LennardJones => Some(LJ_B_BOX),
                "range" if single_range => Some((delta + RANGE_EPS, quarter.max(delta + RANGE_EPS))),
                s if is_beta(s) => Some(BETA_BOX),
                _ => None,
            };
            let bound = ocfg.bounds.get(name).copied().or(default);
            let Some((mut l, h)) = bound else {
                (lo[i], hi[i]) = (values[i], values[i]);
                continue;
            };
            if nonneg_beta && is_beta(name) {
                l = l.max(0.0);
            }
            if l > h {
                return Err(EstimatorError::InvalidBox(format!("{name}: [{l}, {h}] is empty")));
            }
            (lo[i], hi[i]) = (l, h);
            roles[i] = if l == h {
                Role::Fixed
            } else if name == "range" && single_range {
                Role::Profiled
            } else {
                Role::Free
            };
        }
        let fixed: Vec<f64> = (0..n)
            .map(|i| if roles[i] == Role::Fixed && lo[i] == hi[i] { lo[i] } else { values[i] })
            .collect();

        let template = template
            .with_params(&fixed)
            .map_err(|e| EstimatorError::InvalidBox(format!("pinned values: {e}")))?;
        let mut space = ParamSpace {
            template,
            names,
            lo,
            hi,
            roles,
            fixed,
            candidates: Vec::new(),
        };
        if let Some(p) = space.profile_index() {
            space.candidates = space.range_candidates(p, data, ocfg)?;
        }
        Ok(space)
    }

    fn range_candidates(&self, p: usize, data: &PointConfig, ocfg: &OptimizerConfig) -> Result<Vec<f64>, EstimatorError> {
        let (lo, hi) = (self.lo[p], self.hi[p]);
        let grid = match &ocfg.range_grid {
            RangeGrid::Auto if self.template.is_pairwise() => RangeGrid::Observed,
            RangeGrid::Auto => RangeGrid::Uniform(AREA_UNIFORM_GRID),
            g => g.clone(),
        };
        let mut c = match grid {
            RangeGrid::Values(v) => {
                let inside: Vec<f64> = v.into_iter().filter(|r| (lo..=hi).contains(r)).collect();
                if inside.is_empty() {
                    return Err(EstimatorError::InvalidBox(format!(
                        "no range candidate inside [{lo}, {hi}]"
                    )));
                }
                inside
            }
            RangeGrid::Uniform(k) => {
                let k = k.max(1);
                if k == 1 {
                    vec![lo]
                } else {
                    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
                }
            }
            RangeGrid::Observed | RangeGrid::Auto => {
                let mut d = vec![lo, hi];
                for (i, x) in data.points().iter().enumerate() {
                    data.for_each_neighbor(x, hi, None, false, |j, r| {
                        if j > i && r >= lo {
                            d.push(r);
                        }
                    });
                }
                d
            }
        };
        c.sort_by(f64::total_cmp);
        c.dedup();
        let cap = ocfg.max_candidates.max(2);
        if c.len() > cap {
            let last = c.len() - 1;
            c = (0..cap).map(|i| c[i * last / (cap - 1)]).collect();
            c.dedup();
        }
        Ok(c)
    }

    pub fn template(&self) -> &GibbsModel {
        &self.template
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    /// Indices of the parameters moved by the simplex.
    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.names.len()).filter(|&i| self.roles[i] == Role::Free).collect()
    }

    pub fn profile_index(&self) -> Option<usize> {
        self.roles.iter().position(|r| *r == Role::Profiled)
    }

    /// Range candidates, ascending; empty when nothing is profiled.
    pub fn candidates(&self) -> &[f64] {
        &self.candidates
    }

    pub fn free_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let f = self.free_indices();
        (f.iter().map(|&i| self.lo[i]).collect(), f.iter().map(|&i| self.hi[i]).collect())
    }

    /// Full parameter vector from free values and the profiled range.
    pub fn assemble(&self, free: &[f64], range: Option<f64>) -> Vec<f64> {
        let mut v = self.fixed.clone();
        for (k, i) in self.free_indices().into_iter().enumerate() {
            v[i] = free[k];
        }
        if let (Some(p), Some(r)) = (self.profile_index(), range) {
            v[p] = r;
        }
        v
    }

    pub fn build(&self, free: &[f64], range: Option<f64>) -> Result<GibbsModel, ModelError> {
        self.template.with_params(&self.assemble(free, range))
    }

    /// Free values of `model`, clamped into the box.
    pub fn free_values(&self, model: &GibbsModel) -> Vec<f64> {
        let v = model.params();
        self.free_indices()
            .into_iter()
            .map(|i| v[i].clamp(self.lo[i], self.hi[i]))
            .collect()
    }

    /// Profiled range of `model` (or `None`).
    pub fn range_of(&self, model: &GibbsModel) -> Option<f64> {
        self.profile_index().map(|p| model.params()[p])
    }

    /// Centre of the free box.
    pub fn center(&self) -> Vec<f64> {
        let (lo, hi) = self.free_bounds();
        lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    /// Whether every non-pinned parameter of `model` lies in the box.
    pub fn contains(&self, model: &GibbsModel) -> bool {
        let v = model.params();
        (0..self.names.len()).all(|i| match self.roles[i] {
            Role::Fixed => v[i] == self.fixed[i],
            _ => self.lo[i] <= v[i] && v[i] <= self.hi[i],
        })
    }
}
