//! `key=value` form of a model, shared by model files and manifests.

use std::collections::BTreeMap;

use super::{GibbsModel, Interaction, LennardJones, ModelError, ModelKind, Piece};

impl GibbsModel {
    /// `kind`, `delta`, then the parameters in [`GibbsModel::param_names`]
    /// order (plus `cutoff` for Lennard-Jones).
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("kind".to_string(), self.kind().name().to_string()),
            ("delta".to_string(), self.delta().to_string()),
        ];
        for (n, v) in self.param_names().into_iter().zip(self.params()) {
            kv.push((n, v.to_string()));
        }
        if let Interaction::LennardJones(lj) = self.interaction() {
            kv.push(("cutoff".into(), lj.cutoff.to_string()));
        }
        kv
    }

    /// Inverse of [`GibbsModel::to_key_values`]. `kind=strauss` with a
    /// positive `delta` means hardcore Strauss; `kind=poisson` needs only `z`.
    /// A Lennard-Jones model without `cutoff` uses the default truncation for
    /// a window whose shorter side is `min_side` (required in that case).
    pub fn from_key_values(
        kv: &BTreeMap<String, String>,
        min_side: Option<f64>,
    ) -> Result<Self, ModelError> {
        let kind = kv
            .get("kind")
            .ok_or_else(|| ModelError::InvalidParameter("missing `kind`".into()))?
            .trim()
            .to_ascii_lowercase();
        let num = |key: &str| -> Result<Option<f64>, ModelError> {
            kv.get(key)
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|e| {
                        ModelError::InvalidParameter(format!("`{key}={s}`: {e}"))
                    })
                })
                .transpose()
        };
        let req = |key: &str| -> Result<f64, ModelError> {
            num(key)?.ok_or_else(|| ModelError::InvalidParameter(format!("missing `{key}`")))
        };
        let delta = num("delta")?.unwrap_or(0.0);
        let z = req("z")?;
        let allowed: Vec<String>;
        let model = match kind.as_str() {
            "poisson" => {
                allowed = keys(&["z", "delta"]);
                GibbsModel::poisson(z)?
            }
            "strauss" | "hardcore_strauss" => {
                allowed = keys(&["z", "delta", "beta", "range"]);
                let (beta, range) = (req("beta")?, req("range")?);
                if kind == "hardcore_strauss" || delta > 0.0 {
                    GibbsModel::hardcore_strauss(delta, z, beta, range)?
                } else {
                    GibbsModel::strauss(z, beta, range)?
                }
            }
            "piecewise" => {
                let mut q = 0;
                while kv.contains_key(&format!("beta{}", q + 1)) {
                    q += 1;
                }
                let mut a = keys(&["z", "delta"]);
                let mut pieces = Vec::with_capacity(q);
                let mut breaks = Vec::with_capacity(q);
                for k in 1..=q {
                    pieces.push(Piece {
                        beta: req(&format!("beta{k}"))?,
                        decay: num(&format!("decay{k}"))?.unwrap_or(0.0),
                    });
                    breaks.push(req(&format!("range{k}"))?);
                    a.extend([format!("beta{k}"), format!("range{k}"), format!("decay{k}")]);
                }
                allowed = a;
                GibbsModel::piecewise(delta, z, pieces, breaks)?
            }
            "lennard_jones" | "lj" => {
                allowed = keys(&["z", "delta", "a", "b", "n", "m", "cutoff"]);
                let (a, b, n, m) = (req("a")?, req("b")?, req("n")?, req("m")?);
                let cutoff = match (num("cutoff")?, min_side) {
                    (Some(c), _) => c,
                    (None, Some(s)) => LennardJones::default_cutoff(a, b, n, m, s),
                    (None, None) => {
                        return Err(ModelError::InvalidParameter(
                            "Lennard-Jones needs `cutoff` or a window".into(),
                        ))
                    }
                };
                GibbsModel::lennard_jones(z, LennardJones::new(a, b, n, m, cutoff)?)?
            }
            "area_interaction" | "area" => {
                allowed = keys(&["z", "delta", "beta", "range"]);
                GibbsModel::area_interaction(z, req("beta")?, req("range")?)?
            }
            other => {
                return Err(ModelError::InvalidParameter(format!("unknown model kind `{other}`")))
            }
        };
        if let Some(k) = kv.keys().find(|k| *k != "kind" && !allowed.contains(k)) {
            return Err(ModelError::UnknownParameter(k.clone()));
        }
        if delta > 0.0 && !model.kind().has_hardcore() {
            return Err(ModelError::InvalidParameter(format!(
                "{} has no hardcore parameter",
                model.kind()
            )));
        }
        Ok(model)
    }
}

fn keys(k: &[&str]) -> Vec<String> {
    k.iter().map(|s| s.to_string()).collect()
}

impl ModelKind {
    pub fn parse(s: &str) -> Option<ModelKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "strauss" | "poisson" => Some(ModelKind::Strauss),
            "hardcore_strauss" => Some(ModelKind::HardcoreStrauss),
            "piecewise" => Some(ModelKind::PiecewisePair),
            "lennard_jones" | "lj" => Some(ModelKind::LennardJones),
            "area_interaction" | "area" => Some(ModelKind::AreaInteraction),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn strauss_with_delta_is_hardcore() {
        let m = GibbsModel::from_key_values(
            &map(&[("kind", "strauss"), ("delta", "0.05"), ("z", "1"), ("beta", "0.7"), ("range", "0.1")]),
            None,
        )
        .unwrap();
        assert_eq!(m.kind(), ModelKind::HardcoreStrauss);
    }

    #[test]
    fn nonexistent_model_rejected() {
        let err = GibbsModel::from_key_values(
            &map(&[("kind", "strauss"), ("z", "1"), ("beta", "-0.7"), ("range", "0.1")]),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::NonexistentModel { .. }));
    }

    #[test]
    fn round_trips() {
        let lj = LennardJones::new(1.0, 0.5, 12.0, 6.0, 2.0).unwrap();
        let models = [
            GibbsModel::strauss(0.3, 0.7, 0.1).unwrap(),
            GibbsModel::hardcore_strauss(0.02, 0.3, -0.7, 0.1).unwrap(),
            GibbsModel::piecewise(
                0.01,
                0.2,
                vec![Piece::constant(1.0), Piece { beta: -0.5, decay: 2.0 }],
                vec![0.1, 0.3],
            )
            .unwrap(),
            GibbsModel::lennard_jones(0.1, lj).unwrap(),
            GibbsModel::area_interaction(0.1, 2.0, 0.2).unwrap(),
        ];
        for m in models {
            let kv: BTreeMap<String, String> = m.to_key_values().into_iter().collect();
            assert_eq!(GibbsModel::from_key_values(&kv, None).unwrap(), m);
        }
    }

    #[test]
    fn unknown_keys_and_default_cutoff() {
        let err = GibbsModel::from_key_values(&map(&[("kind", "poisson"), ("z", "1"), ("bogus", "2")]), None)
            .unwrap_err();
        assert!(matches!(err, ModelError::UnknownParameter(_)));
        let m = GibbsModel::from_key_values(
            &map(&[("kind", "lj"), ("z", "0"), ("a", "1"), ("b", "1"), ("n", "12"), ("m", "6")]),
            Some(4.0),
        )
        .unwrap();
        assert_eq!(m.interaction_range(), 2.0);
    }
}
