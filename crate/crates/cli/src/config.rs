//! Text key-value configuration: model files, `--box` flags and experiment
//! specs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use gibbs_core::estimator::{OptimizerConfig, RangeGrid};
use gibbs_core::GibbsModel;

/// `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut kv = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key=value, got `{t}`", i + 1))?;
        if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            bail!("line {}: duplicate key `{}`", i + 1, k.trim());
        }
    }
    Ok(kv)
}

pub fn read_key_values(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_key_values(&text).with_context(|| format!("parsing {}", path.display()))
}

/// A model from key-value pairs; `min_side` supplies the default
/// Lennard-Jones cutoff.
pub fn model_from_key_values(kv: &BTreeMap<String, String>, min_side: Option<f64>) -> Result<GibbsModel> {
    Ok(GibbsModel::from_key_values(kv, min_side)?)
}

pub fn load_model(path: &Path, min_side: Option<f64>) -> Result<GibbsModel> {
    let kv = read_key_values(path)?;
    model_from_key_values(&kv, min_side).with_context(|| format!("model file {}", path.display()))
}

/// `lo:hi` or a single value (pinned).
pub fn parse_interval(s: &str) -> Result<(f64, f64)> {
    let num = |t: &str| -> Result<f64> {
        let t = t.trim();
        match t {
            "inf" | "+inf" => Ok(f64::INFINITY),
            _ => t.parse().map_err(|_| anyhow!("not a number: `{t}`")),
        }
    };
    match s.split_once(':') {
        Some((a, b)) => Ok((num(a)?, num(b)?)),
        None => {
            let v = num(s)?;
            Ok((v, v))
        }
    }
}

/// `param=lo:hi,param=value,...`
pub fn parse_box(s: &str) -> Result<BTreeMap<String, (f64, f64)>> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("box entry `{part}` is not param=lo:hi"))?;
        let (lo, hi) = parse_interval(v)?;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            bail!("box entry `{part}` is not a finite nonempty interval");
        }
        out.insert(k.trim().to_string(), (lo, hi));
    }
    Ok(out)
}

/// Fills `o` from `box.<param>`, `delta_min`, `delta_max`, `restarts`,
/// `max_rounds`, `range_grid` and `quadrature` keys.
pub fn apply_optimizer_keys(o: &mut OptimizerConfig, kv: &BTreeMap<String, String>) -> Result<()> {
    for (k, v) in kv {
        if let Some(p) = k.strip_prefix("box.") {
            let (lo, hi) = parse_interval(v)?;
            o.bounds.insert(p.to_string(), (lo, hi));
        }
    }
    let num = |k: &str| -> Result<Option<f64>> {
        kv.get(k)
            .map(|v| parse_interval(v).map(|x| x.0))
            .transpose()
            .with_context(|| format!("`{k}`"))
    };
    if let Some(v) = num("delta_min")? {
        o.delta_interval.0 = v;
    }
    if let Some(v) = num("delta_max")? {
        o.delta_interval.1 = v;
    }
    if let Some(v) = num("restarts")? {
        o.restarts = v as usize;
    }
    if let Some(v) = num("max_rounds")? {
        o.max_rounds = v as usize;
    }
    if let Some(v) = num("quadrature")? {
        o.quadrature = Some(v as usize);
    }
    if let Some(g) = kv.get("range_grid") {
        o.range_grid = parse_range_grid(g)?;
    }
    Ok(())
}

/// `auto`, `observed`, `uniform:<n>` or a comma-free list `v1;v2;...`.
pub fn parse_range_grid(s: &str) -> Result<RangeGrid> {
    let s = s.trim();
    Ok(match s {
        "auto" => RangeGrid::Auto,
        "observed" => RangeGrid::Observed,
        _ => {
            if let Some(n) = s.strip_prefix("uniform:") {
                RangeGrid::Uniform(n.trim().parse().map_err(|_| anyhow!("bad grid size `{n}`"))?)
            } else {
                let v = s
                    .split(';')
                    .map(|t| t.trim().parse::<f64>().map_err(|_| anyhow!("bad range `{t}`")))
                    .collect::<Result<Vec<_>>>()?;
                RangeGrid::Values(v)
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values() {
        let kv = parse_key_values("# model\nkind = strauss\nz=0.3\n\nbeta=0.7\n").unwrap();
        assert_eq!(kv["kind"], "strauss");
        assert_eq!(kv.len(), 3);
        assert!(parse_key_values("z=1\nz=2").is_err());
        assert!(parse_key_values("oops").is_err());
    }

    #[test]
    fn boxes() {
        let b = parse_box("beta=0:5, range=0.1").unwrap();
        assert_eq!(b["beta"], (0.0, 5.0));
        assert_eq!(b["range"], (0.1, 0.1));
        assert!(parse_box("beta=5:0").is_err());
        assert!(parse_box("beta").is_err());
    }

    #[test]
    fn range_grids() {
        assert_eq!(parse_range_grid("uniform:8").unwrap(), RangeGrid::Uniform(8));
        assert_eq!(parse_range_grid("0.1;0.2").unwrap(), RangeGrid::Values(vec![0.1, 0.2]));
    }
}
