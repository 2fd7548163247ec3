//! A sample set on disk: `manifest.txt` (key=value), `energies.csv` and one
//! pattern file per draw.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::geometry::io::{load_pattern, save_pattern, PatternIoError};
use crate::geometry::{GeometryError, Window};
use crate::models::{GibbsModel, ModelError};

use super::{Boundary, ChainDiagnostics, MoveCounts, SampleSet, SamplerConfig};

#[derive(Debug, Error)]
pub enum SampleIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Pattern(#[from] PatternIoError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("manifest: {0}")]
    Manifest(String),
}

fn draw_name(i: usize) -> String {
    format!("draw_{i:05}.csv")
}

pub fn write_sample_set(dir: impl AsRef<Path>, set: &SampleSet) -> Result<(), SampleIoError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut m = String::new();
    for (k, v) in set.model.to_key_values() {
        writeln!(m, "model.{k}={v}").unwrap();
    }
    let (lo, hi) = (set.window.lower(), set.window.upper());
    if set.window.dim() == 2 {
        writeln!(m, "window={} {} {} {}", lo[0], hi[0], lo[1], hi[1]).unwrap();
    } else {
        writeln!(m, "window={} {}", lo[0], hi[0]).unwrap();
    }
    let seeds: Vec<String> = set.seeds.iter().map(u64::to_string).collect();
    writeln!(m, "seeds={}", seeds.join(",")).unwrap();
    let c = &set.config;
    writeln!(m, "sweeps={}", c.sweeps).unwrap();
    writeln!(m, "burn_in={}", c.burn_in).unwrap();
    writeln!(m, "thin={}", c.thin).unwrap();
    writeln!(m, "p_birth={}", c.p_birth).unwrap();
    writeln!(m, "p_death={}", c.p_death).unwrap();
    writeln!(m, "p_move={}", c.p_move).unwrap();
    writeln!(m, "move_radius={}", c.move_radius).unwrap();
    writeln!(m, "seed={}", c.seed).unwrap();
    let boundary = match c.boundary {
        Boundary::Free => "free",
        Boundary::Periodic => "periodic",
    };
    writeln!(m, "boundary={boundary}").unwrap();
    writeln!(m, "draws={}", set.draws.len()).unwrap();
    let d = &set.diagnostics;
    writeln!(m, "acceptance={}", d.acceptance()).unwrap();
    for (name, mc) in [("birth", d.birth), ("death", d.death), ("move", d.moves)] {
        writeln!(m, "{name}_proposed={}", mc.proposed).unwrap();
        writeln!(m, "{name}_accepted={}", mc.accepted).unwrap();
    }
    writeln!(m, "burn_in_acceptance={}", d.burn_in_acceptance).unwrap();
    writeln!(m, "max_energy_drift={}", d.max_energy_drift).unwrap();
    writeln!(m, "non_ergodic={}", d.non_ergodic).unwrap();
    fs::write(dir.join("manifest.txt"), m)?;

    let mut e = String::from("energy\n");
    for v in &set.energies {
        writeln!(e, "{v}").unwrap();
    }
    fs::write(dir.join("energies.csv"), e)?;
    for (i, draw) in set.draws.iter().enumerate() {
        save_pattern(dir.join(draw_name(i)), draw)?;
    }
    Ok(())
}

pub fn read_sample_set(dir: impl AsRef<Path>) -> Result<SampleSet, SampleIoError> {
    let dir = dir.as_ref();
    let text = fs::read_to_string(dir.join("manifest.txt"))?;
    let mut kv = BTreeMap::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| SampleIoError::Manifest(format!("not key=value: `{line}`")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |k: &str| {
        kv.get(k)
            .cloned()
            .ok_or_else(|| SampleIoError::Manifest(format!("missing `{k}`")))
    };
    fn parse<T: std::str::FromStr>(k: &str, v: String) -> Result<T, SampleIoError> {
        v.parse()
            .map_err(|_| SampleIoError::Manifest(format!("bad value for `{k}`: `{v}`")))
    }
    let model_kv: BTreeMap<String, String> = kv
        .iter()
        .filter_map(|(k, v)| k.strip_prefix("model.").map(|k| (k.to_string(), v.clone())))
        .collect();
    let model = GibbsModel::from_key_values(&model_kv, None)?;
    let wv: Vec<f64> = get("window")?
        .split_whitespace()
        .map(|s| parse("window", s.to_string()))
        .collect::<Result<_, _>>()?;
    let window = match wv.len() {
        2 => Window::interval(wv[0], wv[1])?,
        4 => Window::rect(wv[0], wv[1], wv[2], wv[3])?,
        _ => return Err(SampleIoError::Manifest("window needs 2 or 4 numbers".into())),
    };
    let seeds = get("seeds")?
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| parse("seeds", s.to_string()))
        .collect::<Result<Vec<u64>, _>>()?;
    let boundary = match get("boundary")?.as_str() {
        "free" => Boundary::Free,
        "periodic" => Boundary::Periodic,
        other => return Err(SampleIoError::Manifest(format!("unknown boundary `{other}`"))),
    };
    let config = SamplerConfig {
        sweeps: parse("sweeps", get("sweeps")?)?,
        burn_in: parse("burn_in", get("burn_in")?)?,
        thin: parse("thin", get("thin")?)?,
        p_birth: parse("p_birth", get("p_birth")?)?,
        p_death: parse("p_death", get("p_death")?)?,
        p_move: parse("p_move", get("p_move")?)?,
        move_radius: parse("move_radius", get("move_radius")?)?,
        seed: parse("seed", get("seed")?)?,
        boundary,
    };
    let counts = |name: &str| -> Result<MoveCounts, SampleIoError> {
        Ok(MoveCounts {
            proposed: parse("proposed", get(&format!("{name}_proposed"))?)?,
            accepted: parse("accepted", get(&format!("{name}_accepted"))?)?,
        })
    };
    let diagnostics = ChainDiagnostics {
        birth: counts("birth")?,
        death: counts("death")?,
        moves: counts("move")?,
        burn_in_acceptance: parse("burn_in_acceptance", get("burn_in_acceptance")?)?,
        max_energy_drift: parse("max_energy_drift", get("max_energy_drift")?)?,
        non_ergodic: parse("non_ergodic", get("non_ergodic")?)?,
    };
    let n: usize = parse("draws", get("draws")?)?;
    let draws = (0..n)
        .map(|i| load_pattern(dir.join(draw_name(i))))
        .collect::<Result<Vec<_>, _>>()?;
    let energies = fs::read_to_string(dir.join("energies.csv"))?
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse("energy", l.trim().to_string()))
        .collect::<Result<Vec<f64>, _>>()?;
    if energies.len() != n {
        return Err(SampleIoError::Manifest(format!(
            "{} energies for {n} draws",
            energies.len()
        )));
    }
    Ok(SampleSet {
        model,
        window,
        config,
        seeds,
        draws,
        energies,
        diagnostics,
    })
}
