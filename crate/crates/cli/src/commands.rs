use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::Context;
use gibbs_core::estimator::{mc_mle, pseudolikelihood_fit, EstimatorError};
use gibbs_core::geometry::io::{load_pattern, save_pattern};
use gibbs_core::models::{GibbsModel, Interaction};
use gibbs_core::rng::derive_seeds;
use gibbs_core::sampler::{gnz_residual, run_chain, run_chains, write_sample_set, TestFunction};
use gibbs_core::{FitResult, OptimizerConfig, SampleSet, SamplerConfig, Window};
use log::warn;
use thiserror::Error;

use crate::config::load_model;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("infeasible data: {0}")]
    Infeasible(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{0:#}")]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Other(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::Validation(_) => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// `Λ_n = [-n, n]^d`.
pub fn window_for(n: f64, dim: usize) -> CliResult<Window> {
    if !(dim == 1 || dim == 2) {
        return Err(CliError::Usage(format!("dimension must be 1 or 2, got {dim}")));
    }
    Window::centered(n, dim).map_err(|e| CliError::Usage(e.to_string()))
}

#[derive(Clone, Debug)]
pub struct SimulateArgs {
    pub model: PathBuf,
    pub window: f64,
    pub dim: usize,
    pub sampler: SamplerConfig,
    pub out: PathBuf,
}

/// Runs one chain and writes the sample set plus `pattern.csv`, its last
/// draw. Returns the pattern path.
pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<PathBuf> {
    let w = window_for(args.window, args.dim)?;
    let model = load_model(&args.model, Some(w.min_side()))?;
    model.check_dimension(w.dim()).map_err(anyhow::Error::from)?;
    let set = run_chain(&model, &w, &args.sampler).map_err(anyhow::Error::from)?;
    write_sample_set(&args.out, &set).map_err(anyhow::Error::from)?;
    let last = set
        .draws
        .last()
        .ok_or_else(|| CliError::Usage("the sampler configuration yields no draws".into()))?;
    let path = args.out.join("pattern.csv");
    save_pattern(&path, last).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitMethodArg {
    McMle,
    Pseudolikelihood,
}

#[derive(Clone, Debug)]
pub struct FitArgs {
    pub data: PathBuf,
    /// Model file giving the family (kind and shape parameters).
    pub model: Option<PathBuf>,
    /// Family by name when no model file is given.
    pub kind: Option<String>,
    /// Fit on `Λ_n` instead of the data's own window.
    pub window: Option<f64>,
    pub bounds: BTreeMap<String, (f64, f64)>,
    pub delta_interval: Option<(f64, f64)>,
    pub method: FitMethodArg,
    pub sampler: SamplerConfig,
    pub bridge_legs: usize,
    pub out: Option<PathBuf>,
}

/// Family template and pins for a kind given by name.
pub fn family_for_kind(kind: &str) -> CliResult<(GibbsModel, BTreeMap<String, (f64, f64)>)> {
    let mut pins = BTreeMap::new();
    let m = match kind.to_ascii_lowercase().as_str() {
        "poisson" => {
            pins.insert("beta".to_string(), (0.0, 0.0));
            pins.insert("range".to_string(), (0.0, 0.0));
            GibbsModel::poisson(0.0)
        }
        "strauss" => GibbsModel::strauss(0.0, 0.0, 0.1),
        "hardcore_strauss" => GibbsModel::hardcore_strauss(0.01, 0.0, 0.0, 0.1),
        "area_interaction" | "area" => GibbsModel::area_interaction(0.0, 0.0, 0.1),
        other => {
            return Err(CliError::Usage(format!(
                "kind `{other}` needs a model file (--model) for its shape parameters"
            )))
        }
    };
    Ok((m.map_err(anyhow::Error::from)?, pins))
}

fn estimator_error(e: EstimatorError) -> CliError {
    match e {
        EstimatorError::InfeasibleData(m) => CliError::Infeasible(m),
        other => CliError::Other(other.into()),
    }
}

/// Loads the data, fits, and writes `fit.txt` and `trace.csv` under `out`.
pub fn cmd_fit(args: &FitArgs) -> CliResult<FitResult> {
    let data = load_pattern(&args.data).with_context(|| format!("reading {}", args.data.display()))?;
    let w = match args.window {
        Some(n) => window_for(n, data.window().dim())?,
        None => *data.window(),
    };
    let (family, mut bounds) = match (&args.model, &args.kind) {
        (Some(p), _) => (load_model(p, Some(w.min_side()))?, BTreeMap::new()),
        (None, Some(k)) => family_for_kind(k)?,
        (None, None) => return Err(CliError::Usage("fit needs --model or --kind".into())),
    };
    bounds.extend(args.bounds.clone());
    let mut ocfg = OptimizerConfig {
        bounds,
        bridge_legs: args.bridge_legs,
        ..OptimizerConfig::default()
    };
    if let Some(i) = args.delta_interval {
        ocfg.delta_interval = i;
    }
    let fit = match args.method {
        FitMethodArg::McMle => mc_mle(&data, &w, &family, &ocfg, &args.sampler),
        FitMethodArg::Pseudolikelihood => pseudolikelihood_fit(&data, &w, &family, &ocfg),
    }
    .map_err(estimator_error)?;
    for msg in &fit.warnings {
        warn!("{msg}");
    }
    if let Some(out) = &args.out {
        write_fit(out, &fit)?;
    }
    Ok(fit)
}

pub fn write_fit(out: &Path, fit: &FitResult) -> CliResult<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let rec = out.join("fit.txt");
    fit.write_record(BufWriter::new(File::create(&rec).context("fit.txt")?))
        .with_context(|| format!("writing {}", rec.display()))?;
    let tr = out.join("trace.csv");
    fit.write_trace_csv(BufWriter::new(File::create(&tr).context("trace.csv")?))
        .with_context(|| format!("writing {}", tr.display()))?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ValidateArgs {
    pub model: PathBuf,
    pub window: f64,
    pub dim: usize,
    pub sampler: SamplerConfig,
    pub chains: usize,
    /// Residuals beyond this many standard errors fail.
    pub sigmas: f64,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationRow {
    pub test: String,
    pub value: f64,
    pub std_error: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub model: String,
    pub draws: usize,
    pub acceptance: f64,
    pub rows: Vec<ValidationRow>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("test,value,std_error,z_score,pass\n");
        for r in &self.rows {
            let zs = if r.std_error > 0.0 { r.value / r.std_error } else { 0.0 };
            writeln!(s, "{},{},{},{},{}", r.test, r.value, r.std_error, zs, r.pass).unwrap();
        }
        s
    }
}

/// Radius used by the neighbour-count test function.
pub fn neighbor_radius(model: &GibbsModel) -> f64 {
    match model.interaction() {
        Interaction::Area(a) => a.radius,
        _ => model.interaction_range(),
    }
}

/// GNZ residuals for `f ≡ 1` and the neighbour count, on merged chains.
pub fn validate_samples(samples: &SampleSet, model: &GibbsModel, w: &Window, sigmas: f64) -> ValidationReport {
    let r = neighbor_radius(model);
    let tests = [
        ("constant".to_string(), TestFunction::Constant(1.0)),
        (format!("neighbors_{r}"), TestFunction::NeighborCount(r)),
    ];
    let rows = tests
        .into_iter()
        .map(|(name, f)| {
            let e = gnz_residual(samples, model, w, &f);
            ValidationRow {
                test: name,
                value: e.value,
                std_error: e.std_error,
                pass: e.within(sigmas),
            }
        })
        .collect();
    ValidationReport {
        model: model.fingerprint(),
        draws: samples.len(),
        acceptance: samples.diagnostics.acceptance(),
        rows,
    }
}

/// Simulates and checks the sampler against the GNZ equation; a failed
/// check is an error (exit code 3) after the report is written.
pub fn cmd_validate(args: &ValidateArgs) -> CliResult<ValidationReport> {
    let w = window_for(args.window, args.dim)?;
    let model = load_model(&args.model, Some(w.min_side()))?;
    model.check_dimension(w.dim()).map_err(anyhow::Error::from)?;
    let seeds = derive_seeds(args.sampler.seed, args.chains.max(1));
    let set = run_chains(&model, &w, &args.sampler, &seeds).map_err(anyhow::Error::from)?;
    let report = validate_samples(&set, &model, &w, args.sigmas);
    if let Some(out) = &args.out {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        fs::write(out.join("validation.csv"), report.to_csv()).context("writing validation.csv")?;
    }
    if !report.passed() {
        let bad: Vec<&str> = report.rows.iter().filter(|r| !r.pass).map(|r| r.test.as_str()).collect();
        return Err(CliError::Validation(format!(
            "GNZ residual beyond {} SE for {}",
            args.sigmas,
            bad.join(", ")
        )));
    }
    Ok(report)
}
