//! Window-growth consistency experiments: simulate the true model on each
//! `Λ_n` of a ladder, refit, and summarize the absolute errors per rung.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use gibbs_core::estimator::{mc_mle, pseudolikelihood_fit};
use gibbs_core::rng::derive_seed;
use gibbs_core::sampler::run_chain;
use gibbs_core::stats::{iqr, median};
use gibbs_core::{GibbsModel, OptimizerConfig, PointConfig, SamplerConfig, Window};
use log::{info, warn};
use rayon::prelude::*;

use crate::commands::FitMethodArg;
use crate::config::{apply_optimizer_keys, model_from_key_values, read_key_values};
use crate::plot::error_plot_svg;

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub truth: GibbsModel,
    pub dim: usize,
    /// Half-widths `n` of the windows `[-n, n]^d`, strictly increasing.
    pub ladder: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    /// Chain producing each synthetic observation (its last draw is used).
    pub data_sampler: SamplerConfig,
    pub fit_sampler: SamplerConfig,
    pub optimizer: OptimizerConfig,
    pub method: FitMethodArg,
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(truth: GibbsModel, ladder: Vec<f64>, replicates: usize, seed: u64) -> Result<Self> {
        let spec = ExperimentSpec {
            truth,
            dim: 2,
            ladder,
            replicates,
            seed,
            data_sampler: SamplerConfig::default(),
            fit_sampler: SamplerConfig::default(),
            optimizer: OptimizerConfig::default(),
            method: FitMethodArg::McMle,
            out: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ladder.is_empty() || self.ladder.windows(2).any(|p| !(p[0] < p[1])) {
            bail!("window ladder must be nonempty and strictly increasing: {:?}", self.ladder);
        }
        if self.ladder.iter().any(|n| !(*n > 0.0)) {
            bail!("window half-widths must be positive");
        }
        if self.replicates == 0 {
            bail!("replicates must be >= 1");
        }
        self.truth.check_dimension(self.dim)?;
        Ok(())
    }

    /// Reads a key-value spec: `model.*` keys for the truth, `ladder`
    /// (comma list), `replicates`, `seed`, `dim`, `method`, `sweeps`,
    /// `burn_in`, `thin`, `data_sweeps`, `out`, plus optimizer keys.
    pub fn from_file(path: &Path) -> Result<Self> {
        let kv = read_key_values(path)?;
        Self::from_key_values(&kv).with_context(|| format!("experiment spec {}", path.display()))
    }

    pub fn from_key_values(kv: &BTreeMap<String, String>) -> Result<Self> {
        let num = |k: &str| -> Result<Option<f64>> {
            kv.get(k)
                .map(|v| v.trim().parse::<f64>().with_context(|| format!("`{k}={v}`")))
                .transpose()
        };
        let ladder: Vec<f64> = kv
            .get("ladder")
            .context("missing `ladder`")?
            .split(',')
            .map(|s| s.trim().parse::<f64>().with_context(|| format!("ladder entry `{s}`")))
            .collect::<Result<_>>()?;
        let dim = num("dim")?.unwrap_or(2.0) as usize;
        let min_side = 2.0 * ladder.first().copied().unwrap_or(1.0);
        let model_kv: BTreeMap<String, String> = kv
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("model.").map(|k| (k.to_string(), v.clone())))
            .collect();
        let truth = model_from_key_values(&model_kv, Some(min_side))?;
        let mut spec = ExperimentSpec::new(
            truth,
            ladder,
            num("replicates")?.unwrap_or(20.0) as usize,
            num("seed")?.unwrap_or(1.0) as u64,
        )?;
        spec.dim = dim;
        if let Some(v) = num("sweeps")? {
            spec.fit_sampler.sweeps = v as usize;
        }
        if let Some(v) = num("burn_in")? {
            spec.fit_sampler.burn_in = v as usize;
        }
        if let Some(v) = num("thin")? {
            spec.fit_sampler.thin = v as usize;
        }
        if let Some(v) = num("data_sweeps")? {
            spec.data_sampler.sweeps = v as usize;
        }
        spec.method = match kv.get("method").map(String::as_str) {
            None | Some("mcmle") | Some("mc_mle") => FitMethodArg::McMle,
            Some("pl") | Some("pseudolikelihood") => FitMethodArg::Pseudolikelihood,
            Some(m) => bail!("unknown method `{m}`"),
        };
        apply_optimizer_keys(&mut spec.optimizer, kv)?;
        spec.out = kv.get("out").map(PathBuf::from);
        spec.validate()?;
        Ok(spec)
    }

    /// Names of the reported errors: `delta` for hardcore families, then
    /// every parameter of the truth.
    pub fn error_names(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.truth.kind().has_hardcore() {
            v.push("delta".to_string());
        }
        v.extend(self.truth.param_names());
        v
    }

    fn truth_values(&self) -> Vec<f64> {
        let mut v = Vec::new();
        if self.truth.kind().has_hardcore() {
            v.push(self.truth.delta());
        }
        v.extend(self.truth.params());
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateRow {
    pub n: f64,
    pub replicate: usize,
    pub data_seed: u64,
    pub fit_seed: u64,
    pub points: usize,
    /// Estimates in the order of [`ExperimentSpec::error_names`]; empty when
    /// the fit failed.
    pub estimates: Vec<f64>,
    pub errors: Vec<f64>,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RungSummary {
    pub n: f64,
    pub fits: usize,
    pub failures: usize,
    pub median: Vec<f64>,
    pub iqr: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    pub names: Vec<String>,
    pub truth: Vec<f64>,
    pub rows: Vec<ReplicateRow>,
    pub rungs: Vec<RungSummary>,
    pub runtime_secs: f64,
}

impl ConsistencyReport {
    pub fn rung(&self, n: f64) -> Option<&RungSummary> {
        self.rungs.iter().find(|r| r.n == n)
    }

    /// Median absolute error of `name` at rung `n`.
    pub fn median_error(&self, n: f64, name: &str) -> Option<f64> {
        let i = self.names.iter().position(|x| x == name)?;
        self.rung(n).map(|r| r.median[i])
    }

    pub fn rows_csv(&self) -> String {
        let mut s = String::from("n,replicate,data_seed,fit_seed,points,status");
        for n in &self.names {
            write!(s, ",{n}_hat").unwrap();
        }
        for n in &self.names {
            write!(s, ",{n}_abs_error").unwrap();
        }
        s.push('\n');
        for r in &self.rows {
            write!(s, "{},{},{},{},{},{}", r.n, r.replicate, r.data_seed, r.fit_seed, r.points, r.status).unwrap();
            for i in 0..self.names.len() {
                write!(s, ",{}", r.estimates.get(i).map_or(String::new(), f64::to_string)).unwrap();
            }
            for i in 0..self.names.len() {
                write!(s, ",{}", r.errors.get(i).map_or(String::new(), f64::to_string)).unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("n,fits,failures");
        for n in &self.names {
            write!(s, ",{n}_median,{n}_iqr").unwrap();
        }
        s.push('\n');
        for r in &self.rungs {
            write!(s, "{},{},{}", r.n, r.fits, r.failures).unwrap();
            for i in 0..self.names.len() {
                write!(s, ",{},{}", r.median[i], r.iqr[i]).unwrap();
            }
            s.push('\n');
        }
        writeln!(s, "# runtime_secs={:.1}", self.runtime_secs).unwrap();
        s
    }

    /// Writes `replicates.csv`, `summary.csv` and `errors.svg`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("replicates.csv"), self.rows_csv())?;
        fs::write(dir.join("summary.csv"), self.summary_csv())?;
        fs::write(dir.join("errors.svg"), error_plot_svg(self))?;
        Ok(())
    }
}

/// One synthetic observation: the last draw of a chain for `truth` on `w`.
pub fn simulate_observation(truth: &GibbsModel, w: &Window, cfg: &SamplerConfig) -> Result<PointConfig> {
    let set = run_chain(truth, w, cfg)?;
    set.draws.into_iter().last().context("the data sampler yields no draws")
}

fn run_replicate(spec: &ExperimentSpec, rung: usize, n: f64, r: usize) -> ReplicateRow {
    let stream = 2 * (rung * spec.replicates + r) as u64;
    let data_seed = derive_seed(spec.seed, stream);
    let fit_seed = derive_seed(spec.seed, stream + 1);
    let mut row = ReplicateRow {
        n,
        replicate: r,
        data_seed,
        fit_seed,
        points: 0,
        estimates: Vec::new(),
        errors: Vec::new(),
        status: "ok".into(),
    };
    let result = (|| -> Result<Vec<f64>> {
        let w = Window::centered(n, spec.dim)?;
        let data = simulate_observation(&spec.truth, &w, &spec.data_sampler.with_seed(data_seed))?;
        row.points = data.len();
        let fit = match spec.method {
            FitMethodArg::McMle => mc_mle(&data, &w, &spec.truth, &spec.optimizer, &spec.fit_sampler.with_seed(fit_seed))?,
            FitMethodArg::Pseudolikelihood => pseudolikelihood_fit(&data, &w, &spec.truth, &spec.optimizer)?,
        };
        let mut est = Vec::new();
        if spec.truth.kind().has_hardcore() {
            est.push(fit.delta_hat);
        }
        est.extend(fit.model.params());
        Ok(est)
    })();
    match result {
        Ok(est) => {
            row.errors = est.iter().zip(spec.truth_values()).map(|(a, b)| (a - b).abs()).collect();
            row.estimates = est;
        }
        Err(e) => {
            warn!("n={n} replicate {r}: {e:#}");
            row.status = format!("error: {}", e.to_string().replace(',', ";"));
        }
    }
    info!("n={n} replicate {r}: {}", row.status);
    row
}

pub fn run_consistency(spec: &ExperimentSpec) -> Result<ConsistencyReport> {
    spec.validate()?;
    let start = Instant::now();
    let names = spec.error_names();
    let jobs: Vec<(usize, f64, usize)> = spec
        .ladder
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| (0..spec.replicates).map(move |r| (i, n, r)))
        .collect();
    let rows: Vec<ReplicateRow> = jobs
        .par_iter()
        .map(|&(i, n, r)| run_replicate(spec, i, n, r))
        .collect();
    let rungs = spec
        .ladder
        .iter()
        .map(|&n| {
            let ok: Vec<&ReplicateRow> = rows.iter().filter(|r| r.n == n && !r.errors.is_empty()).collect();
            let col = |i: usize| -> Vec<f64> { ok.iter().map(|r| r.errors[i]).collect() };
            RungSummary {
                n,
                fits: ok.len(),
                failures: spec.replicates - ok.len(),
                median: (0..names.len()).map(|i| median(&col(i))).collect(),
                iqr: (0..names.len()).map(|i| iqr(&col(i))).collect(),
            }
        })
        .collect();
    let report = ConsistencyReport {
        names,
        truth: spec.truth_values(),
        rows,
        rungs,
        runtime_secs: start.elapsed().as_secs_f64(),
    };
    if let Some(dir) = &spec.out {
        report.write(dir)?;
    }
    Ok(report)
}
