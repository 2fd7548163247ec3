use std::fmt;
use std::io::{self, Write};

use crate::models::{GibbsModel, Interaction};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitMethod {
    McMle,
    Pseudolikelihood,
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitMethod::McMle => "mc_mle",
            FitMethod::Pseudolikelihood => "pseudolikelihood",
        })
    }
}

/// One optimizer run: a simplex or Newton solve at a fixed range candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub round: usize,
    pub stage: &'static str,
    /// Profiled range, `NaN` when nothing is profiled.
    pub range: f64,
    pub start: usize,
    pub evals: usize,
    pub params: Vec<f64>,
    pub value: f64,
    /// ESS of the importance weights at `params` (`NaN` for pseudolikelihood).
    pub ess: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub method: FitMethod,
    /// Fitted model; its `δ` is `delta_hat`.
    pub model: GibbsModel,
    pub delta_hat: f64,
    pub delta_tilde: f64,
    pub infeasible: bool,
    /// Objective at the optimum: the contrast for Monte Carlo fits (relative
    /// to the last reference unless `contrast_absolute`), the negative log
    /// pseudolikelihood per unit volume otherwise.
    pub contrast: f64,
    pub mc_error: f64,
    pub contrast_absolute: bool,
    /// Reference models, one per round.
    pub references: Vec<GibbsModel>,
    pub seed: u64,
    pub rounds: usize,
    pub draws: usize,
    /// ESS of the importance weights at the optimum.
    pub ess: f64,
    pub bridge_legs: usize,
    /// Best objective per range candidate in the final round.
    pub profile: Vec<(f64, f64)>,
    pub trace: Vec<TraceRow>,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn theta_hat(&self) -> Vec<(String, f64)> {
        self.model.param_names().into_iter().zip(self.model.params()).collect()
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.model.param(name)
    }

    pub fn truncation_radius(&self) -> Option<f64> {
        match self.model.interaction() {
            Interaction::LennardJones(lj) => Some(lj.cutoff),
            _ => None,
        }
    }

    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let mut kv: Vec<(String, String)> = vec![
            ("method".into(), self.method.to_string()),
            ("kind".into(), self.model.kind().to_string()),
            ("delta_hat".into(), self.delta_hat.to_string()),
            ("delta_tilde".into(), self.delta_tilde.to_string()),
            ("infeasible".into(), self.infeasible.to_string()),
        ];
        for (n, v) in self.theta_hat() {
            kv.push((format!("theta.{n}"), v.to_string()));
        }
        for (k, v) in self.model.to_key_values() {
            kv.push((format!("model.{k}"), v));
        }
        kv.extend([
            ("contrast".into(), self.contrast.to_string()),
            ("mc_error".into(), self.mc_error.to_string()),
            ("contrast_absolute".into(), self.contrast_absolute.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("rounds".into(), self.rounds.to_string()),
            ("draws".into(), self.draws.to_string()),
            ("ess".into(), self.ess.to_string()),
            ("bridge_legs".into(), self.bridge_legs.to_string()),
            ("profile_candidates".into(), self.profile.len().to_string()),
        ]);
        if let Some(r) = self.truncation_radius() {
            kv.push(("truncation_radius".into(), r.to_string()));
        }
        for (i, m) in self.references.iter().enumerate() {
            kv.push((format!("reference.{i}"), m.fingerprint()));
        }
        for (i, w) in self.warnings.iter().enumerate() {
            kv.push((format!("warning.{i}"), w.clone()));
        }
        kv
    }

    pub fn write_record<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (k, v) in self.to_key_values() {
            writeln!(out, "{k}={v}")?;
        }
        Ok(())
    }

    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let names = self.model.param_names();
        write!(out, "round,stage,range,start,evals,value,ess")?;
        for n in &names {
            write!(out, ",{n}")?;
        }
        writeln!(out)?;
        for r in &self.trace {
            write!(
                out,
                "{},{},{},{},{},{},{}",
                r.round, r.stage, r.range, r.start, r.evals, r.value, r.ess
            )?;
            for v in &r.params {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}
