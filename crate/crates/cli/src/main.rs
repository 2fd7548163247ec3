use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gibbs_cli::config::{load_model, parse_box, parse_interval};
use gibbs_cli::{
    cmd_fit, cmd_simulate, cmd_validate, run_consistency, CliError, ExperimentSpec, FitArgs, FitMethodArg,
    SimulateArgs, ValidateArgs,
};
use gibbs_core::SamplerConfig;

#[derive(Parser)]
#[command(name = "gibbs", version, about = "Simulate and fit Gibbs point processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SamplerFlags {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
}

impl SamplerFlags {
    fn config(&self) -> SamplerConfig {
        let mut c = SamplerConfig::default().with_seed(self.seed);
        if let Some(v) = self.sweeps {
            c.sweeps = v;
        }
        if let Some(v) = self.burnin {
            c.burn_in = v;
        }
        if let Some(v) = self.thin {
            c.thin = v;
        }
        c
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Mcmle,
    Pl,
}

#[derive(Subcommand)]
enum Command {
    /// Run the birth-death-move sampler and write the draws.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        /// Half-width n of the window [-n, n]^d.
        #[arg(long)]
        window: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[command(flatten)]
        sampler: SamplerFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a model family to a point pattern.
    Fit {
        #[arg(long)]
        data: PathBuf,
        /// Model file fixing the family and its shape parameters.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Family by name: poisson, strauss, hardcore_strauss, area.
        #[arg(long)]
        kind: Option<String>,
        /// Fit on [-n, n]^d instead of the data's window.
        #[arg(long)]
        window: Option<f64>,
        /// Search box, e.g. `beta=0:5,range=0.02:0.5`; a single value pins.
        #[arg(long = "box")]
        bounds: Option<String>,
        /// Admissible hardcore distances `lo:hi`.
        #[arg(long)]
        delta: Option<String>,
        #[arg(long, value_enum, default_value_t = Method::Mcmle)]
        method: Method,
        /// Bridge legs for an absolute contrast (0 skips).
        #[arg(long, default_value_t = 0)]
        bridge_legs: usize,
        #[command(flatten)]
        sampler: SamplerFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the sampler against the GNZ equation.
    Validate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        window: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 4)]
        chains: usize,
        #[arg(long, default_value_t = 3.0)]
        sigmas: f64,
        #[command(flatten)]
        sampler: SamplerFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Window-growth consistency experiment.
    Consistency {
        /// Experiment spec file.
        #[arg(long, conflicts_with = "model")]
        spec: Option<PathBuf>,
        /// True model file (instead of a spec).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Comma-separated half-widths.
        #[arg(long, default_value = "4,8,16")]
        ladder: String,
        #[arg(long, default_value_t = 20)]
        replicates: usize,
        #[arg(long = "box")]
        bounds: Option<String>,
        #[command(flatten)]
        sampler: SamplerFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            model,
            window,
            dim,
            sampler,
            out,
        } => {
            let path = cmd_simulate(&SimulateArgs {
                model,
                window,
                dim,
                sampler: sampler.config(),
                out,
            })?;
            println!("{}", path.display());
        }
        Command::Fit {
            data,
            model,
            kind,
            window,
            bounds,
            delta,
            method,
            bridge_legs,
            sampler,
            out,
        } => {
            let fit = cmd_fit(&FitArgs {
                data,
                model,
                kind,
                window,
                bounds: bounds.as_deref().map(parse_box).transpose().map_err(usage)?.unwrap_or_default(),
                delta_interval: delta.as_deref().map(parse_interval).transpose().map_err(usage)?,
                method: match method {
                    Method::Mcmle => FitMethodArg::McMle,
                    Method::Pl => FitMethodArg::Pseudolikelihood,
                },
                sampler: sampler.config(),
                bridge_legs,
                out,
            })?;
            for w in &fit.warnings {
                eprintln!("warning: {w}");
            }
            fit.write_record(std::io::stdout().lock()).map_err(|e| CliError::Other(e.into()))?;
        }
        Command::Validate {
            model,
            window,
            dim,
            chains,
            sigmas,
            sampler,
            out,
        } => {
            let report = cmd_validate(&ValidateArgs {
                model,
                window,
                dim,
                sampler: sampler.config(),
                chains,
                sigmas,
                out,
            })?;
            print!("{}", report.to_csv());
        }
        Command::Consistency {
            spec,
            model,
            ladder,
            replicates,
            bounds,
            sampler,
            out,
        } => {
            let mut spec = match (spec, model) {
                (Some(p), _) => ExperimentSpec::from_file(&p)?,
                (None, Some(m)) => {
                    let ladder: Vec<f64> = ladder
                        .split(',')
                        .map(|s| s.trim().parse::<f64>().map_err(usage))
                        .collect::<Result<_, _>>()?;
                    let min_side = 2.0 * ladder.first().copied().unwrap_or(1.0);
                    let truth = load_model(&m, Some(min_side))?;
                    let mut s = ExperimentSpec::new(truth, ladder, replicates, sampler.seed)?;
                    s.fit_sampler = sampler.config();
                    s
                }
                (None, None) => return Err(usage("consistency needs --spec or --model")),
            };
            if let Some(b) = bounds {
                spec.optimizer.bounds.extend(parse_box(&b).map_err(usage)?);
            }
            if out.is_some() {
                spec.out = out;
            }
            let report = run_consistency(&spec)?;
            print!("{}", report.summary_csv());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
