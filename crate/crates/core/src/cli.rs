//! `cbo` command-line front end.
//!
//! Exit codes: 0 ok, 2 configuration error (including bad flags), 3 I/O error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{load_config, parse_init_box, Overrides, SweepSpec};
use crate::dynamics::Method;
use crate::error::{Error, Result};
use crate::experiment::{
    run_monte_carlo, run_sweep, toy_1d_config, toy_2d_config, ExperimentConfig, GateKind,
    MonteCarloResult, RunOptions, SuccessCriterion, ToyInit,
};
use crate::objective::{builtin_objectives, fixed_dim, DEFAULT_BENCHMARK_DIM};
use crate::report::{write_results, write_series, ResultRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cbo", version, about = "Consensus-based optimization with personal best")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one Monte-Carlo study and write one results row.
    Run(CommonFlags),
    /// Expand a sweep file into a grid and write one row per grid point.
    Sweep(CommonFlags),
    /// Compare CBO, PB and wPB on a double-well toy problem.
    Toy(ToyArgs),
    /// List builtin objectives.
    ListObjectives,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ToyWhich {
    Ic1,
    Ic2,
    #[value(name = "2d")]
    TwoD,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    pub which: ToyWhich,
    #[command(flatten)]
    pub flags: CommonFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Cbo,
    Pb,
    Wpb,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Cbo => Method::Cbo,
            MethodArg::Pb => Method::Pb,
            MethodArg::Wpb => Method::Wpb,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GateArg {
    Sharp,
    Smoothed,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonFlags {
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub particles: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Final time T.
    #[arg(long)]
    pub tfinal: Option<f64>,
    /// Number of time steps; dt = T / steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Number of Monte-Carlo realizations.
    #[arg(long)]
    pub mc: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON config (experiment config for run/toy, sweep spec for sweep).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Results CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write mean time series next to --out.
    #[arg(long)]
    pub timeseries: bool,
    #[arg(long, value_enum)]
    pub gate_mode: Option<GateArg>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// `lo:hi` for every coordinate, or JSON `[[lo,hi],...]`.
    #[arg(long)]
    pub init_box: Option<String>,
    /// `benchmark`, `toy` or `toy_literal`, optionally `:<tolerance>`.
    #[arg(long)]
    pub success_criterion: Option<String>,
}

impl CommonFlags {
    fn overrides(&self) -> Result<Overrides> {
        Ok(Overrides {
            objective: self.objective.clone(),
            dim: self.dim,
            n_particles: self.particles,
            method: self.method.map(Method::from),
            alpha: self.alpha,
            beta: self.beta,
            sigma: self.sigma,
            lambda: self.lambda,
            t_final: self.tfinal,
            n_steps: self.steps,
            n_mc: self.mc,
            seed: self.seed,
            timeseries: self.timeseries.then_some(true),
            gate_mode: self.gate_mode.map(|g| match g {
                GateArg::Sharp => GateKind::Sharp,
                GateArg::Smoothed => GateKind::Smoothed,
            }),
            epsilon: self.epsilon,
            init_box: None,
            success: self
                .success_criterion
                .as_deref()
                .map(str::parse::<SuccessCriterion>)
                .transpose()?,
        })
    }

    fn options(&self) -> RunOptions {
        RunOptions { threads: self.threads, ..RunOptions::default() }
    }

    /// `defaults <- --config <- flags`.
    fn resolve(&self, defaults: ExperimentConfig) -> Result<ExperimentConfig> {
        let base = match &self.config {
            Some(p) => load_config(p, &defaults)?,
            None => defaults,
        };
        let mut c = self.overrides()?.apply(base);
        self.apply_init_box(&mut c)?;
        Ok(c)
    }

    fn apply_init_box(&self, c: &mut ExperimentConfig) -> Result<()> {
        if let Some(s) = &self.init_box {
            let dim = c.dim.or_else(|| fixed_dim(&c.objective)).unwrap_or(DEFAULT_BENCHMARK_DIM);
            c.init_box = Some(parse_init_box(s, dim)?);
        }
        Ok(())
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Csv(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Run(flags) => {
            let config = flags.resolve(ExperimentConfig::default())?;
            let result = run_monte_carlo(&config, &flags.options())?;
            emit(flags, &[result])
        }
        Command::Sweep(flags) => {
            let path = flags
                .config
                .as_deref()
                .ok_or_else(|| Error::Config("sweep requires --config <file>".into()))?;
            let spec = SweepSpec::load(path)?;
            let mut grid = spec.expand(&ExperimentConfig::default(), &flags.overrides()?)?;
            for c in &mut grid {
                flags.apply_init_box(c)?;
            }
            let rows = run_sweep(&grid, &flags.options())?;
            let mut results = Vec::with_capacity(rows.len());
            for (k, r) in rows.into_iter().enumerate() {
                results.push(r.map_err(|e| match e {
                    Error::Config(m) => Error::Config(format!("grid row {k}: {m}")),
                    other => other,
                })?);
            }
            emit(flags, &results)
        }
        Command::Toy(args) => {
            let flags = &args.flags;
            let methods: Vec<Method> = match flags.method {
                Some(m) => vec![m.into()],
                None => Method::ALL.to_vec(),
            };
            let mut results = Vec::with_capacity(methods.len());
            for method in methods {
                let defaults = match args.which {
                    ToyWhich::Ic1 => toy_1d_config(ToyInit::Ic1, method),
                    ToyWhich::Ic2 => toy_1d_config(ToyInit::Ic2, method),
                    ToyWhich::TwoD => toy_2d_config(flags.particles.unwrap_or(4), method),
                };
                let mut config = flags.resolve(defaults)?;
                config.method = method;
                results.push(run_monte_carlo(&config, &flags.options())?);
            }
            emit(flags, &results)
        }
        Command::ListObjectives => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            writeln!(out, "name,dim,init_box,x_star,f_star")?;
            for spec in builtin_objectives(DEFAULT_BENCHMARK_DIM)? {
                let dim = match fixed_dim(spec.name()) {
                    Some(d) => d.to_string(),
                    None => "any".into(),
                };
                let (lo, hi) = spec.init_box().bounds()[0];
                writeln!(
                    out,
                    "{},{},[{lo}:{hi}]^d,{:?},{}",
                    spec.name(),
                    dim,
                    spec.x_star().unwrap_or(&[]),
                    spec.f_star().map(|f| f.to_string()).unwrap_or_default()
                )?;
            }
            Ok(())
        }
    }
}

fn timeseries_path(out: &Path, row: usize, method: Method) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    out.with_file_name(format!("{stem}_{row}_{method}_timeseries.csv"))
}

fn emit(flags: &CommonFlags, results: &[MonteCarloResult]) -> Result<()> {
    let rows: Vec<ResultRow> = results.iter().map(ResultRow::from).collect();
    match &flags.out {
        Some(path) => {
            write_results(BufWriter::new(File::create(path)?), &rows)?;
            for (k, r) in results.iter().enumerate() {
                if let Some(series) = &r.mean_series {
                    let p = timeseries_path(path, k, r.config.method);
                    write_series(BufWriter::new(File::create(&p)?), series)?;
                }
            }
        }
        None => {
            if results.iter().any(|r| r.mean_series.is_some()) {
                return Err(Error::Config("--timeseries requires --out".into()));
            }
            write_results(io::stdout().lock(), &rows)?;
        }
    }
    Ok(())
}
