//! Monte-Carlo harness: configuration, single realizations, aggregation and sweeps.
//!
//! Realization `m` of a study always draws from stream `m` of the base seed, and
//! results are reduced in realization order. Statistics therefore do not depend
//! on the number of worker threads.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consensus::ConsensusParams;
use crate::dynamics::{simulate, DynamicsParams, GateMode, Method, SeriesPoint, SimulationSetup};
use crate::error::{Error, Result};
use crate::objective::{InitBox, ObjectiveRegistry, ObjectiveSpec};
use crate::rng::RngStream;

/// Tolerance on `|f(v_f(T)) - f_star|` for benchmark runs.
pub const BENCHMARK_FTOL: f64 = 0.1;
/// Concentration radius around the global minimizer for the toy problems.
pub const TOY_RADIUS: f64 = 0.4;

/// Realizations per parallel batch when time series are collected.
const SERIES_BATCH: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitScheme {
    /// Uniform in the objective's init box (or the config's `init_box`).
    UniformBox,
    /// Exactly these points, one per particle.
    Explicit { points: Vec<Vec<f64>> },
    /// Particle `i` starts uniformly in the cube of half-width `radius` around
    /// `centers[i % centers.len()]`.
    Perturbed { centers: Vec<Vec<f64>>, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SuccessCriterion {
    /// `|f(v_f(T)) - f_star| < tol`.
    BenchmarkFtol {
        #[serde(default = "default_ftol")]
        tol: f64,
    },
    /// Every particle within `radius` of the known global minimizer.
    ToyRadius {
        #[serde(default = "default_radius")]
        radius: f64,
    },
    /// Every particle within `radius` of `v_f(T)`, wherever that is.
    ToyLiteral {
        #[serde(default = "default_radius")]
        radius: f64,
    },
}

fn default_ftol() -> f64 {
    BENCHMARK_FTOL
}

fn default_radius() -> f64 {
    TOY_RADIUS
}

impl SuccessCriterion {
    pub fn benchmark() -> Self {
        SuccessCriterion::BenchmarkFtol { tol: BENCHMARK_FTOL }
    }

    pub fn toy() -> Self {
        SuccessCriterion::ToyRadius { radius: TOY_RADIUS }
    }
}

impl std::str::FromStr for SuccessCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, value) = match s.split_once(':') {
            Some((n, v)) => {
                let v: f64 = v
                    .parse()
                    .map_err(|_| Error::Config(format!("bad success tolerance in `{s}`")))?;
                (n, Some(v))
            }
            None => (s, None),
        };
        match name {
            "benchmark" | "benchmark_ftol" => {
                Ok(SuccessCriterion::BenchmarkFtol { tol: value.unwrap_or(BENCHMARK_FTOL) })
            }
            "toy" | "toy_radius" => {
                Ok(SuccessCriterion::ToyRadius { radius: value.unwrap_or(TOY_RADIUS) })
            }
            "toy_literal" => {
                Ok(SuccessCriterion::ToyLiteral { radius: value.unwrap_or(TOY_RADIUS) })
            }
            _ => Err(Error::Config(format!(
                "unknown success criterion `{s}` (expected benchmark, toy or toy_literal)"
            ))),
        }
    }
}

/// `|f_vf_final - f_star| < 0.1`; false for non-finite input.
pub fn success_benchmark(f_vf_final: f64, f_star: f64) -> bool {
    (f_vf_final - f_star).abs() < BENCHMARK_FTOL
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Every particle (rows of `final_positions`) strictly within `radius` of `x_star`.
pub fn success_toy(final_positions: &[f64], x_star: &[f64], radius: f64) -> bool {
    final_positions.chunks_exact(x_star.len()).all(|x| dist(x, x_star) < radius)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Sharp,
    Smoothed,
}

/// Full parameterization of one Monte-Carlo study. Defaults reproduce the
/// benchmark protocol (`sigma = 0.5`, `alpha = beta = 10`, `T = 15` in 30000
/// steps, 5000 realizations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    pub objective: String,
    /// `None` selects the objective's natural dimension.
    pub dim: Option<usize>,
    pub n_particles: usize,
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub lambda: f64,
    #[serde(rename = "T", alias = "t_final")]
    pub t_final: f64,
    pub n_steps: usize,
    pub n_mc: usize,
    pub seed: u64,
    pub init: InitScheme,
    pub init_box: Option<InitBox>,
    pub success: SuccessCriterion,
    pub timeseries: bool,
    pub gate_mode: GateKind,
    pub epsilon: f64,
    /// Off by default so that result files are byte-reproducible.
    pub record_wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            method: Method::Wpb,
            objective: "rastrigin".into(),
            dim: None,
            n_particles: 20,
            alpha: 10.0,
            beta: 10.0,
            sigma: 0.5,
            lambda: 1.0,
            t_final: 15.0,
            n_steps: 30_000,
            n_mc: 5000,
            seed: 0,
            init: InitScheme::UniformBox,
            init_box: None,
            success: SuccessCriterion::benchmark(),
            timeseries: false,
            gate_mode: GateKind::Sharp,
            epsilon: 1e-2,
            record_wall_time: false,
        }
    }
}

impl ExperimentConfig {
    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    pub fn gate(&self) -> GateMode {
        match self.gate_mode {
            GateKind::Sharp => GateMode::Sharp,
            GateKind::Smoothed => GateMode::Smoothed { epsilon: self.epsilon },
        }
    }

    pub fn dynamics_params(&self) -> DynamicsParams {
        DynamicsParams {
            sigma: self.sigma,
            lambda_const: self.lambda,
            dt: self.dt(),
            gate_mode: self.gate(),
            method: self.method,
        }
    }

    /// Resolves the objective by name and applies the `init_box` override.
    pub fn resolve_objective(&self, registry: &ObjectiveRegistry) -> Result<ObjectiveSpec> {
        let spec = registry.lookup(&self.objective, self.dim)?;
        match &self.init_box {
            Some(b) => spec.with_init_box(b.clone()),
            None => Ok(spec),
        }
    }

    /// Checks every field against `objective` before any realization runs.
    pub fn validate(&self, objective: &ObjectiveSpec) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return cfg(format!("T must be positive, got {}", self.t_final));
        }
        if self.n_steps == 0 {
            return cfg("n_steps must be at least 1".into());
        }
        if self.n_mc == 0 {
            return cfg("n_mc must be at least 1".into());
        }
        if self.n_particles == 0 {
            return cfg("n_particles must be at least 1".into());
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("sigma", self.sigma), ("lambda", self.lambda)] {
            if !(v >= 0.0 && v.is_finite()) {
                return cfg(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if self.gate_mode == GateKind::Smoothed && !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return cfg(format!("epsilon must be positive, got {}", self.epsilon));
        }
        let d = objective.dim();
        match &self.init {
            InitScheme::UniformBox => {}
            InitScheme::Explicit { points } => {
                if points.len() != self.n_particles {
                    return cfg(format!(
                        "explicit init has {} points for {} particles",
                        points.len(),
                        self.n_particles
                    ));
                }
                if points.iter().any(|p| p.len() != d || p.iter().any(|v| !v.is_finite())) {
                    return cfg(format!("explicit init points must be finite with dimension {d}"));
                }
            }
            InitScheme::Perturbed { centers, radius } => {
                if centers.is_empty() || centers.iter().any(|c| c.len() != d) {
                    return cfg(format!("perturbed init needs centers of dimension {d}"));
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return cfg(format!("perturbation radius must be positive, got {radius}"));
                }
            }
        }
        match self.success {
            SuccessCriterion::BenchmarkFtol { tol } => {
                if objective.f_star().is_none() {
                    return cfg(format!("objective `{}` has no known minimum value", objective.name()));
                }
                if tol.is_nan() || tol <= 0.0 {
                    return cfg("success tolerance must be positive".into());
                }
            }
            SuccessCriterion::ToyRadius { radius } | SuccessCriterion::ToyLiteral { radius } => {
                if objective.x_star().is_none() && matches!(self.success, SuccessCriterion::ToyRadius { .. }) {
                    return cfg(format!("objective `{}` has no known minimizer", objective.name()));
                }
                if radius.is_nan() || radius <= 0.0 {
                    return cfg("success radius must be positive".into());
                }
            }
        }
        if self.timeseries && objective.x_star().is_none() {
            return cfg("time series need an objective with a known minimizer".into());
        }
        Ok(())
    }

    /// Initial positions (row-major `N x dim`), drawn from `rng` when random.
    pub fn initial_positions(&self, objective: &ObjectiveSpec, rng: &mut RngStream) -> Vec<f64> {
        let n = self.n_particles;
        let mut out = Vec::with_capacity(n * objective.dim());
        match &self.init {
            InitScheme::UniformBox => {
                for _ in 0..n {
                    out.extend(rng.uniform_in_box(objective.init_box()));
                }
            }
            InitScheme::Explicit { points } => {
                for p in points {
                    out.extend_from_slice(p);
                }
            }
            InitScheme::Perturbed { centers, radius } => {
                for i in 0..n {
                    for &c in &centers[i % centers.len()] {
                        out.push(c + radius * (2.0 * rng.uniform() - 1.0));
                    }
                }
            }
        }
        out
    }
}

/// Result of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub index: u64,
    pub success: bool,
    pub f_vf_final: f64,
    pub vf_final: Vec<f64>,
    pub final_positions: Vec<f64>,
    pub diverged: bool,
    pub series: Option<Vec<SeriesPoint>>,
}

/// Runs realization `stream_id` of `config` and judges it.
pub fn run_realization(
    objective: &ObjectiveSpec,
    config: &ExperimentConfig,
    stream_id: u64,
) -> Result<RunOutcome> {
    let mut rng = RngStream::new(config.seed, stream_id);
    let initial = config.initial_positions(objective, &mut rng);
    let setup = SimulationSetup {
        objective,
        dynamics: config.dynamics_params(),
        consensus: ConsensusParams::new(config.alpha)?,
        beta: config.beta,
        n_steps: config.n_steps,
        record_series: config.timeseries,
    };
    let traj = simulate(&setup, initial, &mut rng)?;
    let (vf_final, f_vf_final) = match &traj.consensus {
        Some(cp) => (cp.v.clone(), cp.f_v),
        None => (vec![f64::NAN; objective.dim()], f64::NAN),
    };
    let success = !traj.diverged
        && match config.success {
            SuccessCriterion::BenchmarkFtol { tol } => {
                let f_star = objective.f_star().unwrap_or(f64::NAN);
                (f_vf_final - f_star).abs() < tol
            }
            SuccessCriterion::ToyRadius { radius } => match objective.x_star() {
                Some(xs) => success_toy(&traj.state.positions, xs, radius),
                None => false,
            },
            SuccessCriterion::ToyLiteral { radius } => {
                success_toy(&traj.state.positions, &vf_final, radius)
            }
        };
    Ok(RunOutcome {
        index: stream_id,
        success,
        f_vf_final,
        vf_final,
        final_positions: traj.state.positions,
        diverged: traj.diverged,
        series: traj.series,
    })
}

/// Aggregated success statistics of one study.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessStats {
    pub n_runs: usize,
    pub n_success: usize,
    pub n_diverged: usize,
    pub success_rate: f64,
    /// Binomial standard error `sqrt(p (1 - p) / M)`.
    pub se: f64,
    /// Mean of `f(v_f(T))` over non-diverged runs.
    pub mean_f_vf: f64,
    /// Sample standard deviation of `f(v_f(T))` over non-diverged runs.
    pub sd_f_vf: f64,
    pub wall_seconds: f64,
}

impl SuccessStats {
    /// Sequential reduction over `outcomes` in the given order.
    pub fn from_outcomes(outcomes: &[RunOutcome], wall_seconds: f64) -> Self {
        let n_runs = outcomes.len();
        let n_success = outcomes.iter().filter(|o| o.success).count();
        let n_diverged = outcomes.iter().filter(|o| o.diverged).count();
        let finite: Vec<f64> = outcomes
            .iter()
            .filter(|o| !o.diverged && o.f_vf_final.is_finite())
            .map(|o| o.f_vf_final)
            .collect();
        let (mean_f_vf, sd_f_vf) = mean_sd(&finite);
        let success_rate = n_success as f64 / n_runs as f64;
        Self {
            n_runs,
            n_success,
            n_diverged,
            success_rate,
            se: binomial_se(success_rate, n_runs),
            mean_f_vf,
            sd_f_vf,
            wall_seconds,
        }
    }
}

pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Across-realization mean of the diagnostics at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSeriesPoint {
    pub t: f64,
    pub mean_dist_vf: f64,
    pub mean_energy: f64,
}

#[derive(Debug, Clone)]
pub struct MonteCarloResult {
    pub config: ExperimentConfig,
    pub stats: SuccessStats,
    /// Per-realization outcomes in index order, without their series.
    pub outcomes: Vec<RunOutcome>,
    /// Mean over non-diverged realizations; present when `config.timeseries`.
    pub mean_series: Option<Vec<MeanSeriesPoint>>,
}

/// Execution options that do not change results.
#[derive(Clone, Default)]
pub struct RunOptions {
    /// Worker cap; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub registry: ObjectiveRegistry,
}

impl RunOptions {
    pub fn with_threads(threads: usize) -> Self {
        Self { threads: Some(threads), ..Self::default() }
    }

    fn install<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        match self.threads {
            Some(t) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t.max(1))
                    .build()
                    .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
                Ok(pool.install(job))
            }
            None => Ok(job()),
        }
    }
}

struct SeriesSum {
    t: Vec<f64>,
    dist: Vec<f64>,
    energy: Vec<f64>,
    count: usize,
}

impl SeriesSum {
    fn add(&mut self, s: &[SeriesPoint]) {
        if self.t.is_empty() {
            self.t = s.iter().map(|p| p.t).collect();
            self.dist = vec![0.0; s.len()];
            self.energy = vec![0.0; s.len()];
        }
        for (k, p) in s.iter().enumerate().take(self.t.len()) {
            self.dist[k] += p.dist_vf;
            self.energy[k] += p.energy;
        }
        self.count += 1;
    }

    fn finish(self, n_steps: usize, dt: f64) -> Vec<MeanSeriesPoint> {
        if self.count == 0 {
            return (0..=n_steps)
                .map(|k| MeanSeriesPoint { t: k as f64 * dt, mean_dist_vf: f64::NAN, mean_energy: f64::NAN })
                .collect();
        }
        let c = self.count as f64;
        self.t
            .iter()
            .zip(self.dist.iter().zip(&self.energy))
            .map(|(&t, (&d, &e))| MeanSeriesPoint { t, mean_dist_vf: d / c, mean_energy: e / c })
            .collect()
    }
}

/// Runs `config.n_mc` realizations on streams `0..n_mc` and aggregates them.
pub fn run_monte_carlo(config: &ExperimentConfig, opts: &RunOptions) -> Result<MonteCarloResult> {
    let objective = config.resolve_objective(&opts.registry)?;
    config.validate(&objective)?;
    ConsensusParams::new(config.alpha)?;
    config.dynamics_params().validate()?;

    let start = Instant::now();
    let m = config.n_mc as u64;
    let run = |i: u64| run_realization(&objective, config, i);

    let (outcomes, mean_series) = if config.timeseries {
        let mut sum = SeriesSum { t: vec![], dist: vec![], energy: vec![], count: 0 };
        let mut outcomes = Vec::with_capacity(config.n_mc);
        let mut lo = 0u64;
        while lo < m {
            let hi = (lo + SERIES_BATCH as u64).min(m);
            let batch: Vec<RunOutcome> =
                opts.install(|| (lo..hi).into_par_iter().map(run).collect::<Result<_>>())??;
            for mut o in batch {
                if let Some(s) = o.series.take() {
                    if !o.diverged {
                        sum.add(&s);
                    }
                }
                outcomes.push(o);
            }
            lo = hi;
        }
        (outcomes, Some(sum.finish(config.n_steps, config.dt())))
    } else {
        let outcomes: Vec<RunOutcome> =
            opts.install(|| (0..m).into_par_iter().map(run).collect::<Result<_>>())??;
        (outcomes, None)
    };

    let stats = SuccessStats::from_outcomes(&outcomes, start.elapsed().as_secs_f64());
    log::info!(
        "{} {} d={} N={} M={}: success {:.4} ({} diverged) in {:.2}s",
        config.method,
        config.objective,
        objective.dim(),
        config.n_particles,
        config.n_mc,
        stats.success_rate,
        stats.n_diverged,
        stats.wall_seconds
    );
    Ok(MonteCarloResult { config: config.clone(), stats, outcomes, mean_series })
}

/// One study per grid entry, in grid order. Each row succeeds or fails on its own.
pub fn run_sweep(
    grid: &[ExperimentConfig],
    opts: &RunOptions,
) -> Result<Vec<Result<MonteCarloResult>>> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    Ok(grid.iter().map(|c| run_monte_carlo(c, opts)).collect())
}

/// The two deterministic three-particle starts of the 1-d double well.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyInit {
    /// Two particles near the local minimizer, one near the global one.
    Ic1,
    /// One particle near the local minimizer, two near the global one.
    Ic2,
}

/// Positions chosen so that with `alpha = 10` every sharp gate is closed at
/// `t = 0`, making the start stationary when `sigma = 0`.
pub fn toy_initial_conditions(which: ToyInit) -> InitScheme {
    let pts: [f64; 3] = match which {
        ToyInit::Ic1 => [-0.8, 0.95, 1.05],
        ToyInit::Ic2 => [-1.05, -0.95, 0.85],
    };
    InitScheme::Explicit { points: pts.iter().map(|&x| vec![x]).collect() }
}

/// Noise level used for the 1-d toy studies.
pub const TOY_SIGMA: f64 = 0.5;

/// Defaults for the 1-d double-well studies: three particles, `T = 100`,
/// `dt = 1e-3`, `beta = 30`, 1000 realizations.
pub fn toy_1d_config(which: ToyInit, method: Method) -> ExperimentConfig {
    ExperimentConfig {
        method,
        objective: "double_well_1d".into(),
        dim: Some(1),
        n_particles: 3,
        alpha: 10.0,
        beta: 30.0,
        sigma: TOY_SIGMA,
        t_final: 100.0,
        n_steps: 100_000,
        n_mc: 1000,
        init: toy_initial_conditions(which),
        success: SuccessCriterion::toy(),
        ..ExperimentConfig::default()
    }
}

/// Defaults for the 2-d double well: particles split evenly between the two
/// wells with a uniform perturbation of half-width 0.1, `alpha = 10`, `beta = 20`.
pub fn toy_2d_config(n_particles: usize, method: Method) -> ExperimentConfig {
    ExperimentConfig {
        method,
        objective: "double_well_2d".into(),
        dim: Some(2),
        n_particles,
        alpha: 10.0,
        beta: 20.0,
        init: InitScheme::Perturbed {
            centers: vec![vec![-1.0, 0.0], vec![1.0, 0.0]],
            radius: 0.1,
        },
        success: SuccessCriterion::toy(),
        ..ExperimentConfig::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::weighted_global_best;
    use crate::dynamics::gates;
    use crate::objective::{lookup, DOUBLE_WELL_GLOBAL_MIN};

    #[test]
    fn benchmark_success_rule() {
        assert!(success_benchmark(0.05, 0.0));
        assert!(!success_benchmark(0.1, 0.0));
        assert!(!success_benchmark(f64::NAN, 0.0));
    }

    #[test]
    fn toy_success_rule() {
        let xs = [DOUBLE_WELL_GLOBAL_MIN];
        assert!(success_toy(&[-1.0, -1.05, -0.95], &xs, 0.4));
        assert!(!success_toy(&[-1.0, -1.0, 0.998748], &xs, 0.4));
        assert!(!success_toy(&[0.0, 0.0], &[0.0, 0.4], 0.4));
    }

    fn gates_at_start(which: ToyInit, alpha: f64) -> Vec<(f64, f64)> {
        let obj = lookup("double_well_1d", None).unwrap();
        let InitScheme::Explicit { points } = toy_initial_conditions(which) else { unreachable!() };
        let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let fs: Vec<f64> = xs.iter().map(|&x| obj.value(&[x])).collect();
        let v = weighted_global_best(&xs, 1, &fs, ConsensusParams::new(alpha).unwrap()).unwrap();
        let fv = obj.value(&v);
        fs.iter().map(|&f| {
            let g = gates(f, fv, f, GateMode::Sharp);
            (g.lam, g.mu)
        }).collect()
    }

    #[test]
    fn toy_starts_have_closed_gates() {
        for which in [ToyInit::Ic1, ToyInit::Ic2] {
            assert!(gates_at_start(which, 10.0).iter().all(|&g| g == (0.0, 0.0)), "{which:?}");
        }
    }

    #[test]
    fn ic1_consensus_location() {
        // 40-digit evaluation of the weighted mean of (-0.8, 0.95, 1.05) at alpha = 10
        let obj = lookup("double_well_1d", None).unwrap();
        let xs = [-0.8, 0.95, 1.05];
        let fs: Vec<f64> = xs.iter().map(|&x| obj.value(&[x])).collect();
        let v = weighted_global_best(&xs, 1, &fs, ConsensusParams::new(10.0).unwrap()).unwrap();
        assert!((v[0] - 0.723_679_878_265_583_3).abs() < 1e-12);
        assert!(v[0] > 0.5 && v[0] < 1.1);
    }

    #[test]
    fn config_validation() {
        let obj = lookup("double_well_1d", None).unwrap();
        let mut c = toy_1d_config(ToyInit::Ic1, Method::Pb);
        assert!(c.validate(&obj).is_ok());
        c.n_mc = 0;
        assert!(c.validate(&obj).is_err());
        let mut c = toy_1d_config(ToyInit::Ic1, Method::Pb);
        c.n_particles = 4;
        assert!(c.validate(&obj).is_err());
        let mut c = toy_1d_config(ToyInit::Ic1, Method::Pb);
        c.t_final = 0.0;
        assert!(c.validate(&obj).is_err());
    }

    #[test]
    fn stats_aggregation() {
        let mk = |success, f, diverged| RunOutcome {
            index: 0,
            success,
            f_vf_final: f,
            vf_final: vec![],
            final_positions: vec![],
            diverged,
            series: None,
        };
        let outs = [mk(true, 1.0, false), mk(false, 3.0, false), mk(false, f64::NAN, true), mk(true, 2.0, false)];
        let s = SuccessStats::from_outcomes(&outs, 0.0);
        assert_eq!((s.n_success, s.n_diverged, s.n_runs), (2, 1, 4));
        assert_eq!(s.success_rate, 0.5);
        assert_eq!(s.mean_f_vf, 2.0);
        assert_eq!(s.sd_f_vf, 1.0);
        assert_eq!(s.se, (0.25f64 / 4.0).sqrt());
    }

    #[test]
    fn perturbed_init_alternates_centers() {
        let obj = lookup("double_well_2d", None).unwrap();
        let c = toy_2d_config(4, Method::Cbo);
        let x = c.initial_positions(&obj, &mut RngStream::new(0, 0));
        assert_eq!(x.len(), 8);
        for (i, p) in x.chunks_exact(2).enumerate() {
            let cx = if i % 2 == 0 { -1.0 } else { 1.0 };
            assert!((p[0] - cx).abs() <= 0.1 && p[1].abs() <= 0.1);
        }
    }

    #[test]
    fn criterion_parsing() {
        assert_eq!("toy".parse::<SuccessCriterion>().unwrap(), SuccessCriterion::toy());
        assert_eq!(
            "benchmark:0.5".parse::<SuccessCriterion>().unwrap(),
            SuccessCriterion::BenchmarkFtol { tol: 0.5 }
        );
        assert!("bogus".parse::<SuccessCriterion>().is_err());
    }

    #[test]
    fn config_json_defaults_and_unknown_fields() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"method":"pb","T":2.0}"#).unwrap();
        assert_eq!(c.method, Method::Pb);
        assert_eq!(c.t_final, 2.0);
        assert_eq!(c.n_steps, 30_000);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus":1}"#).is_err());
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
