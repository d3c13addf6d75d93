//! Euler–Maruyama discretization of the gated particle system.
//!
//! One step moves particle `i`, coordinate `k`, as
//!
//! ```text
//! X_k <- X_k + [-lam_i (X_k - v_k) - mu_i (X_k - p_k)] dt + sqrt(2) sigma (X_k - v_k) sqrt(dt) xi_k
//! ```
//!
//! where `v` is the weighted global best, `p` the particle's personal best and
//! `xi` a standard normal. In CBO mode `(lam_i, mu_i) = (lambda, 0)`; in the
//! personal-best modes the pair comes from [`gates`].
//!
//! Within a step the order is: memory absorbs the current positions, `v` is
//! computed from the current positions, gates are evaluated, particles move,
//! objective values are refreshed.

use serde::{Deserialize, Serialize};

use crate::consensus::{weighted_global_best_into, ConsensusParams, ConsensusPoint};
use crate::error::{Error, Result};
use crate::memory::{MemoryMode, MemoryParams, MemoryState};
use crate::objective::ObjectiveSpec;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cbo,
    Pb,
    Wpb,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Cbo, Method::Pb, Method::Wpb];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Cbo => "cbo",
            Method::Pb => "pb",
            Method::Wpb => "wpb",
        }
    }

    pub fn memory_mode(&self) -> Option<MemoryMode> {
        match self {
            Method::Cbo => None,
            Method::Pb => Some(MemoryMode::Record),
            Method::Wpb => Some(MemoryMode::Weighted),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cbo" => Ok(Method::Cbo),
            "pb" => Ok(Method::Pb),
            "wpb" => Ok(Method::Wpb),
            _ => Err(Error::Config(format!("unknown method `{s}` (expected cbo, pb or wpb)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateMode {
    Sharp,
    Smoothed { epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsParams {
    pub sigma: f64,
    pub lambda_const: f64,
    pub dt: f64,
    pub gate_mode: GateMode,
    pub method: Method,
}

impl DynamicsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if !(self.lambda_const >= 0.0 && self.lambda_const.is_finite()) {
            return Err(Error::invalid(format!("lambda must be >= 0, got {}", self.lambda_const)));
        }
        if let GateMode::Smoothed { epsilon } = self.gate_mode {
            if !(epsilon > 0.0 && epsilon.is_finite()) {
                return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
            }
        }
        Ok(())
    }
}

/// Positions of `N` particles (row-major `N x dim`), their cached objective
/// values and the current time.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    pub dim: usize,
    pub positions: Vec<f64>,
    pub f_values: Vec<f64>,
    pub t: f64,
}

impl ParticleState {
    pub fn new(objective: &ObjectiveSpec, positions: Vec<f64>) -> Result<Self> {
        let dim = objective.dim();
        if positions.is_empty() || !positions.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "{} coordinates do not form particles of dimension {dim}",
                positions.len()
            )));
        }
        let f_values = positions.chunks_exact(dim).map(|x| objective.value(x)).collect();
        Ok(Self { dim, positions, f_values, t: 0.0 })
    }

    pub fn n_particles(&self) -> usize {
        self.f_values.len()
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.positions.iter().chain(&self.f_values).all(|v| v.is_finite())
    }
}

/// Drift switches for one particle: `lam` toward the global best, `mu` toward
/// the personal best.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatePair {
    pub lam: f64,
    pub mu: f64,
}

/// Sharp Heaviside with `H(0) = 0`.
#[inline]
pub fn heaviside(x: f64) -> f64 {
    if x > 0.0 { 1.0 } else { 0.0 }
}

/// `1/2 + 1/2 tanh(x / epsilon)`.
#[inline]
pub fn heaviside_smoothed(x: f64, epsilon: f64) -> f64 {
    0.5 + 0.5 * (x / epsilon).tanh()
}

#[inline]
pub fn gates(f_x: f64, f_v: f64, f_p: f64, mode: GateMode) -> GatePair {
    let h = |x: f64| match mode {
        GateMode::Sharp => heaviside(x),
        GateMode::Smoothed { epsilon } => heaviside_smoothed(x, epsilon),
    };
    GatePair { lam: h(f_x - f_v) * h(f_p - f_v), mu: h(f_x - f_p) * h(f_v - f_p) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Ok,
    Diverged,
}

/// Advances `state` by one step of length `params.dt`.
///
/// `memory` must already contain the current positions and is ignored in CBO
/// mode. `gaussians` holds `N * dim` standard normals in particle-major order.
pub fn em_step(
    state: &mut ParticleState,
    memory: Option<&MemoryState>,
    consensus: &ConsensusPoint,
    params: &DynamicsParams,
    gaussians: &[f64],
    objective: &ObjectiveSpec,
) -> Result<StepStatus> {
    let mut scratch = vec![0.0; state.dim];
    em_step_with(state, memory, consensus, params, gaussians, objective, &mut scratch)
}

/// [`em_step`] with a caller-owned buffer of length `dim` for the personal best.
pub fn em_step_with(
    state: &mut ParticleState,
    memory: Option<&MemoryState>,
    consensus: &ConsensusPoint,
    params: &DynamicsParams,
    gaussians: &[f64],
    objective: &ObjectiveSpec,
    p: &mut [f64],
) -> Result<StepStatus> {
    let dim = state.dim;
    let n = state.n_particles();
    if gaussians.len() != n * dim || consensus.v.len() != dim {
        return Err(Error::invalid("em_step: gaussian or consensus shape mismatch"));
    }
    if params.method != Method::Cbo {
        match memory {
            Some(m) if m.len() == n => {}
            _ => return Err(Error::invalid("em_step: personal-best mode needs a matching memory")),
        }
    }
    if p.len() != dim {
        return Err(Error::invalid("em_step: scratch buffer has the wrong length"));
    }
    let diffusion = std::f64::consts::SQRT_2 * params.sigma * params.dt.sqrt();
    let dt = params.dt;
    let v = &consensus.v;
    let mut status = StepStatus::Ok;

    for i in 0..n {
        let GatePair { lam, mu } = match (params.method, memory) {
            (Method::Cbo, _) | (_, None) => GatePair { lam: params.lambda_const, mu: 0.0 },
            (_, Some(mem)) => {
                mem.personal_best_into(i, p);
                let f_p = match mem {
                    MemoryState::Record(r) => r.best_val(i),
                    MemoryState::Weighted(_) => objective.value(p),
                };
                gates(state.f_values[i], consensus.f_v, f_p, params.gate_mode)
            }
        };
        let x = &mut state.positions[i * dim..(i + 1) * dim];
        let xi = &gaussians[i * dim..(i + 1) * dim];
        for k in 0..dim {
            let to_v = x[k] - v[k];
            let mut drift = -lam * to_v;
            if mu != 0.0 {
                drift -= mu * (x[k] - p[k]);
            }
            x[k] += drift * dt + diffusion * to_v * xi[k];
        }
        let fx = objective.value(x);
        state.f_values[i] = fx;
        if !fx.is_finite() || x.iter().any(|c| !c.is_finite()) {
            status = StepStatus::Diverged;
        }
    }
    state.t += dt;
    Ok(status)
}

/// One sample of the diagnostics series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub t: f64,
    /// `|v_f(t) - x_star|`
    pub dist_vf: f64,
    /// `sum_i |X^i(t) - x_star|^2`
    pub energy: f64,
}

/// Everything needed to integrate one realization.
#[derive(Debug, Clone)]
pub struct SimulationSetup<'a> {
    pub objective: &'a ObjectiveSpec,
    pub dynamics: DynamicsParams,
    pub consensus: ConsensusParams,
    /// Ignored in CBO mode.
    pub beta: f64,
    pub n_steps: usize,
    pub record_series: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub state: ParticleState,
    /// `v_f` of the final state; `None` when the run diverged.
    pub consensus: Option<ConsensusPoint>,
    pub diverged: bool,
    pub series: Option<Vec<SeriesPoint>>,
}

/// Recomputes `cp` from `state`; false when `v_f` or `f(v_f)` is not finite.
fn refresh_consensus(
    state: &ParticleState,
    params: ConsensusParams,
    objective: &ObjectiveSpec,
    cp: &mut ConsensusPoint,
) -> bool {
    if weighted_global_best_into(&state.positions, state.dim, &state.f_values, params, &mut cp.v)
        .is_err()
    {
        return false;
    }
    cp.f_v = objective.value(&cp.v);
    cp.f_v.is_finite()
}

fn series_point(state: &ParticleState, v: &[f64], x_star: Option<&[f64]>) -> SeriesPoint {
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    match x_star {
        Some(xs) => SeriesPoint {
            t: state.t,
            dist_vf: sq(v, xs).sqrt(),
            energy: state.positions.chunks_exact(state.dim).map(|x| sq(x, xs)).sum(),
        },
        None => SeriesPoint { t: state.t, dist_vf: f64::NAN, energy: f64::NAN },
    }
}

/// Integrates `n_steps` steps from `initial` (row-major `N x dim`), drawing
/// Brownian increments from `rng`.
pub fn simulate(
    setup: &SimulationSetup<'_>,
    initial: Vec<f64>,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    setup.dynamics.validate()?;
    let objective = setup.objective;
    let mut state = ParticleState::new(objective, initial)?;
    let n = state.n_particles();
    let dt = setup.dynamics.dt;
    let x_star = objective.x_star();

    let mut memory = match setup.dynamics.method.memory_mode() {
        Some(mode) => Some(MemoryState::init(
            &state.positions,
            state.dim,
            &state.f_values,
            MemoryParams::new(setup.beta, mode)?,
        )?),
        None => None,
    };
    let mut series = setup.record_series.then(|| Vec::with_capacity(setup.n_steps + 1));
    let mut gaussians = vec![0.0; n * state.dim];
    let mut cp = ConsensusPoint { v: vec![0.0; state.dim], f_v: 0.0 };
    let mut scratch = vec![0.0; state.dim];

    if !state.is_finite() {
        return Ok(Trajectory { state, consensus: None, diverged: true, series });
    }
    for _ in 0..setup.n_steps {
        if let Some(m) = memory.as_mut() {
            m.update_all(&state.positions, &state.f_values, dt);
        }
        if !refresh_consensus(&state, setup.consensus, objective, &mut cp) {
            return Ok(Trajectory { state, consensus: None, diverged: true, series });
        }
        if let Some(s) = series.as_mut() {
            s.push(series_point(&state, &cp.v, x_star));
        }
        rng.fill_standard_normal(&mut gaussians);
        let status = em_step_with(
            &mut state,
            memory.as_ref(),
            &cp,
            &setup.dynamics,
            &gaussians,
            objective,
            &mut scratch,
        )?;
        if status == StepStatus::Diverged {
            return Ok(Trajectory { state, consensus: None, diverged: true, series });
        }
    }
    let consensus = refresh_consensus(&state, setup.consensus, objective, &mut cp).then_some(cp);
    if let (Some(s), Some(cp)) = (series.as_mut(), consensus.as_ref()) {
        s.push(series_point(&state, &cp.v, x_star));
    }
    let diverged = consensus.is_none();
    Ok(Trajectory { state, consensus, diverged, series })
}
