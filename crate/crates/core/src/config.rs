//! JSON configuration files, sweep grids and command-line overrides.
//!
//! Precedence, lowest to highest: built-in defaults (benchmark or toy), the
//! config file, command-line flags. A flag also removes the matching axis from
//! a sweep grid, so flags win over every config-file value.
//!
//! A sweep file has the shape
//!
//! ```json
//! { "base": { "objective": "alpine", "dim": 2 },
//!   "grid": { "method": ["cbo", "pb", "wpb"], "particles_per_dim": [3, 5, 10] } }
//! ```
//!
//! Grid axes expand as a Cartesian product. Axes nest in the order of the
//! fields of [`Grid`] (first field outermost) and values keep their listed
//! order.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::Method;
use crate::error::{Error, Result};
use crate::experiment::{ExperimentConfig, GateKind, SuccessCriterion};
use crate::objective::{fixed_dim, InitBox, DEFAULT_BENCHMARK_DIM};

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: malformed JSON: {e}", path.display())))
}

/// Overlays the keys of `patch` onto `base` and deserializes the result.
pub fn merge_config(base: &ExperimentConfig, patch: &Value) -> Result<ExperimentConfig> {
    let Value::Object(patch) = patch else {
        return Err(Error::Config("experiment config must be a JSON object".into()));
    };
    let mut merged = serde_json::to_value(base).expect("config serializes");
    let obj = merged.as_object_mut().expect("config is an object");
    for (k, v) in patch {
        // accept the long name for the horizon as well
        let key = if k == "t_final" { "T" } else { k.as_str() };
        obj.insert(key.to_string(), v.clone());
    }
    serde_json::from_value(merged).map_err(|e| Error::Config(format!("invalid config: {e}")))
}

/// Reads a single-experiment config file on top of `defaults`.
pub fn load_config(path: &Path, defaults: &ExperimentConfig) -> Result<ExperimentConfig> {
    merge_config(defaults, &read_json(path)?)
}

/// Swept fields. Every present list must be non-empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub method: Option<Vec<Method>>,
    pub objective: Option<Vec<String>>,
    pub dim: Option<Vec<usize>>,
    pub n_particles: Option<Vec<usize>>,
    /// Sets `n_particles = k * dim`; exclusive with `n_particles`.
    pub particles_per_dim: Option<Vec<usize>>,
    pub alpha: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub sigma: Option<Vec<f64>>,
    pub lambda: Option<Vec<f64>>,
    #[serde(rename = "T", alias = "t_final")]
    pub t_final: Option<Vec<f64>>,
    pub n_steps: Option<Vec<usize>>,
    pub n_mc: Option<Vec<usize>>,
    pub seed: Option<Vec<u64>>,
    pub gate_mode: Option<Vec<GateKind>>,
    pub epsilon: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub base: Value,
    pub grid: Grid,
}

type Setter = Box<dyn Fn(&mut ExperimentConfig)>;

fn axis<T: Clone + 'static>(
    name: &str,
    values: &Option<Vec<T>>,
    set: impl Fn(&mut ExperimentConfig, T) + Copy + 'static,
) -> Result<Option<Vec<Setter>>> {
    match values {
        None => Ok(None),
        Some(v) if v.is_empty() => Err(Error::Config(format!("sweep axis `{name}` is empty"))),
        Some(v) => Ok(Some(
            v.iter()
                .cloned()
                .map(|x| Box::new(move |c: &mut ExperimentConfig| set(c, x.clone())) as Setter)
                .collect(),
        )),
    }
}

fn effective_dim(c: &ExperimentConfig) -> usize {
    c.dim.or_else(|| fixed_dim(&c.objective)).unwrap_or(DEFAULT_BENCHMARK_DIM)
}

impl Grid {
    /// Expands the grid over `base`, outermost axis first.
    pub fn expand(&self, base: &ExperimentConfig) -> Result<Vec<ExperimentConfig>> {
        if self.n_particles.is_some() && self.particles_per_dim.is_some() {
            return Err(Error::Config(
                "sweep cannot set both n_particles and particles_per_dim".into(),
            ));
        }
        let axes: Vec<Vec<Setter>> = [
            axis("method", &self.method, |c, v| c.method = v)?,
            axis("objective", &self.objective, |c, v| c.objective = v)?,
            axis("dim", &self.dim, |c, v| c.dim = Some(v))?,
            axis("n_particles", &self.n_particles, |c, v| c.n_particles = v)?,
            axis("particles_per_dim", &self.particles_per_dim, |c, k| {
                c.n_particles = k * effective_dim(c)
            })?,
            axis("alpha", &self.alpha, |c, v| c.alpha = v)?,
            axis("beta", &self.beta, |c, v| c.beta = v)?,
            axis("sigma", &self.sigma, |c, v| c.sigma = v)?,
            axis("lambda", &self.lambda, |c, v| c.lambda = v)?,
            axis("T", &self.t_final, |c, v| c.t_final = v)?,
            axis("n_steps", &self.n_steps, |c, v| c.n_steps = v)?,
            axis("n_mc", &self.n_mc, |c, v| c.n_mc = v)?,
            axis("seed", &self.seed, |c, v| c.seed = v)?,
            axis("gate_mode", &self.gate_mode, |c, v| c.gate_mode = v)?,
            axis("epsilon", &self.epsilon, |c, v| c.epsilon = v)?,
        ]
        .into_iter()
        .flatten()
        .collect();

        let mut out = vec![base.clone()];
        for ax in &axes {
            out = out
                .iter()
                .flat_map(|c| {
                    ax.iter().map(move |set| {
                        let mut c = c.clone();
                        set(&mut c);
                        c
                    })
                })
                .collect();
        }
        Ok(out)
    }
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<Self> {
        serde_json::from_value(read_json(path)?)
            .map_err(|e| Error::Config(format!("{}: invalid sweep spec: {e}", path.display())))
    }

    /// Expands into concrete configs: `defaults <- base <- overrides`, then the grid
    /// minus any axis the overrides fix.
    pub fn expand(&self, defaults: &ExperimentConfig, overrides: &Overrides) -> Result<Vec<ExperimentConfig>> {
        let base = match &self.base {
            Value::Null => defaults.clone(),
            v => merge_config(defaults, v)?,
        };
        let base = overrides.apply(base);
        let mut grid = self.grid.clone();
        overrides.restrict_grid(&mut grid);
        grid.expand(&base)
    }
}

/// Values given on the command line. `None` leaves the field alone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub objective: Option<String>,
    pub dim: Option<usize>,
    pub n_particles: Option<usize>,
    pub method: Option<Method>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub sigma: Option<f64>,
    pub lambda: Option<f64>,
    pub t_final: Option<f64>,
    pub n_steps: Option<usize>,
    pub n_mc: Option<usize>,
    pub seed: Option<u64>,
    pub timeseries: Option<bool>,
    pub gate_mode: Option<GateKind>,
    pub epsilon: Option<f64>,
    pub init_box: Option<InitBox>,
    pub success: Option<SuccessCriterion>,
}

impl Overrides {
    pub fn apply(&self, mut c: ExperimentConfig) -> ExperimentConfig {
        macro_rules! set {
            ($($field:ident => $target:ident),* $(,)?) => {
                $(if let Some(v) = &self.$field { c.$target = v.clone(); })*
            };
        }
        set!(
            objective => objective, n_particles => n_particles, method => method,
            alpha => alpha, beta => beta, sigma => sigma, lambda => lambda,
            t_final => t_final, n_steps => n_steps, n_mc => n_mc, seed => seed,
            timeseries => timeseries, gate_mode => gate_mode, epsilon => epsilon,
            success => success,
        );
        if let Some(d) = self.dim {
            c.dim = Some(d);
        }
        if let Some(b) = &self.init_box {
            c.init_box = Some(b.clone());
        }
        c
    }

    pub fn restrict_grid(&self, g: &mut Grid) {
        macro_rules! clear {
            ($($field:ident => $axis:ident),* $(,)?) => {
                $(if self.$field.is_some() { g.$axis = None; })*
            };
        }
        clear!(
            objective => objective, dim => dim, method => method, alpha => alpha,
            beta => beta, sigma => sigma, lambda => lambda, t_final => t_final,
            n_steps => n_steps, n_mc => n_mc, seed => seed, gate_mode => gate_mode,
            epsilon => epsilon,
        );
        if self.n_particles.is_some() {
            g.n_particles = None;
            g.particles_per_dim = None;
        }
    }
}

/// Parses `--init-box`: either JSON `[[lo,hi],...]` or `lo:hi` repeated `dim` times.
pub fn parse_init_box(s: &str, dim: usize) -> Result<InitBox> {
    let s = s.trim();
    if s.starts_with('[') {
        return serde_json::from_str(s).map_err(|e| Error::Config(format!("bad --init-box: {e}")));
    }
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("bad --init-box `{s}` (use lo:hi or JSON)")))?;
    let parse = |v: &str| {
        v.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad --init-box bound `{v}`")))
    };
    InitBox::cube(parse(lo)?, parse(hi)?, dim).map_err(|e| Error::Config(e.to_string()))
}
