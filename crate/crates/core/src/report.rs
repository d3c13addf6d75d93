//! CSV output. Floats are written with Rust's shortest round-trip formatting,
//! so reading a file back yields the exact values that were computed.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::experiment::{MeanSeriesPoint, MonteCarloResult};
use crate::objective::{fixed_dim, DEFAULT_BENCHMARK_DIM};

pub const RESULTS_HEADER: [&str; 18] = [
    "method", "objective", "dim", "n_particles", "alpha", "beta", "sigma", "lambda", "T",
    "n_steps", "n_mc", "seed", "success_rate", "se", "n_diverged", "mean_f_vf", "sd_f_vf",
    "wall_s",
];

pub const SERIES_HEADER: [&str; 3] = ["t", "mean_dist_vf", "mean_energy"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub method: String,
    pub objective: String,
    pub dim: usize,
    pub n_particles: usize,
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub lambda: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub n_steps: usize,
    pub n_mc: usize,
    pub seed: u64,
    pub success_rate: f64,
    pub se: f64,
    pub n_diverged: usize,
    pub mean_f_vf: f64,
    pub sd_f_vf: f64,
    /// Empty unless wall-clock recording was requested.
    pub wall_s: Option<f64>,
}

impl From<&MonteCarloResult> for ResultRow {
    fn from(r: &MonteCarloResult) -> Self {
        let c = &r.config;
        let s = &r.stats;
        Self {
            method: c.method.to_string(),
            objective: c.objective.clone(),
            dim: c.dim.or_else(|| fixed_dim(&c.objective)).unwrap_or(DEFAULT_BENCHMARK_DIM),
            n_particles: c.n_particles,
            alpha: c.alpha,
            beta: c.beta,
            sigma: c.sigma,
            lambda: c.lambda,
            t_final: c.t_final,
            n_steps: c.n_steps,
            n_mc: c.n_mc,
            seed: c.seed,
            success_rate: s.success_rate,
            se: s.se,
            n_diverged: s.n_diverged,
            mean_f_vf: s.mean_f_vf,
            sd_f_vf: s.sd_f_vf,
            wall_s: c.record_wall_time.then_some(s.wall_seconds),
        }
    }
}

pub fn write_results<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series<W: Write>(out: W, series: &[MeanSeriesPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_HEADER)?;
    for p in series {
        w.serialize((p.t, p.mean_dist_vf, p.mean_energy))?;
    }
    w.flush()?;
    Ok(())
}
