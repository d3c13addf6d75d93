//! Personal-best memory.
//!
//! Two trackers, one entry per particle:
//!
//! - [`RecordTracker`]: the exact record process, i.e. the best point visited
//!   so far. Ties keep the earliest point.
//! - [`WeightedAccumulator`]: the `exp(-beta f)`-weighted time average of the
//!   trajectory, discretized with left-endpoint rectangles. Weights are stored
//!   relative to the lowest `f` seen so far (`reference`). When a new minimum
//!   arrives the running sums are rescaled by `exp(-beta (ref_old - ref_new)) <= 1`,
//!   so nothing overflows for large `beta * f`. The numerator holds offsets
//!   from the initial position, so a particle that never moves keeps it exactly.
//!
//! Before its first update each weighted entry reports the initial position.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemoryMode {
    Record,
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryParams {
    pub beta: f64,
    pub mode: MemoryMode,
}

impl MemoryParams {
    pub fn new(beta: f64, mode: MemoryMode) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::invalid(format!("beta must be finite and >= 0, got {beta}")));
        }
        Ok(Self { beta, mode })
    }
}

fn check_aligned(positions: &[f64], dim: usize, f_values: &[f64]) -> Result<()> {
    if f_values.is_empty() {
        return Err(Error::invalid("memory needs at least one particle"));
    }
    if dim == 0 || positions.len() != f_values.len() * dim {
        return Err(Error::invalid(format!(
            "shape mismatch: {} coordinates for {} particles of dimension {dim}",
            positions.len(),
            f_values.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordTracker {
    dim: usize,
    best_pos: Vec<f64>,
    best_val: Vec<f64>,
}

impl RecordTracker {
    pub fn new(positions: &[f64], dim: usize, f_values: &[f64]) -> Result<Self> {
        check_aligned(positions, dim, f_values)?;
        Ok(Self { dim, best_pos: positions.to_vec(), best_val: f_values.to_vec() })
    }

    pub fn len(&self) -> usize {
        self.best_val.len()
    }

    pub fn is_empty(&self) -> bool {
        self.best_val.is_empty()
    }

    /// Replaces particle `i`'s best iff `f_x` is strictly lower.
    #[inline]
    pub fn update(&mut self, i: usize, x: &[f64], f_x: f64) {
        if f_x < self.best_val[i] {
            self.best_val[i] = f_x;
            self.best_pos[i * self.dim..(i + 1) * self.dim].copy_from_slice(x);
        }
    }

    pub fn best_pos(&self, i: usize) -> &[f64] {
        &self.best_pos[i * self.dim..(i + 1) * self.dim]
    }

    pub fn best_val(&self, i: usize) -> f64 {
        self.best_val[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAccumulator {
    dim: usize,
    beta: f64,
    initial: Vec<f64>,
    num: Vec<f64>,
    den: Vec<f64>,
    reference: Vec<f64>,
    initialized: Vec<bool>,
}

impl WeightedAccumulator {
    pub fn new(positions: &[f64], dim: usize, f_values: &[f64], beta: f64) -> Result<Self> {
        check_aligned(positions, dim, f_values)?;
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::invalid(format!("beta must be finite and >= 0, got {beta}")));
        }
        let n = f_values.len();
        Ok(Self {
            dim,
            beta,
            initial: positions.to_vec(),
            num: vec![0.0; n * dim],
            den: vec![0.0; n],
            reference: f_values.to_vec(),
            initialized: vec![false; n],
        })
    }

    pub fn len(&self) -> usize {
        self.den.len()
    }

    pub fn is_empty(&self) -> bool {
        self.den.is_empty()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Adds the rectangle `x * exp(-beta (f_x - ref)) * dt` for particle `i`.
    pub fn update(&mut self, i: usize, x: &[f64], f_x: f64, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive and finite, got {dt}")));
        }
        if !f_x.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite sample in weighted personal best"));
        }
        self.accumulate(i, x, f_x, dt);
        Ok(())
    }

    #[inline]
    pub(crate) fn accumulate(&mut self, i: usize, x: &[f64], f_x: f64, dt: f64) {
        let range = i * self.dim..(i + 1) * self.dim;
        let origin = &self.initial[range.clone()];
        let num = &mut self.num[range];
        if !self.initialized[i] {
            self.initialized[i] = true;
            self.reference[i] = f_x;
            self.den[i] = 0.0;
            num.fill(0.0);
        } else if f_x < self.reference[i] {
            let scale = (-self.beta * (self.reference[i] - f_x)).exp();
            self.den[i] *= scale;
            for v in num.iter_mut() {
                *v *= scale;
            }
            self.reference[i] = f_x;
        }
        let w = (-self.beta * (f_x - self.reference[i])).exp() * dt;
        self.den[i] += w;
        for ((v, &xk), &ok) in num.iter_mut().zip(x).zip(origin) {
            *v += w * (xk - ok);
        }
    }

    pub fn is_initialized(&self, i: usize) -> bool {
        self.initialized[i]
    }

    /// Lowest objective value accumulated for particle `i`.
    pub fn reference(&self, i: usize) -> f64 {
        self.reference[i]
    }

    pub fn den(&self, i: usize) -> f64 {
        self.den[i]
    }

    pub fn personal_best_into(&self, i: usize, out: &mut [f64]) {
        let range = i * self.dim..(i + 1) * self.dim;
        if self.initialized[i] {
            let den = self.den[i];
            let origin = &self.initial[range.clone()];
            for ((o, &n), &ok) in out.iter_mut().zip(&self.num[range]).zip(origin) {
                *o = ok + n / den;
            }
        } else {
            out.copy_from_slice(&self.initial[range]);
        }
    }

    pub fn personal_best(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.personal_best_into(i, &mut out);
        out
    }
}

/// Per-realization memory: one of the two trackers.
#[derive(Debug, Clone, PartialEq)]
pub enum MemoryState {
    Record(RecordTracker),
    Weighted(WeightedAccumulator),
}

impl MemoryState {
    /// Starts every particle's personal best at its initial position.
    pub fn init(
        initial_positions: &[f64],
        dim: usize,
        f_values: &[f64],
        params: MemoryParams,
    ) -> Result<Self> {
        Ok(match params.mode {
            MemoryMode::Record => {
                MemoryState::Record(RecordTracker::new(initial_positions, dim, f_values)?)
            }
            MemoryMode::Weighted => MemoryState::Weighted(WeightedAccumulator::new(
                initial_positions,
                dim,
                f_values,
                params.beta,
            )?),
        })
    }

    pub fn mode(&self) -> MemoryMode {
        match self {
            MemoryState::Record(_) => MemoryMode::Record,
            MemoryState::Weighted(_) => MemoryMode::Weighted,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            MemoryState::Record(r) => r.len(),
            MemoryState::Weighted(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Feeds the whole current state into the memory: every particle's
    /// current position and value, over a step of length `dt`.
    pub fn update_all(&mut self, positions: &[f64], f_values: &[f64], dt: f64) {
        match self {
            MemoryState::Record(r) => {
                for (i, (x, &f)) in positions.chunks_exact(r.dim).zip(f_values).enumerate() {
                    r.update(i, x, f);
                }
            }
            MemoryState::Weighted(w) => {
                let dim = w.dim;
                for (i, (x, &f)) in positions.chunks_exact(dim).zip(f_values).enumerate() {
                    w.accumulate(i, x, f, dt);
                }
            }
        }
    }

    pub fn personal_best_into(&self, i: usize, out: &mut [f64]) {
        match self {
            MemoryState::Record(r) => out.copy_from_slice(r.best_pos(i)),
            MemoryState::Weighted(w) => w.personal_best_into(i, out),
        }
    }

    pub fn personal_best(&self, i: usize) -> Vec<f64> {
        match self {
            MemoryState::Record(r) => r.best_pos(i).to_vec(),
            MemoryState::Weighted(w) => w.personal_best(i),
        }
    }
}
