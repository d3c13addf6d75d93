//! Weighted global best `v_f`.
//!
//! `v_f = sum_i X^i w_i / sum_i w_i` with `w_i = exp(-alpha f_i)`. Weights are
//! evaluated as `exp(-alpha (f_i - min_j f_j))`, which leaves `v_f` unchanged
//! and keeps the largest weight at exactly 1, so the denominator never
//! underflows however large `alpha * f` gets. The sum runs over offsets from
//! the lowest-valued particle, which keeps a cloud of identical points fixed.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusParams {
    pub alpha: f64,
}

impl ConsensusParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::invalid(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        Ok(Self { alpha })
    }
}

/// The consensus point together with the objective value there.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusPoint {
    pub v: Vec<f64>,
    pub f_v: f64,
}

/// Computes `v_f` for `positions` laid out row-major as `N x dim`.
pub fn weighted_global_best(
    positions: &[f64],
    dim: usize,
    f_values: &[f64],
    params: ConsensusParams,
) -> Result<Vec<f64>> {
    let mut v = vec![0.0; dim];
    weighted_global_best_into(positions, dim, f_values, params, &mut v)?;
    Ok(v)
}

/// Allocation-free variant of [`weighted_global_best`] writing into `out`.
pub fn weighted_global_best_into(
    positions: &[f64],
    dim: usize,
    f_values: &[f64],
    params: ConsensusParams,
    out: &mut [f64],
) -> Result<()> {
    let n = f_values.len();
    if n == 0 {
        return Err(Error::invalid("weighted_global_best needs at least one particle"));
    }
    if dim == 0 || positions.len() != n * dim || out.len() != dim {
        return Err(Error::invalid(format!(
            "shape mismatch: {} coordinates for {n} particles of dimension {dim}",
            positions.len()
        )));
    }
    if f_values.iter().chain(positions).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite position or objective value"));
    }

    // accumulate offsets from the best particle so coincident points return it exactly
    let (best, f_min) = f_values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, f)| if f < acc.1 { (i, f) } else { acc });
    let anchor = &positions[best * dim..(best + 1) * dim];
    out.fill(0.0);
    let mut den = 0.0;
    for (x, &f) in positions.chunks_exact(dim).zip(f_values) {
        let w = (-params.alpha * (f - f_min)).exp();
        den += w;
        for ((o, &xk), &ak) in out.iter_mut().zip(x).zip(anchor) {
            *o += w * (xk - ak);
        }
    }
    for (o, &ak) in out.iter_mut().zip(anchor) {
        *o = ak + *o / den;
    }
    Ok(())
}

/// The two constants of the local Lipschitz estimates for the weighted
/// personal best (`c1`) and the weighted global best (`c2`) on the ball of
/// radius `n`. Either may be `+inf` when the exponentials overflow; callers
/// treat that as "no usable bound".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaConstants {
    pub c1: f64,
    pub c2: f64,
}

impl LemmaConstants {
    pub fn is_finite(&self) -> bool {
        self.c1.is_finite() && self.c2.is_finite()
    }
}

/// `C1 = 1 + (1 + 2 L) beta n e^{beta (f_hi - f_lo)}`,
/// `C2 = (1 + alpha n L e^{-alpha f_lo} / N + n e^{alpha (f_hi - f_lo)} (1/N + alpha n L))^2 2^{N-1}`.
#[allow(clippy::too_many_arguments)]
pub fn lemma_constants(
    n: f64,
    lipschitz: f64,
    f_lo: f64,
    f_hi: f64,
    alpha: f64,
    beta: f64,
    n_particles: usize,
) -> Result<LemmaConstants> {
    let args = [n, lipschitz, f_lo, f_hi, alpha, beta];
    if args.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("lemma_constants arguments must be finite"));
    }
    if n <= 0.0 || n_particles == 0 {
        return Err(Error::invalid("lemma_constants requires n > 0 and N >= 1"));
    }
    let big_n = n_particles as f64;
    let c1 = 1.0 + (1.0 + 2.0 * lipschitz) * beta * n * (beta * (f_hi - f_lo)).exp();
    let inner = 1.0
        + alpha * n * lipschitz * (-alpha * f_lo).exp() / big_n
        + n * (alpha * (f_hi - f_lo)).exp() * (1.0 / big_n + alpha * n * lipschitz);
    let c2 = inner * inner * 2f64.powi(n_particles as i32 - 1);
    Ok(LemmaConstants {
        c1: if c1.is_nan() { f64::INFINITY } else { c1 },
        c2: if c2.is_nan() { f64::INFINITY } else { c2 },
    })
}
