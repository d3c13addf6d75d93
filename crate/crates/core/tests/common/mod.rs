//! Invariant checks shared by the property tests and the acceptance harness.
//! Each check draws its inputs from `rng` and reports the first violation.

#![allow(dead_code)]

use cbo_pb::consensus::{lemma_constants, weighted_global_best};
use cbo_pb::dynamics::{gates, simulate, DynamicsParams, GateMode, Method, SimulationSetup};
use cbo_pb::experiment::{toy_initial_conditions, InitScheme, ToyInit};
use cbo_pb::memory::{RecordTracker, WeightedAccumulator};
use cbo_pb::objective::lookup;
use cbo_pb::{ConsensusParams, ObjectiveSpec, RngStream};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn alpha(a: f64) -> ConsensusParams {
    ConsensusParams::new(a).unwrap()
}

/// `v_f` stays in the bounding box of the cloud and inside the largest norm.
pub fn vf_convex_hull(rng: &mut impl Rng) -> Check {
    let dim = rng.random_range(1..5);
    let n = rng.random_range(1..15);
    let xs: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-100.0..100.0)).collect();
    let fs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..50.0)).collect();
    let a = [0.0, 1.0, 10.0, 100.0, 1e4][rng.random_range(0..5)];
    let v = weighted_global_best(&xs, dim, &fs, alpha(a)).map_err(|e| e.to_string())?;
    let max_norm = xs.chunks_exact(dim).map(norm).fold(0.0, f64::max);
    if norm(&v) > max_norm * (1.0 + 1e-12) {
        return Err(format!("|v| = {} exceeds max |x| = {max_norm}", norm(&v)));
    }
    for k in 0..dim {
        let col: Vec<f64> = xs.iter().skip(k).step_by(dim).copied().collect();
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slack = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
        if v[k] < lo - slack || v[k] > hi + slack {
            return Err(format!("v[{k}] = {} outside [{lo}, {hi}]", v[k]));
        }
    }
    Ok(())
}

/// A random walk of `steps` samples in `dim` dimensions.
pub fn random_walk(rng: &mut impl Rng, dim: usize, steps: usize, scale: f64) -> Vec<Vec<f64>> {
    let mut x: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
    (0..steps)
        .map(|_| {
            for c in x.iter_mut() {
                *c += scale * rng.random_range(-1.0..1.0);
            }
            x.clone()
        })
        .collect()
}

/// `p_f` stays within the largest visited norm and inside the visited box.
pub fn pf_convex_hull(rng: &mut impl Rng) -> Check {
    let obj = lookup("rastrigin", Some(2)).unwrap();
    let beta = [0.0, 1.0, 50.0, 1e4][rng.random_range(0..4)];
    let steps = rng.random_range(1..400);
    let path = random_walk(rng, 2, steps, 0.2);
    let f0 = obj.value(&path[0]);
    let mut w = WeightedAccumulator::new(&path[0], 2, &[f0], beta).unwrap();
    let mut max_norm = norm(&path[0]);
    let mut lo = path[0].clone();
    let mut hi = path[0].clone();
    for x in &path {
        w.update(0, x, obj.value(x), 0.01).map_err(|e| e.to_string())?;
        max_norm = max_norm.max(norm(x));
        for k in 0..2 {
            lo[k] = lo[k].min(x[k]);
            hi[k] = hi[k].max(x[k]);
        }
        let p = w.personal_best(0);
        if norm(&p) > max_norm * (1.0 + 1e-12) {
            return Err(format!("|p| = {} exceeds visited max {max_norm} (beta {beta})", norm(&p)));
        }
        for k in 0..2 {
            let slack = 1e-12 * lo[k].abs().max(hi[k].abs()).max(1.0);
            if p[k] < lo[k] - slack || p[k] > hi[k] + slack {
                return Err(format!("p[{k}] = {} outside [{}, {}]", p[k], lo[k], hi[k]));
            }
        }
    }
    Ok(())
}

/// Distinct objective values with pairwise gaps of at least `gap`, shuffled.
fn gapped_values(rng: &mut impl Rng, n: usize, gap: f64) -> Vec<f64> {
    let mut f = 0.0;
    let mut out: Vec<f64> = (0..n)
        .map(|_| {
            f += gap + rng.random_range(0.0..1.0);
            f
        })
        .collect();
    for i in (1..n).rev() {
        out.swap(i, rng.random_range(0..=i));
    }
    out
}

fn argmin(f: &[f64]) -> usize {
    (0..f.len()).fold(0, |b, i| if f[i] < f[b] { i } else { b })
}

/// Laplace concentration of `v_f` as `alpha` grows through {1, 10, 100, 1000}.
///
/// With gaps `>= g` every other weight is at most `e^{-alpha g}` relative to
/// the best one, so `|v_f - x_best| <= e^{-alpha g} sum_i |x_i - x_best|`.
/// That envelope is checked at every `alpha`, the distance must fall below
/// `1e-6` at `alpha = 1000`, and for two-point clouds (where `v_f` moves along
/// a segment) the distance itself must be non-increasing.
pub fn vf_laplace(rng: &mut impl Rng) -> Check {
    let gap = 0.1;
    let dim = rng.random_range(1..4);
    let n = rng.random_range(2..10);
    let xs: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-10.0..10.0)).collect();
    let fs = gapped_values(rng, n, gap);
    let best = &xs[argmin(&fs) * dim..(argmin(&fs) + 1) * dim];
    let spread: f64 = xs.chunks_exact(dim).map(|x| dist(x, best)).sum();
    let mut prev = f64::INFINITY;
    for a in [1.0, 10.0, 100.0, 1000.0] {
        let v = weighted_global_best(&xs, dim, &fs, alpha(a)).unwrap();
        let d = dist(&v, best);
        let envelope = (-a * gap).exp() * spread;
        if d > envelope * (1.0 + 1e-9) + 1e-12 * spread.max(1.0) {
            return Err(format!("alpha {a}: |v - x_best| = {d} above envelope {envelope}"));
        }
        if a == 1000.0 && d >= 1e-6 {
            return Err(format!("alpha 1000: |v - x_best| = {d}"));
        }
        if n == 2 && d > prev * (1.0 + 1e-12) {
            return Err(format!("alpha {a}: distance grew from {prev} to {d}"));
        }
        prev = d;
    }
    Ok(())
}

/// Piecewise-constant path: `(position, f)` per step, with segment values
/// separated by at least `gap`.
fn piecewise_path(rng: &mut impl Rng, dim: usize, gap: f64) -> Vec<(Vec<f64>, f64)> {
    let segments = rng.random_range(2..8);
    let fs = gapped_values(rng, segments, gap);
    let mut path = Vec::new();
    for f in fs {
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect();
        for _ in 0..rng.random_range(1..30) {
            path.push((x.clone(), f));
        }
    }
    path
}

/// Laplace concentration of `p_f` towards the record point as `beta` grows
/// through {1, 10, 100, 1e4}; same envelope argument as [`vf_laplace`], with
/// time weights.
pub fn pf_laplace(rng: &mut impl Rng) -> Check {
    let gap = 0.1;
    let dt = 0.01;
    let dim = rng.random_range(1..3);
    let path = piecewise_path(rng, dim, gap);
    let mut record = RecordTracker::new(&path[0].0, dim, &[path[0].1]).unwrap();
    for (x, f) in &path {
        record.update(0, x, *f);
    }
    let best = record.best_pos(0).to_vec();
    let best_time = path.iter().filter(|(x, _)| *x == best).count() as f64 * dt;
    let spread: f64 = path.iter().map(|(x, _)| dist(x, &best) * dt).sum();
    for beta in [1.0, 10.0, 100.0, 1e4] {
        let mut w = WeightedAccumulator::new(&path[0].0, dim, &[path[0].1], beta).unwrap();
        for (x, f) in &path {
            w.update(0, x, *f, dt).unwrap();
        }
        let d = dist(&w.personal_best(0), &best);
        let envelope = (-beta * gap).exp() * spread / best_time;
        if d > envelope * (1.0 + 1e-9) + 1e-12 * spread.max(1.0) {
            return Err(format!("beta {beta}: |p - record| = {d} above envelope {envelope}"));
        }
        if beta == 1e4 && d >= 1e-6 {
            return Err(format!("beta 1e4: |p - record| = {d}"));
        }
    }
    Ok(())
}

/// `lambda * mu == 0` for sharp gates on `count` random triples, ties included.
pub fn gate_exclusivity(rng: &mut impl Rng, count: usize) -> Check {
    for _ in 0..count {
        let mut draw = || {
            if rng.random_bool(0.3) {
                rng.random_range(0..3) as f64
            } else {
                rng.random_range(-5.0..5.0)
            }
        };
        let (fx, fv, fp) = (draw(), draw(), draw());
        let g = gates(fx, fv, fp, GateMode::Sharp);
        if g.lam * g.mu != 0.0 {
            return Err(format!("lambda = {}, mu = {} at ({fx}, {fv}, {fp})", g.lam, g.mu));
        }
    }
    Ok(())
}

/// The record value is the running minimum and never increases.
pub fn record_monotone(rng: &mut impl Rng) -> Check {
    let steps = rng.random_range(1..200);
    let mut f0 = rng.random_range(0.0..10.0);
    let mut r = RecordTracker::new(&[0.0], 1, &[f0]).unwrap();
    for k in 0..steps {
        let f = if rng.random_bool(0.2) { f0 } else { rng.random_range(0.0..10.0) };
        let before = r.best_val(0);
        r.update(0, &[k as f64], f);
        if r.best_val(0) > before {
            return Err(format!("record rose from {before} to {}", r.best_val(0)));
        }
        f0 = f0.min(f);
        if r.best_val(0) != f0 {
            return Err(format!("record {} is not the running min {f0}", r.best_val(0)));
        }
    }
    Ok(())
}

/// With `sigma = 0` a start whose sharp gates are all closed never moves.
pub fn gated_stationarity(which: ToyInit, method: Method, steps: usize) -> Check {
    let obj = lookup("double_well_1d", None).unwrap();
    let InitScheme::Explicit { points } = toy_initial_conditions(which) else {
        return Err("toy start is not explicit".into());
    };
    let x0: Vec<f64> = points.concat();
    let setup = SimulationSetup {
        objective: &obj,
        dynamics: DynamicsParams {
            sigma: 0.0,
            lambda_const: 1.0,
            dt: 1e-3,
            gate_mode: GateMode::Sharp,
            method,
        },
        consensus: alpha(10.0),
        beta: 30.0,
        n_steps: steps,
        record_series: false,
    };
    let tr = simulate(&setup, x0.clone(), &mut RngStream::new(0, 0)).map_err(|e| e.to_string())?;
    if tr.state.positions != x0 {
        return Err(format!("{method} {which:?}: {x0:?} moved to {:?}", tr.state.positions));
    }
    Ok(())
}

/// Bounds of the 1-d double well on `[-n, n]`: `(f_lo, f_hi, L)`.
/// `f_lo` is a grid minimum less a margin larger than the grid error, so the
/// resulting constants are conservative.
pub fn double_well_bounds(obj: &ObjectiveSpec, n: f64) -> (f64, f64, f64) {
    let grid = 200_000;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..=grid {
        let f = obj.value(&[-n + 2.0 * n * k as f64 / grid as f64]);
        lo = lo.min(f);
        hi = hi.max(f);
    }
    let slope = |x: f64| (4.0 * x * x * x - 4.0 * x + 0.01f64).abs();
    (lo - 1e-6, hi, slope(n).max(slope(-n)))
}

/// `|v_f[phi] - v_f[phi_hat]|^2 <= C2 |phi - phi_hat|^2` for configurations
/// of the 1-d double well inside the ball of radius `n = 2`.
pub fn lemma_c2(rng: &mut impl Rng, obj: &ObjectiveSpec, bounds: (f64, f64, f64)) -> Check {
    let n = 2.0;
    let (f_lo, f_hi, l) = bounds;
    let particles = rng.random_range(1..5);
    let a = [0.1, 0.5, 1.0, 2.0][rng.random_range(0..4)];
    let in_ball = |rng: &mut dyn rand::RngCore| -> Vec<f64> {
        let v: Vec<f64> = (0..particles).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = n * rng.random_range(0.0..1.0f64).powf(1.0 / particles as f64) / norm(&v).max(1e-300);
        v.iter().map(|c| c * r).collect()
    };
    let phi = in_ball(rng);
    let phi_hat = if rng.random_bool(0.5) {
        let eps = 10f64.powf(rng.random_range(-8.0..-1.0));
        let p: Vec<f64> = phi.iter().map(|c| c + eps * rng.random_range(-1.0..1.0)).collect();
        let s = (n / norm(&p)).min(1.0);
        p.iter().map(|c| c * s).collect()
    } else {
        in_ball(rng)
    };
    let c = lemma_constants(n, l, f_lo, f_hi, a, 1.0, particles).unwrap();
    if !c.c2.is_finite() {
        return Ok(());
    }
    let f = |p: &[f64]| p.iter().map(|x| obj.value(&[*x])).collect::<Vec<_>>();
    let v = weighted_global_best(&phi, 1, &f(&phi), alpha(a)).unwrap();
    let w = weighted_global_best(&phi_hat, 1, &f(&phi_hat), alpha(a)).unwrap();
    let lhs = dist(&v, &w).powi(2);
    let rhs = c.c2 * dist(&phi, &phi_hat).powi(2);
    if lhs > rhs * (1.0 + 1e-12) + 1e-28 {
        return Err(format!("alpha {a}: {lhs} > C2 |dphi|^2 = {rhs}"));
    }
    Ok(())
}

/// `|p_f[phi](t) - p_f[phi_hat](t)|^2 <= C1 sup_{s<=t} |phi(s) - phi_hat(s)|^2`
/// along pairs of piecewise-constant paths in `[-2, 2]`, sampled at step
/// boundaries.
pub fn lemma_c1(rng: &mut impl Rng, obj: &ObjectiveSpec, bounds: (f64, f64, f64)) -> Check {
    let n = 2.0;
    let dt = 0.01;
    let (f_lo, f_hi, l) = bounds;
    let beta = [0.1, 0.5, 1.0, 2.0][rng.random_range(0..4)];
    let c1 = lemma_constants(n, l, f_lo, f_hi, 1.0, beta, 1).unwrap().c1;
    if !c1.is_finite() {
        return Ok(());
    }
    let eps = 10f64.powf(rng.random_range(-8.0..0.0));
    let mut phi = Vec::new();
    let mut phi_hat = Vec::new();
    for _ in 0..rng.random_range(1..20) {
        let x: f64 = rng.random_range(-n..n);
        let y = (x + eps * rng.random_range(-1.0..1.0)).clamp(-n, n);
        for _ in 0..rng.random_range(1..50) {
            phi.push(x);
            phi_hat.push(y);
        }
    }
    let mut a = WeightedAccumulator::new(&phi[..1], 1, &[obj.value(&phi[..1])], beta).unwrap();
    let mut b = WeightedAccumulator::new(&phi_hat[..1], 1, &[obj.value(&phi_hat[..1])], beta).unwrap();
    let mut sup = 0.0f64;
    for (x, y) in phi.iter().zip(&phi_hat) {
        a.update(0, &[*x], obj.value(&[*x]), dt).unwrap();
        b.update(0, &[*y], obj.value(&[*y]), dt).unwrap();
        sup = sup.max((x - y).abs());
        let lhs = (a.personal_best(0)[0] - b.personal_best(0)[0]).powi(2);
        let rhs = c1 * sup * sup;
        if lhs > rhs * (1.0 + 1e-12) + 1e-28 {
            return Err(format!("beta {beta}: {lhs} > C1 sup|dphi|^2 = {rhs}"));
        }
    }
    Ok(())
}

/// Runs `check` `count` times on one generator, stopping at the first failure.
pub fn repeat<R: Rng>(rng: &mut R, count: usize, mut check: impl FnMut(&mut R) -> Check) -> Check {
    for k in 0..count {
        check(rng).map_err(|e| format!("case {k}: {e}"))?;
    }
    Ok(())
}
