//! Per-realization random streams.
//!
//! A stream is a ChaCha8 generator keyed by `base_seed` with the ChaCha stream
//! word set to `stream_id` (the realization index). Normals come from the
//! ziggurat sampler in `rand_distr::StandardNormal`. Both choices are fixed for
//! a given build, so `(base_seed, stream_id)` pins every draw independently of
//! how many realizations run or on which thread.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::objective::InitBox;

#[derive(Debug, Clone)]
pub struct RngStream {
    base_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(base_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
        rng.set_stream(stream_id);
        Self { base_seed, stream_id, rng }
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.rng.sample(StandardNormal);
        }
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// A point with independent coordinates, each uniform on `[lo_k, hi_k)`.
    pub fn uniform_in_box(&mut self, init_box: &InitBox) -> Vec<f64> {
        init_box
            .bounds()
            .iter()
            .map(|&(lo, hi)| {
                let x = lo + (hi - lo) * self.uniform();
                // rounding can land exactly on hi for very narrow boxes
                if x < hi { x } else { lo }
            })
            .collect()
    }

    /// Like [`uniform_in_box`](Self::uniform_in_box) but takes raw bounds.
    pub fn uniform_in_bounds(&mut self, bounds: &[(f64, f64)]) -> Result<Vec<f64>> {
        let b = InitBox::new(bounds.to_vec())
            .map_err(|e| Error::invalid(format!("uniform_in_box: {e}")))?;
        Ok(self.uniform_in_box(&b))
    }
}
