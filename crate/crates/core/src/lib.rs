//! Consensus-based global optimization (CBO) and its personal-best variants.
//!
//! Particles in `R^d` follow a discretized interacting SDE. Each particle drifts
//! toward an exponentially weighted consensus point `v_f` or toward its own
//! personal best, with multiplicative component-wise diffusion around `v_f`.
//! Three methods are supported:
//!
//! - [`Method::Cbo`]: constant drift rate toward `v_f`, no memory.
//! - [`Method::Pb`]: Heaviside-gated drift with the exact personal best (record process).
//! - [`Method::Wpb`]: Heaviside-gated drift with an `exp(-beta f)`-weighted time average.
//!
//! The [`experiment`] module wraps single realizations into reproducible
//! Monte-Carlo studies with per-realization RNG streams.

pub mod cli;
pub mod config;
pub mod consensus;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod memory;
pub mod objective;
pub mod report;
pub mod rng;

pub use consensus::{weighted_global_best, ConsensusParams, ConsensusPoint};
pub use dynamics::{DynamicsParams, GateMode, GatePair, Method, ParticleState};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, RunOutcome, SuccessCriterion, SuccessStats};
pub use memory::{MemoryMode, MemoryParams, MemoryState};
pub use objective::{InitBox, ObjectiveSpec};
pub use rng::RngStream;
