//! Repeated zero-sum prediction game with partial (bandit-style) feedback:
//! lattice-supported belief measures, exact small-horizon minimax values,
//! heat-kernel potentials with PDE residual checks, gradient and
//! multiplicative-weights strategies, and Monte Carlo regret experiments.

pub mod dp;
pub mod error;
pub mod expansion;
pub mod game;
pub mod lab;
pub mod math;
pub mod measure;
pub mod potential;
pub mod strategy;

pub use error::{Error, Result};
