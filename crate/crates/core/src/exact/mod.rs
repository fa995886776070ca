//! Exact scalar arithmetic over ℚ-linear combinations of square roots, with
//! rigorous rational intervals for transcendental quantities and float to
//! rational recovery.

mod interval;
pub mod json;
mod rational;
mod scalar;

pub use interval::RationalInterval;
pub use rational::{exact_from_f64, limit_denominator, ratio, rationalize};
pub use scalar::{squarefree_split, ExactScalar};
