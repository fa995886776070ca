//! Bounds on Grothendieck-type constants via correlation polytopes.

pub mod bounds;
pub mod cli;
pub mod config;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod matrix;
pub mod oracle;
pub mod polytope;
pub mod projection;
pub mod solver;

pub use error::{Error, Result};
