//! Points of the correlation bodies and their symmetries.

mod group;
mod strategy;

pub use group::{InvariantBasis, SignedPerm, SignedPermutationGroup, DEFAULT_CLOSURE_CAP};
pub use strategy::{
    vertex_value, vertex_value_f64, vertex_value_int, SignStrategy, Strategy, UnitStrategy,
};
