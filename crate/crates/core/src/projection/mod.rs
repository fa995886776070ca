//! Projection onto correlation bodies and the facet search built on it.

mod bpcg;
mod decomposition;
mod facet;
mod linalg;

pub use bpcg::{
    bpcg_project, sign_atom, ActiveSet, Atom, BpcgOptions, LmoConfig, Projection, ReducedSpace,
    PRUNE_WEIGHT,
};
pub use decomposition::DecompositionCertificate;
pub use facet::{
    active_matrix, face_rank, facet_loop, recover_lambda, separation_ratio, tight_strategies,
    v_update, FacetOptions, FacetResult, FacetStatus,
};
pub use linalg::{
    affine_rank, integer_null_vector, integer_rank, integerize_normal, primitive, IntegerNormal,
};
