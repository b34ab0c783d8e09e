//! Finite linear spaces and projective planes.
//!
//! The crate covers the axioms and basic invariants of finite linear spaces,
//! the planes PG(2, q) for small q, embedding and automorphism search,
//! a planarisation calculus with planar closure and truncated projective
//! completion, amalgamation in hereditary classes, isomorph-free
//! enumeration and a finite extension game.

pub mod amalgam;
pub mod enumerate;
pub mod field;
pub mod game;
pub mod morphisms;
pub mod pg;
pub mod planarise;
pub mod space;

pub use field::{gf, FieldError, FiniteField};
pub use morphisms::{
    automorphisms, extend_to_automorphism, find_embeddings, is_homogeneous, is_isomorphic,
    is_partial_isomorphism, nonhomogeneity_witness_deg5, MorphismError, PartialMap, SearchConfig,
};
pub use pg::projective_plane;
pub use space::{
    named, validate, Line, LinearSpace, Point, ShapeReport, SpaceError, ValidationError,
};
