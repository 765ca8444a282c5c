//! Exact computations with quiver mutation, c-vectors, generalized
//! intersection matrices, reflections in the universal Coxeter group and
//! l-vectors, together with executable checkers for the relations between
//! them on fork quivers.
//!
//! Vertex indices are 0-based in every Rust API. Parsing and display
//! (`MutationSequence`, `Word`, `LinearOrdering`) use 1-based labels.

pub mod bigint_serde;
pub mod coxeter;
pub mod curves;
pub mod error;
pub mod fixtures;
pub mod fork;
pub mod gim;
pub mod matrix;
pub mod quiver;
pub mod verify;

pub use coxeter::{
    coxeter_product_check, l_matrix_recurrence, l_matrix_words, l_vector_from_word,
    mutate_reflections, pi_matrix, reduce, CoxeterCheck, LMatrix, Reflection, ReflectionTuple,
    WalkState, Word,
};
pub use curves::{
    crossing_word, curve_for_reflection, curves_for_reflections, is_admissible_curve,
    non_crossing, render_svg, torus_non_crossing, CurveFamily, Family, FamilyLabeling, Point,
    Polyline, Window,
};
pub use error::{Error, Result};
pub use fork::{
    acyclic_ordering, cyclic_signed_ordering, find_point_of_return, fork_linear_ordering,
    has_vortex, is_fork_preserving, last_green_vertex, random_fork, ForkCertificate,
    LinearOrdering,
};
pub use gim::{apply_gim_sequence, gim_from_ordering, is_admissible, mutate_gim, Gim};
pub use matrix::IntMatrix;
pub use quiver::{
    apply_sequence, mutate_extended, sign_vector, structural_predicates, ExchangeMatrix,
    FramedSeed, MutationSequence, SignVector, StructuralPredicates,
};
pub use verify::{
    epsilon_tau, is_mutation_cyclic_rank3, quadratic_signs, random_walk_campaign,
    verify_l_c_relation, verify_rank3_theorem, verify_sign_invariance, CampaignConfig, Check,
    CheckKind, EpsilonTau, VerificationReport,
};
