//! Quaternionic hermitian matrices and lattices: Haupt norm, the action of
//! `GL_g(O)`, isometries, and class sets of principal polarizations.

pub mod cache;
pub mod classes;
pub mod form;
pub mod lattice;
pub mod matrix;
pub mod neighbors;

pub use classes::{class_set, default_auxiliary_prime, expected_mass, PolarizedClass, PolarizedClassSet};
pub use form::{
    automorphism_count, count_congruence, haupt_norm, hermitian_from_upper, is_equivalent, moore_determinant,
    solve_congruence, HermitianForm,
};
pub use lattice::{ClassLattice, Embedding};
pub use matrix::QuatMatrix;

/// Conjugate transpose.
pub fn dagger(m: &QuatMatrix) -> QuatMatrix {
    m.dagger()
}

/// Reduced norm of a square matrix over the algebra.
pub fn reduced_norm_mat(alg: &crate::quat_core::QuaternionAlgebra, m: &QuatMatrix) -> crate::Rational {
    m.reduced_norm(alg)
}

/// `M^dagger H M`.
pub fn act(h: &HermitianForm, m: &QuatMatrix) -> crate::Result<HermitianForm> {
    h.act(m)
}
