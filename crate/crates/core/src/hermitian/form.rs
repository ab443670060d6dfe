//! Integral positive-definite hermitian matrices over a maximal order.

use std::ops::ControlFlow;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::lattice::{count_embeddings, embedding_matrix, find_isometry, for_each_embedding, ClassLattice};
use super::matrix::QuatMatrix;
use crate::arith::{exact_rational_sqrt, rat_int};
use crate::error::{consistency, Error, Result};
use crate::lattice::GramForm;
use crate::quat_core::{MaximalOrder, Quaternion, QuaternionAlgebra};
use crate::Rational;

/// `H = H^dagger` with entries in `O`, positive definite.
#[derive(Clone, Debug)]
pub struct HermitianForm {
    lattice: ClassLattice,
    hnm: Rational,
}

impl PartialEq for HermitianForm {
    fn eq(&self, other: &Self) -> bool {
        self.matrix() == other.matrix()
    }
}

impl HermitianForm {
    pub fn new(order: Arc<MaximalOrder>, h: QuatMatrix) -> Result<Self> {
        let alg = *order.algebra();
        let lattice = ClassLattice::free(order, h)?;
        let hnm = haupt_norm(&alg, lattice.hermitian())?;
        Ok(HermitianForm { lattice, hnm })
    }

    pub fn identity(order: Arc<MaximalOrder>, g: usize) -> Result<Self> {
        Self::new(order, QuatMatrix::identity(g))
    }

    pub fn matrix(&self) -> &QuatMatrix {
        self.lattice.hermitian()
    }

    pub fn genus(&self) -> usize {
        self.lattice.genus()
    }

    pub fn order(&self) -> &Arc<MaximalOrder> {
        self.lattice.order()
    }

    pub fn haupt_norm(&self) -> &Rational {
        &self.hnm
    }

    /// The `4g x 4g` doubled Gram matrix of `x -> x^dagger H x` on `O^g`.
    pub fn trace_gram(&self) -> &GramForm {
        self.lattice.form()
    }

    /// `O^g` with this form, as a lattice.
    pub fn lattice(&self) -> &ClassLattice {
        &self.lattice
    }

    /// `M^dagger H M`.
    pub fn act(&self, m: &QuatMatrix) -> Result<HermitianForm> {
        let alg = *self.order().algebra();
        let h = m.dagger().mul(&alg, self.matrix()).mul(&alg, m);
        HermitianForm::new(self.order().clone(), h)
    }
}

/// The positive square root of the reduced norm of a positive-definite hermitian matrix.
pub fn haupt_norm(alg: &QuaternionAlgebra, h: &QuatMatrix) -> Result<Rational> {
    let nrd = h.reduced_norm(alg);
    if !nrd.is_positive() {
        return Err(Error::InvalidParameter("hermitian matrix is not positive definite".into()));
    }
    let root = exact_rational_sqrt(&nrd)
        .ok_or_else(|| Error::Consistency(format!("reduced norm {nrd} of a hermitian matrix is not a square")))?;
    if let Some(m) = moore_determinant(alg, h) {
        if m != root {
            return consistency(format!("Moore determinant {m} disagrees with sqrt(Nrd) = {root}"));
        }
    }
    Ok(root)
}

/// The Moore determinant for `g <= 3`.
pub fn moore_determinant(alg: &QuaternionAlgebra, h: &QuatMatrix) -> Option<Rational> {
    let d = |r: usize| h.get(r, r).coeffs()[0].clone();
    let nm = |r: usize, c: usize| alg.norm(h.get(r, c));
    match h.rows() {
        1 => Some(d(0)),
        2 => Some(d(0) * d(1) - nm(0, 1)),
        3 => {
            let cyc = alg.mul(&alg.mul(h.get(0, 1), h.get(1, 2)), h.get(2, 0)).trace();
            Some(d(0) * d(1) * d(2) - d(0) * nm(1, 2) - d(1) * nm(0, 2) - d(2) * nm(0, 1) + cyc)
        }
        _ => None,
    }
}

/// Every `M` in `Mat_g(O)` with `M^dagger H1 M = n H2`.
pub fn solve_congruence(h1: &HermitianForm, h2: &HermitianForm, n: i64) -> Result<Vec<QuatMatrix>> {
    if h1.genus() != h2.genus() {
        return Err(Error::InvalidParameter("forms have different sizes".into()));
    }
    let src = h2.lattice();
    let dst = h1.lattice();
    let mut out = Vec::new();
    let _ = for_each_embedding(src, dst, n, |e| {
        out.push(embedding_matrix(src, dst, e));
        ControlFlow::Continue(())
    });
    let alg = *h1.order().algebra();
    let g = h1.genus() as u32;
    let expect = rat_int(n).pow(g as i32) * h2.haupt_norm() / h1.haupt_norm();
    for m in &out {
        if m.reduced_norm(&alg) != expect {
            return consistency("solution has the wrong reduced norm");
        }
    }
    Ok(out)
}

/// Number of solutions of `M^dagger H1 M = n H2`.
pub fn count_congruence(h1: &HermitianForm, h2: &HermitianForm, n: i64) -> u64 {
    count_embeddings(h2.lattice(), h1.lattice(), n)
}

/// A witness `M` with `M^dagger H1 M = H2`, if the forms are equivalent.
pub fn is_equivalent(h1: &HermitianForm, h2: &HermitianForm) -> Result<Option<QuatMatrix>> {
    if h1.genus() != h2.genus() || h1.haupt_norm() != h2.haupt_norm() {
        return Ok(None);
    }
    let Some(e) = find_isometry(h2.lattice(), h1.lattice()) else {
        return Ok(None);
    };
    let m = embedding_matrix(h2.lattice(), h1.lattice(), &e);
    let alg = *h1.order().algebra();
    if !m.reduced_norm(&alg).is_one() {
        return consistency("isometry between forms of equal Haupt norm has reduced norm != 1");
    }
    Ok(Some(m))
}

/// `#{U : U^dagger H U = H}`.
pub fn automorphism_count(h: &HermitianForm) -> u64 {
    count_embeddings(h.lattice(), h.lattice(), 1)
}

/// `diag(x_1, .., x_g)`-style helper: the hermitian matrix with the given
/// diagonal and upper-triangular entries (lower part filled by conjugation).
pub fn hermitian_from_upper(diag: &[i64], upper: &[((usize, usize), Quaternion)]) -> QuatMatrix {
    let g = diag.len();
    let mut m = QuatMatrix::zero(g, g);
    for (r, &x) in diag.iter().enumerate() {
        m.set(r, r, Quaternion::scalar(Rational::from_integer(BigInt::from(x))));
    }
    for ((r, c), x) in upper {
        m.set(*r, *c, x.clone());
        m.set(*c, *r, x.conj());
    }
    m
}
