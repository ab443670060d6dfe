//! Hermitian O-lattices inside `O^g` and the O-linear maps between them that
//! scale the hermitian form by a fixed integer.
//!
//! A lattice `L` is stored by a Z-basis `b_0, .., b_{4g-1}` in the ambient
//! coordinates of `O^g` (slot `s`, order basis element `k` at index `4s + k`),
//! an integral ambient hermitian matrix `H` and a scale `d`; the form on `L`
//! is `h(x, y) = x^dagger H y / d`, which is O-valued on `L`.

use std::ops::ControlFlow;
use std::sync::Arc;

use rayon::prelude::*;

use super::matrix::QuatMatrix;
use crate::arith::rat;
use crate::error::{consistency, Error, Result};
use crate::lattice::intlin::HnfBasis;
use crate::lattice::{short_vectors, theta_prefix, vectors_up_to, CrossForm, GramForm, MatrixSearch};
use crate::quat_core::{MaximalOrder, OrderElt, Quaternion};

/// How O-linear maps out of a lattice are parametrized.
#[derive(Clone, Debug)]
enum Generators {
    /// `L = O^g`: a map is determined by the images of the unit vectors.
    Free,
    /// A right ideal `J` (`g = 1`): a map is left multiplication by some
    /// `lambda`, determined by the image `y = lambda x` of a fixed `x in J`.
    /// `conj_x_b[r] = conj(x) b_r`, so `lambda b_r = y conj_x_b[r] / nm_x`.
    Ideal { x: Vec<i64>, conj_x_b: Vec<OrderElt>, nm_x: i64 },
}

/// A positive-definite hermitian O-lattice on which the form is O-valued.
#[derive(Clone, Debug)]
pub struct ClassLattice {
    order: Arc<MaximalOrder>,
    g: usize,
    basis: HnfBasis,
    hermitian: QuatMatrix,
    scale: i64,
    form: GramForm,
    cross: CrossForm,
    // right[k][r] = coordinates of b_r o_k
    right: [Vec<Vec<i64>>; 4],
    gens: Option<Generators>,
}

/// An O-linear map `phi: L_src -> L_dst` given by the images of the source
/// basis: `image[r]` holds the destination coordinates of `phi(b_r)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Embedding {
    pub image: Vec<Vec<i64>>,
}

impl ClassLattice {
    pub fn new(order: Arc<MaximalOrder>, hermitian: QuatMatrix, basis: HnfBasis, scale: i64) -> Result<Self> {
        let g = hermitian.rows();
        if g == 0 || !hermitian.is_square() {
            return Err(Error::InvalidParameter("hermitian matrix must be square with g >= 1".into()));
        }
        if basis.dim() != 4 * g {
            return Err(Error::InvalidParameter("lattice basis has the wrong rank".into()));
        }
        if scale <= 0 {
            return Err(Error::InvalidParameter("scale must be positive".into()));
        }
        if hermitian.dagger() != hermitian {
            return Err(Error::InvalidParameter("matrix is not hermitian".into()));
        }
        let mut herm = vec![vec![[0i64; 4]; g]; g];
        for r in 0..g {
            for s in 0..g {
                herm[r][s] = order
                    .coords(hermitian.get(r, s))
                    .ok_or_else(|| Error::InvalidParameter("hermitian matrix is not integral".into()))?;
            }
        }
        let n = 4 * g;
        // ambient[a][b] = conj(o_k) H_rs o_l for a = 4r + k, b = 4s + l
        let conj_basis: Vec<OrderElt> = (0..4).map(|k| order.conj(&unit(k))).collect();
        let mut ambient = vec![vec![[0i64; 4]; n]; n];
        for r in 0..g {
            for k in 0..4 {
                for s in 0..g {
                    let ck_h = order.mul(&conj_basis[k], &herm[r][s]);
                    for l in 0..4 {
                        ambient[4 * r + k][4 * s + l] = order.mul(&ck_h, &unit(l));
                    }
                }
            }
        }
        let rows = basis.rows();
        let mut tensor = vec![0i64; n * n * 4];
        for i in 0..n {
            for j in 0..n {
                let mut acc = [0i128; 4];
                for a in 0..n {
                    let bia = rows[i][a] as i128;
                    if bia == 0 {
                        continue;
                    }
                    for b in 0..n {
                        let bjb = rows[j][b] as i128;
                        if bjb == 0 {
                            continue;
                        }
                        for c in 0..4 {
                            acc[c] += bia * bjb * ambient[a][b][c] as i128;
                        }
                    }
                }
                for c in 0..4 {
                    if acc[c] % scale as i128 != 0 {
                        return Err(Error::InvalidParameter("form is not integral on the lattice".into()));
                    }
                    tensor[(i * n + j) * 4 + c] = i64::try_from(acc[c] / scale as i128)
                        .map_err(|_| Error::InvalidParameter("form entry too large".into()))?;
                }
            }
        }
        let cross = CrossForm::new(n, 4, tensor);
        let gram2: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| order.trd(&to_elt(cross.entry(i, j)))).collect())
            .collect();
        let form = GramForm::from_gram2(gram2)?;
        let mut right: [Vec<Vec<i64>>; 4] = Default::default();
        for (k, rk) in right.iter_mut().enumerate() {
            for r in 0..n {
                let v = rows[r].clone();
                let prod = right_mul(&order, &v, &unit(k));
                let c = basis
                    .coords(&prod)
                    .ok_or_else(|| Error::InvalidParameter("lattice is not a right O-module".into()))?;
                rk.push(c);
            }
        }
        let mut lat = ClassLattice { order, g, basis, hermitian, scale, form, cross, right, gens: None };
        lat.gens = lat.make_generators();
        Ok(lat)
    }

    /// `O^g` with the form `x^dagger H y`.
    pub fn free(order: Arc<MaximalOrder>, hermitian: QuatMatrix) -> Result<Self> {
        let n = 4 * hermitian.rows();
        Self::new(order, hermitian, HnfBasis::identity(n), 1)
    }

    /// A right ideal `J` of `O`, with the form `conj(x) y / Nm(J)`.
    pub fn ideal(order: Arc<MaximalOrder>, basis: HnfBasis, norm: i64) -> Result<Self> {
        Self::new(order, QuatMatrix::identity(1), basis, norm)
    }

    fn make_generators(&self) -> Option<Generators> {
        if self.scale == 1 && self.basis.is_identity() {
            return Some(Generators::Free);
        }
        if self.g != 1 {
            return None;
        }
        let x = shortest_vector(&self.form);
        let xa = self.ambient_elt(&x);
        let cx = self.order.conj(&xa);
        let conj_x_b = self
            .basis
            .rows()
            .iter()
            .map(|b| self.order.mul(&cx, &to_elt(b)))
            .collect();
        let nm_x = self.order.nrd(&xa);
        Some(Generators::Ideal { x, conj_x_b, nm_x })
    }

    pub fn order(&self) -> &Arc<MaximalOrder> {
        &self.order
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    /// Rank over Z (`4g`).
    pub fn rank(&self) -> usize {
        4 * self.g
    }

    pub fn basis(&self) -> &HnfBasis {
        &self.basis
    }

    pub fn hermitian(&self) -> &QuatMatrix {
        &self.hermitian
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// `Q(x) = h(x, x)` on lattice coordinates.
    pub fn form(&self) -> &GramForm {
        &self.form
    }

    /// `h(x, y)` on lattice coordinates, valued in order coordinates.
    pub fn cross(&self) -> &CrossForm {
        &self.cross
    }

    /// Matrices of right multiplication by the order basis elements.
    pub fn right_action(&self) -> &[Vec<Vec<i64>>; 4] {
        &self.right
    }

    /// Whether this is `O^g` with its standard coordinates and scale 1.
    pub fn is_free(&self) -> bool {
        matches!(self.gens, Some(Generators::Free))
    }

    pub fn h(&self, x: &[i64], y: &[i64]) -> OrderElt {
        to_elt(&self.cross.eval(x, y))
    }

    /// Ambient coordinates of a lattice vector.
    pub fn ambient(&self, x: &[i64]) -> Vec<i64> {
        self.basis.combine(x)
    }

    fn ambient_elt(&self, x: &[i64]) -> OrderElt {
        to_elt(&self.ambient(x))
    }

    /// The ambient column vector over the algebra.
    pub fn ambient_column(&self, x: &[i64]) -> Vec<Quaternion> {
        let v = self.ambient(x);
        (0..self.g)
            .map(|s| self.order.to_quaternion(&to_elt(&v[4 * s..4 * s + 4])))
            .collect()
    }

    /// Lattice coordinates of an ambient vector given as quaternions, if it lies in the lattice.
    pub fn coords_of_column(&self, col: &[Quaternion]) -> Option<Vec<i64>> {
        let mut v = Vec::with_capacity(4 * self.g);
        for q in col {
            v.extend(self.order.coords(q)?);
        }
        self.basis.coords(&v)
    }

    /// Counts of lattice vectors of `Q`-value `1..=max`.
    pub fn theta(&self, max: i64) -> Vec<u64> {
        theta_prefix(&self.form, max)
    }

    /// `v o_k`, on lattice coordinates.
    pub fn right_mul_basis(&self, v: &[i64], k: usize) -> Vec<i64> {
        let n = self.rank();
        let mut out = vec![0i64; n];
        for (r, &vr) in v.iter().enumerate() {
            if vr != 0 {
                for (o, &x) in out.iter_mut().zip(&self.right[k][r]) {
                    *o += vr * x;
                }
            }
        }
        out
    }

    fn targets(&self, n: i64) -> (Vec<i64>, Vec<Vec<Vec<i64>>>) {
        match self.gens.as_ref().expect("source lattice has generators") {
            Generators::Free => {
                let g = self.g;
                let vals = (0..g).map(|a| n * self.cross.entry(4 * a, 4 * a)[0]).collect();
                let cross = (0..g)
                    .map(|a| {
                        (0..g)
                            .map(|b| self.cross.entry(4 * a, 4 * b).iter().map(|&x| n * x).collect())
                            .collect()
                    })
                    .collect();
                (vals, cross)
            }
            Generators::Ideal { x, .. } => (vec![n * self.form.value(x)], vec![vec![vec![]]]),
        }
    }

    /// Turns search columns (images of the generators) into an embedding,
    /// or `None` if they do not extend to an O-linear map into `dst`.
    fn extend_columns(&self, dst: &ClassLattice, cols: &[Vec<i64>]) -> Option<Embedding> {
        match self.gens.as_ref().expect("source lattice has generators") {
            Generators::Free => {
                let mut image = Vec::with_capacity(self.rank());
                for y in cols {
                    for k in 0..4 {
                        image.push(dst.right_mul_basis(y, k));
                    }
                }
                Some(Embedding { image })
            }
            Generators::Ideal { conj_x_b, nm_x, .. } => {
                let y = dst.ambient_elt(&cols[0]);
                let mut image = Vec::with_capacity(4);
                for u in conj_x_b {
                    let prod = self.order.mul(&y, u);
                    image.push(dst.basis.coords_scaled(&prod, *nm_x)?);
                }
                Some(Embedding { image })
            }
        }
    }

    /// The candidate list for the first searched column of maps of multiplier `n` out of `self` into `dst`.
    fn search_for<'a>(&'a self, dst: &'a ClassLattice, n: i64) -> (MatrixSearch<'a>, i64) {
        let (column_values, cross_values) = self.targets(n);
        let search = MatrixSearch { form: &dst.form, cross: &dst.cross, column_values, cross_values };
        let first = search.column_values[search.first_column()];
        (search, first)
    }
}

/// Visits every O-linear `phi: src -> dst` with `h_dst(phi x, phi y) = n h_src(x, y)`, sequentially.
pub fn for_each_embedding<F>(src: &ClassLattice, dst: &ClassLattice, n: i64, mut visit: F) -> ControlFlow<()>
where
    F: FnMut(&Embedding) -> ControlFlow<()>,
{
    assert_eq!(src.g, dst.g, "genus mismatch");
    let (search, first) = src.search_for(dst, n);
    let seeds = short_vectors(&dst.form, first);
    search.run_from(&seeds.vectors, |cols| match src.extend_columns(dst, cols) {
        Some(e) => visit(&e),
        None => ControlFlow::Continue(()),
    })
}

/// Maps every embedding `src -> dst` of multiplier `n` through `f` in parallel;
/// the result order is deterministic.
pub fn collect_embeddings<T, F>(src: &ClassLattice, dst: &ClassLattice, n: i64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Embedding) -> Option<T> + Sync,
{
    assert_eq!(src.g, dst.g, "genus mismatch");
    let (search, first) = src.search_for(dst, n);
    let seeds = short_vectors(&dst.form, first).vectors;
    let chunk = (seeds.len() / (8 * rayon::current_num_threads()).max(1)).max(1);
    seeds
        .par_chunks(chunk)
        .map(|part| {
            let mut out = Vec::new();
            let _ = search.run_from(part, |cols| {
                if let Some(e) = src.extend_columns(dst, cols) {
                    if let Some(t) = f(e) {
                        out.push(t);
                    }
                }
                ControlFlow::Continue(())
            });
            out
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Number of embeddings `src -> dst` of multiplier `n`.
pub fn count_embeddings(src: &ClassLattice, dst: &ClassLattice, n: i64) -> u64 {
    assert_eq!(src.g, dst.g, "genus mismatch");
    let (search, first) = src.search_for(dst, n);
    let seeds = short_vectors(&dst.form, first).vectors;
    let chunk = (seeds.len() / (8 * rayon::current_num_threads()).max(1)).max(1);
    seeds
        .par_chunks(chunk)
        .map(|part| {
            let mut count = 0u64;
            let _ = search.run_from(part, |cols| {
                if src.extend_columns(dst, cols).is_some() {
                    count += 1;
                }
                ControlFlow::Continue(())
            });
            count
        })
        .sum()
}

/// An isometry `src -> dst` if one exists.
pub fn find_isometry(src: &ClassLattice, dst: &ClassLattice) -> Option<Embedding> {
    if src.g != dst.g || src.form.det2() != dst.form.det2() {
        return None;
    }
    let mut found = None;
    let _ = for_each_embedding(src, dst, 1, |e| {
        found = Some(e.clone());
        ControlFlow::Break(())
    });
    found
}

/// All isometries of a lattice onto itself.
pub fn automorphisms(lat: &ClassLattice) -> Vec<Embedding> {
    collect_embeddings(lat, lat, 1, Some)
}

impl Embedding {
    /// `phi(v)` for `v` in source coordinates.
    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        let m = self.image.first().map_or(0, Vec::len);
        let mut out = vec![0i64; m];
        for (r, &vr) in v.iter().enumerate() {
            if vr != 0 {
                for (o, &x) in out.iter_mut().zip(&self.image[r]) {
                    *o += vr * x;
                }
            }
        }
        out
    }

    /// `self after other`.
    pub fn compose(&self, other: &Embedding) -> Embedding {
        Embedding { image: other.image.iter().map(|v| self.apply(v)).collect() }
    }

    pub fn identity(n: usize) -> Embedding {
        Embedding {
            image: (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect(),
        }
    }
}

/// The matrix `M` over the algebra realizing `phi` on ambient column vectors.
pub fn embedding_matrix(src: &ClassLattice, dst: &ClassLattice, e: &Embedding) -> QuatMatrix {
    let alg = *src.order.algebra();
    if src.is_free() {
        let g = src.g;
        let cols: Vec<Vec<Quaternion>> = (0..g).map(|a| dst.ambient_column(&e.image[4 * a])).collect();
        QuatMatrix::from_fn(g, g, |r, c| cols[c][r].clone())
    } else {
        let y = dst.ambient_column(&e.image[0]);
        let b0 = src.ambient_column(&unit_vec(src.rank(), 0));
        let lambda = alg.mul(&y[0], &alg.inverse(&b0[0]).expect("basis vector is nonzero"));
        QuatMatrix::from_entries(1, 1, vec![lambda])
    }
}

/// The dual `psi = n phi^{-1}: dst -> src` of an embedding of multiplier `n`,
/// computed as `(d_src / d_dst) H_src^{-1} M^dagger H_dst`.
pub fn dual_embedding(src: &ClassLattice, dst: &ClassLattice, e: &Embedding, n: i64) -> Result<Embedding> {
    let alg = *src.order.algebra();
    let m = embedding_matrix(src, dst, e);
    let hsrc_inv = src
        .hermitian
        .inverse(&alg)
        .ok_or_else(|| Error::Consistency("hermitian matrix is singular".into()))?;
    let dual = hsrc_inv
        .mul(&alg, &m.dagger())
        .mul(&alg, &dst.hermitian)
        .scale(&rat(src.scale, dst.scale));
    let check = dual.mul(&alg, &m);
    if check != QuatMatrix::scalar(src.g, &rat(n, 1)) {
        return consistency("dual map is not n times the inverse");
    }
    let mut image = Vec::with_capacity(dst.rank());
    for r in 0..dst.rank() {
        let col = dst.ambient_column(&unit_vec(dst.rank(), r));
        let img: Vec<Quaternion> = (0..src.g)
            .map(|a| {
                let mut s = Quaternion::zero();
                for (c, x) in col.iter().enumerate() {
                    s = &s + &alg.mul(dual.get(a, c), x);
                }
                s
            })
            .collect();
        match src.coords_of_column(&img) {
            Some(c) => image.push(c),
            None => return consistency("dual map is not integral"),
        }
    }
    Ok(Embedding { image })
}

/// Checks `M^dagger H_dst M / d_dst = n H_src / d_src` for the matrix of an embedding.
pub fn verify_embedding(src: &ClassLattice, dst: &ClassLattice, e: &Embedding, n: i64) -> bool {
    let alg = *src.order.algebra();
    let m = embedding_matrix(src, dst, e);
    let lhs = m.dagger().mul(&alg, &dst.hermitian).mul(&alg, &m).scale(&rat(1, dst.scale));
    let rhs = src.hermitian.scale(&rat(n, src.scale));
    lhs == rhs
}

fn first_short(form: &GramForm) -> Vec<i64> {
    let mut bound = 1;
    loop {
        if let Some((_, v)) = vectors_up_to(form, bound).into_iter().next() {
            return v;
        }
        bound *= 2;
    }
}

/// A shortest nonzero vector (the lexicographically largest among the shortest).
pub(crate) fn shortest_vector(form: &GramForm) -> Vec<i64> {
    let min = form.value(&first_short(form));
    short_vectors(form, min).vectors.pop().expect("a shortest vector")
}

pub(crate) fn unit(k: usize) -> OrderElt {
    let mut e = [0i64; 4];
    e[k] = 1;
    e
}

pub(crate) fn unit_vec(n: usize, k: usize) -> Vec<i64> {
    let mut e = vec![0i64; n];
    e[k] = 1;
    e
}

pub(crate) fn to_elt(v: &[i64]) -> OrderElt {
    [v[0], v[1], v[2], v[3]]
}

/// Slotwise right multiplication of an ambient vector by an order element.
pub(crate) fn right_mul(order: &MaximalOrder, v: &[i64], x: &OrderElt) -> Vec<i64> {
    let mut out = Vec::with_capacity(v.len());
    for s in 0..v.len() / 4 {
        out.extend(order.mul(&to_elt(&v[4 * s..4 * s + 4]), x));
    }
    out
}
