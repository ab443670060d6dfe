//! Class sets of unimodular hermitian O-lattices of rank `g`, found by a
//! breadth-first search over Lagrangian `l`-neighbors from `O^g` and
//! certified complete by the mass formula.

use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::form::{haupt_norm, HermitianForm};
use super::lattice::{automorphisms, find_isometry, shortest_vector, to_elt, unit_vec, ClassLattice, Embedding};
use super::matrix::QuatMatrix;
use super::neighbors::{neighbors, NeighborContext};
use crate::arith::{bernoulli, is_prime, rat_int};
use crate::error::{consistency, Error, Result};
use crate::lattice::intlin::{det_big, hnf_rows, is_saturated, solve_affine, HnfBasis};
use crate::lattice::lll::lll_gram_i128;
use crate::lattice::{short_vectors, vectors_up_to, GramForm};
use crate::quat_core::{order_for_prime, MaximalOrder};
use crate::Rational;

/// One class: a representative lattice and its automorphism count.
#[derive(Debug)]
pub struct PolarizedClass {
    lattice: ClassLattice,
    aut_count: u64,
    theta: Vec<u64>,
    autos: OnceLock<Vec<Embedding>>,
}

impl Clone for PolarizedClass {
    fn clone(&self) -> Self {
        PolarizedClass {
            lattice: self.lattice.clone(),
            aut_count: self.aut_count,
            theta: self.theta.clone(),
            autos: self.autos.clone(),
        }
    }
}

impl PolarizedClass {
    pub(crate) fn new(lattice: ClassLattice, aut_count: u64) -> Self {
        let theta = lattice.theta(theta_depth(lattice.genus()));
        PolarizedClass { lattice, aut_count, theta, autos: OnceLock::new() }
    }

    fn with_autos(lattice: ClassLattice, autos: Vec<Embedding>) -> Self {
        let mut c = Self::new(lattice, autos.len() as u64);
        c.autos = OnceLock::from(autos);
        c
    }

    pub fn lattice(&self) -> &ClassLattice {
        &self.lattice
    }

    /// `e = #{U : U^dagger H U = H}`.
    pub fn aut_count(&self) -> u64 {
        self.aut_count
    }

    /// Counts of vectors of norm `1, 2, ..`; part of the canonical ordering key.
    pub fn theta(&self) -> &[u64] {
        &self.theta
    }

    /// The automorphism group, as maps on lattice coordinates.
    pub fn automorphisms(&self) -> &[Embedding] {
        self.autos.get_or_init(|| automorphisms(&self.lattice))
    }

    /// The representative as a hermitian matrix on `O^g` (`g >= 2`, or `g = 1` and principal).
    pub fn hermitian_form(&self) -> Option<HermitianForm> {
        if !self.lattice.is_free() {
            return None;
        }
        HermitianForm::new(self.lattice.order().clone(), self.lattice.hermitian().clone()).ok()
    }
}

/// Ordered class representatives for given `(p, g)`.
#[derive(Clone, Debug)]
pub struct PolarizedClassSet {
    order: Arc<MaximalOrder>,
    g: usize,
    classes: Vec<PolarizedClass>,
}

impl PolarizedClassSet {
    pub(crate) fn from_parts(order: Arc<MaximalOrder>, g: usize, classes: Vec<PolarizedClass>) -> Self {
        PolarizedClassSet { order, g, classes }
    }

    pub fn order(&self) -> &Arc<MaximalOrder> {
        &self.order
    }

    pub fn p(&self) -> u64 {
        self.order.discriminant()
    }

    pub fn g(&self) -> usize {
        self.g
    }

    /// The class number.
    pub fn h(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[PolarizedClass] {
        &self.classes
    }

    pub fn aut_counts(&self) -> Vec<u64> {
        self.classes.iter().map(PolarizedClass::aut_count).collect()
    }

    /// `sum_j 1/e_j`.
    pub fn mass(&self) -> Rational {
        self.classes
            .iter()
            .map(|c| Rational::new(BigInt::from(1), BigInt::from(c.aut_count)))
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// SHA-256 over the Gram matrices and automorphism counts, in order.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("p={} g={};", self.p(), self.g));
        for c in &self.classes {
            hasher.update(format!("{:?} {};", c.lattice.form().gram2(), c.aut_count));
        }
        hex::encode(hasher.finalize())
    }

    /// Index of the class isometric to `lat`.
    pub fn identify(&self, lat: &ClassLattice) -> Option<usize> {
        let theta = lat.theta(theta_depth(self.g));
        identify_among(&self.classes, lat, &theta)
    }
}

/// `prod_{k=1}^{g} |B_{2k}|/(4k) (p^k + (-1)^k)`, the total mass of the genus.
pub fn expected_mass(p: u64, g: usize) -> Rational {
    let mut m = rat_int(1);
    for k in 1..=g {
        let b = bernoulli(2 * k).abs();
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let pk = BigInt::from(p).pow(k as u32) + BigInt::from(sign);
        m = m * b / rat_int(4 * k as i64) * Rational::from_integer(pk);
    }
    m
}

pub(crate) fn theta_depth(g: usize) -> i64 {
    match g {
        1 => 6,
        2 => 4,
        _ => 3,
    }
}

fn identify_among(known: &[PolarizedClass], lat: &ClassLattice, theta: &[u64]) -> Option<usize> {
    known
        .iter()
        .position(|c| c.theta == theta && find_isometry(&c.lattice, lat).is_some())
}

/// Validates `(p, g, l)` for class enumeration.
pub fn check_parameters(p: u64, g: usize, ell: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if g == 0 {
        return Err(Error::InvalidParameter("g must be at least 1".into()));
    }
    if !is_prime(ell) || ell == p {
        return Err(Error::InvalidParameter(format!("auxiliary prime {ell} must be a prime different from p")));
    }
    Ok(())
}

/// The smallest prime different from `p`.
pub fn default_auxiliary_prime(p: u64) -> u64 {
    if p == 2 {
        3
    } else {
        2
    }
}

/// The class set for `(p, g)`, enumerated through `l`-neighbors.
pub fn class_set(p: u64, g: usize, ell: u64) -> Result<PolarizedClassSet> {
    check_parameters(p, g, ell)?;
    let order = Arc::new(order_for_prime(p)?);
    let ctx = NeighborContext::new(&order, ell)?;
    let start = ClassLattice::free(order.clone(), QuatMatrix::identity(g))?;
    let target = expected_mass(p, g);
    let first = PolarizedClass::with_autos(start.clone(), automorphisms(&start));
    let mut found = vec![first];
    let mut mass = found[0].inv_aut();
    let mut frontier = vec![0usize];
    while mass < target && !frontier.is_empty() {
        let known = found.len();
        let snapshot = &found[..known];
        let layer: Vec<Vec<(ClassLattice, Vec<u64>)>> = frontier
            .par_iter()
            .map(|&i| -> Result<_> {
                let mut unknown = Vec::new();
                for nb in neighbors(&ctx, &snapshot[i].lattice)? {
                    let theta = nb.lattice.theta(theta_depth(g));
                    if identify_among(snapshot, &nb.lattice, &theta).is_none() {
                        unknown.push((nb.lattice, theta));
                    }
                }
                Ok(unknown)
            })
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        'layer: for (lat, theta) in layer.into_iter().flatten() {
            if identify_among(&found[known..], &lat, &theta).is_some() {
                continue;
            }
            let rep = normalize(&lat)?;
            let autos = automorphisms(&rep);
            let class = PolarizedClass::with_autos(rep, autos);
            mass += class.inv_aut();
            found.push(class);
            next.push(found.len() - 1);
            if mass >= target {
                break 'layer;
            }
        }
        frontier = next;
    }
    if mass != target {
        return Err(Error::MassMismatch { found: mass.to_string(), expected: target.to_string() });
    }
    let mut indexed: Vec<(usize, PolarizedClass)> = found.into_iter().enumerate().collect();
    indexed.sort_by(|(i, a), (j, b)| (a.aut_count, &a.theta, i).cmp(&(b.aut_count, &b.theta, j)));
    let classes = indexed.into_iter().map(|(_, c)| c).collect();
    Ok(PolarizedClassSet { order, g, classes })
}

impl PolarizedClass {
    fn inv_aut(&self) -> Rational {
        Rational::new(BigInt::from(1), BigInt::from(self.aut_count))
    }
}

/// A representative of the class of `lat` in standard shape: `O^g` with a
/// hermitian matrix for `g >= 2`, an integral right ideal of small norm for `g = 1`.
pub fn normalize(lat: &ClassLattice) -> Result<ClassLattice> {
    let order = lat.order().clone();
    if lat.genus() == 1 {
        let x = shortest_vector(lat.form());
        let cx = order.conj(&to_elt(&lat.ambient(&x)));
        let d = lat.scale();
        let mut gens = Vec::with_capacity(4);
        for b in lat.basis().rows() {
            let prod = order.mul(&cx, &to_elt(b));
            if prod.iter().any(|c| c % d != 0) {
                return consistency("normalized ideal is not integral");
            }
            gens.push(prod.iter().map(|c| c / d).collect::<Vec<i64>>());
        }
        let basis = HnfBasis::from_generators(&gens, 4)
            .ok_or_else(|| Error::Consistency("normalized ideal is degenerate".into()))?;
        let norm = lat.form().value(&x);
        let out = ClassLattice::ideal(order, basis, norm)?;
        if out.basis().index() != (norm as i128) * (norm as i128) {
            return consistency("normalized ideal has the wrong index");
        }
        return Ok(out);
    }
    let fs = free_basis(lat)?;
    let g = lat.genus();
    let h = QuatMatrix::from_fn(g, g, |r, c| order.to_quaternion(&lat.h(&fs[r], &fs[c])));
    let alg = *order.algebra();
    if haupt_norm(&alg, &h)? != rat_int(1) {
        return consistency("normalized hermitian matrix does not have Haupt norm 1");
    }
    ClassLattice::free(order, h)
}

/// An O-basis of a free lattice: a short vector `v` spanning a direct summand
/// `vO`, followed by lifts of an O-basis of the projection to `v^perp`.
fn free_basis(lat: &ClassLattice) -> Result<Vec<Vec<i64>>> {
    let n = lat.rank();
    let rows: Vec<Vec<i64>> = (0..n).map(|k| unit_vec(n, k)).collect();
    summand_basis(lat, rows, lat.genus())
        .ok_or_else(|| Error::Consistency("no O-basis found among short vectors".into()))
}

fn sub_form(lat: &ClassLattice, rows: &[Vec<i64>]) -> Option<GramForm> {
    let g2 = rows.iter().map(|x| rows.iter().map(|y| lat.form().polar(x, y)).collect()).collect();
    GramForm::from_gram2(g2).ok()
}

fn combine(rows: &[Vec<i64>], z: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; rows[0].len()];
    for (r, &c) in rows.iter().zip(z) {
        if c != 0 {
            out.iter_mut().zip(r).for_each(|(o, &x)| *o += c * x);
        }
    }
    out
}

/// Coordinates of `v` in the Z-span of `rows`.
fn solve_in(rows: &[Vec<i64>], v: &[i64]) -> Option<Vec<i64>> {
    let a: Vec<Vec<i128>> = (0..v.len()).map(|t| rows.iter().map(|r| r[t] as i128).collect()).collect();
    let rhs: Vec<i128> = v.iter().map(|&x| x as i128).collect();
    let (z, _) = solve_affine(&a, &rhs, rows.len())?;
    z.into_iter().map(|x| i64::try_from(x).ok()).collect()
}

fn reduced_rows(lat: &ClassLattice, gens: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = lat.rank();
    let g128: Vec<Vec<i128>> = gens.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let hnf: Vec<Vec<i64>> = hnf_rows(&g128, n)
        .into_iter()
        .map(|r| r.into_iter().map(|x| i64::try_from(x).expect("basis entry overflow")).collect())
        .collect();
    let gram: Vec<Vec<i128>> =
        hnf.iter().map(|x| hnf.iter().map(|y| lat.form().polar(x, y) as i128).collect()).collect();
    let (t, _) = lll_gram_i128(&gram);
    t.iter()
        .map(|c| combine(&hnf, &c.iter().map(|&x| x as i64).collect::<Vec<_>>()))
        .collect()
}

/// An O-basis of the O-submodule with Z-basis `rows` (of O-rank `k`), if one is found.
fn summand_basis(lat: &ClassLattice, rows: Vec<Vec<i64>>, k: usize) -> Option<Vec<Vec<i64>>> {
    let form = sub_form(lat, &rows)?;
    if k == 1 {
        let ng = lat.order().norm_gram2();
        let det_o = det_big(&ng.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
        let det = form.det2();
        if !(&det % &det_o).is_zero() {
            return None;
        }
        let ratio = det / det_o;
        let m = ratio.nth_root(4);
        if m.pow(4) != ratio {
            return None;
        }
        let m = m.to_i64()?;
        let y = short_vectors(&form, m).vectors.pop()?;
        return Some(vec![combine(&rows, &y)]);
    }
    let r = rows.len();
    let (mut tried, mut bound) = (0, 2);
    loop {
        for (q1, v) in vectors_up_to(&form, bound) {
            if q1 <= tried {
                continue;
            }
            let w = combine(&rows, &v);
            let wo: Vec<Vec<i64>> = (0..4).map(|t| lat.right_mul_basis(&w, t)).collect();
            let coords: Option<Vec<Vec<i128>>> = wo
                .iter()
                .map(|x| solve_in(&rows, x).map(|z| z.into_iter().map(i128::from).collect()))
                .collect();
            if !coords.is_some_and(|c| is_saturated(&c, r)) {
                continue;
            }
            let proj = |x: &[i64]| -> Vec<i64> {
                let a = lat.h(&w, x);
                let mut out: Vec<i64> = x.iter().map(|&c| q1 * c).collect();
                for (t, &at) in a.iter().enumerate() {
                    if at != 0 {
                        out.iter_mut().zip(&wo[t]).for_each(|(o, &y)| *o -= at * y);
                    }
                }
                out
            };
            let images: Vec<Vec<i64>> = rows.iter().map(|x| proj(x)).collect();
            let rest = reduced_rows(lat, &images);
            let Some(sub) = summand_basis(lat, rest, k - 1) else { continue };
            let mut out = vec![w.clone()];
            for y in sub {
                let Some(c) = solve_in(&images, &y) else { return None };
                let mut u = combine(&rows, &c);
                let a = lat.h(&w, &u);
                for (t, &at) in a.iter().enumerate() {
                    let s = (at as f64 / q1 as f64).round() as i64;
                    if s != 0 {
                        u.iter_mut().zip(&wo[t]).for_each(|(o, &y)| *o -= s * y);
                    }
                }
                out.push(u);
            }
            return Some(out);
        }
        if bound > 64 {
            return None;
        }
        tried = bound;
        bound *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn mass_values() {
        assert_eq!(expected_mass(5, 1), rat(4, 24));
        assert_eq!(expected_mass(5, 2), rat(13, 720));
        assert_eq!(expected_mass(2, 1), rat(1, 24));
        assert_eq!(expected_mass(5, 3), rat(4 * 26 * 124, 2903040));
    }
}
