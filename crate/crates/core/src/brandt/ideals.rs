//! Right ideals of a maximal order and the classical `g = 1` Brandt matrices
//! `B(n)_ij = #{lambda in I_i I_j^-1 : Nm(lambda) = n Nm(I_i) / Nm(I_j)} / e_j`,
//! computed without the hermitian-lattice machinery.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use sha2::{Digest, Sha256};

use super::BrandtMatrix;
use crate::arith::rat;
use crate::error::{consistency, Error, Result};
use crate::hermitian::classes::{default_auxiliary_prime, expected_mass};
use crate::hermitian::{ClassLattice, PolarizedClassSet};
use crate::lattice::intlin::HnfBasis;
use crate::lattice::{short_vectors, theta_prefix, GramForm};
use crate::quat_core::{order_for_prime, MaximalOrder, OrderElt, Quaternion};
use crate::Rational;

/// An integral right ideal `I` of `O`, stored by a Hermite basis in order coordinates.
#[derive(Clone, Debug)]
pub struct RightIdeal {
    order: Arc<MaximalOrder>,
    coords: HnfBasis,
    norm: i64,
}

impl PartialEq for RightIdeal {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords
    }
}

impl RightIdeal {
    /// The right ideal `sum x O` generated by `gens`.
    pub fn generated_by(order: Arc<MaximalOrder>, gens: &[OrderElt]) -> Result<Self> {
        let mut all = Vec::with_capacity(4 * gens.len());
        for x in gens {
            for k in 0..4 {
                let mut o = [0i64; 4];
                o[k] = 1;
                all.push(order.mul(x, &o).to_vec());
            }
        }
        let coords =
            HnfBasis::from_generators(&all, 4).ok_or_else(|| Error::InvalidParameter("ideal is degenerate".into()))?;
        let index = coords.index();
        let norm = (index as f64).sqrt().round() as i64;
        if (norm as i128) * (norm as i128) != index {
            return consistency(format!("ideal index {index} is not a square"));
        }
        let ideal = RightIdeal { order, coords, norm };
        if !ideal.is_right_ideal() {
            return consistency("lattice is not closed under right multiplication");
        }
        Ok(ideal)
    }

    pub fn unit(order: Arc<MaximalOrder>) -> Self {
        RightIdeal { order, coords: HnfBasis::identity(4), norm: 1 }
    }

    fn is_right_ideal(&self) -> bool {
        self.coords.rows().iter().all(|b| {
            (0..4).all(|k| {
                let mut o = [0i64; 4];
                o[k] = 1;
                self.coords.contains(&self.order.mul(&elt(b), &o))
            })
        })
    }

    pub fn order(&self) -> &Arc<MaximalOrder> {
        &self.order
    }

    /// A Z-basis as quaternions.
    pub fn basis(&self) -> [Quaternion; 4] {
        let r = self.coords.rows();
        std::array::from_fn(|k| self.order.to_quaternion(&elt(&r[k])))
    }

    /// Z-basis in order coordinates.
    pub fn basis_coords(&self) -> &[Vec<i64>] {
        self.coords.rows()
    }

    /// The positive rational generating the norm ideal.
    pub fn norm(&self) -> Rational {
        rat(self.norm, 1)
    }

    pub fn norm_int(&self) -> i64 {
        self.norm
    }

    /// The Z-lattice `I conj(J)` with the reduced norm form.
    fn product_form(&self, other: &RightIdeal) -> Result<(Vec<Vec<i64>>, GramForm)> {
        let mut gens = Vec::with_capacity(16);
        for a in self.coords.rows() {
            for b in other.coords.rows() {
                gens.push(self.order.mul(&elt(a), &self.order.conj(&elt(b))).to_vec());
            }
        }
        let basis = HnfBasis::from_generators(&gens, 4)
            .ok_or_else(|| Error::Consistency("ideal product is degenerate".into()))?;
        let rows = basis.rows().to_vec();
        let gram: Vec<Vec<i64>> = rows
            .iter()
            .map(|x| rows.iter().map(|y| self.order.trd(&self.order.mul(&elt(x), &self.order.conj(&elt(y))))).collect())
            .collect();
        Ok((rows, GramForm::from_gram2(gram)?))
    }

    /// Number of `mu in I conj(J)` with `Nm(mu) = n Nm(I) Nm(J)`.
    pub fn count_elements(&self, other: &RightIdeal, n: u64) -> Result<u64> {
        let (_, form) = self.product_form(other)?;
        let target = n as i64 * self.norm * other.norm;
        Ok(short_vectors(&form, target).len() as u64)
    }

    /// Whether `I = lambda J` for some `lambda`, with the witness checked exactly.
    pub fn is_isomorphic(&self, other: &RightIdeal) -> Result<bool> {
        let (rows, form) = self.product_form(other)?;
        let target = self.norm * other.norm;
        let Some(mu) = short_vectors(&form, target).vectors.first().cloned() else {
            return Ok(false);
        };
        let mut m = [0i64; 4];
        for (c, r) in mu.iter().zip(&rows) {
            for k in 0..4 {
                m[k] += c * r[k];
            }
        }
        // lambda = mu / Nm(J); check lambda J = I
        let mut image = Vec::with_capacity(4);
        for b in other.coords.rows() {
            let prod = self.order.mul(&m, &elt(b));
            if prod.iter().any(|x| x % other.norm != 0) {
                return consistency("ideal isomorphism witness is not integral");
            }
            image.push(prod.iter().map(|x| x / other.norm).collect::<Vec<i64>>());
        }
        match HnfBasis::from_generators(&image, 4) {
            Some(b) if b == self.coords => Ok(true),
            _ => consistency("ideal isomorphism witness does not map J onto I"),
        }
    }

    /// `#O_l(I)^x`, the number of `lambda` with `lambda I = I`.
    pub fn unit_count(&self) -> Result<u64> {
        self.count_elements(self, 1)
    }

    fn theta(&self, depth: i64) -> Result<Vec<u64>> {
        let rows = self.coords.rows();
        let n = self.norm;
        let mut gram = Vec::with_capacity(4);
        for x in rows {
            let mut r = Vec::with_capacity(4);
            for y in rows {
                let t = self.order.trd(&self.order.mul(&elt(x), &self.order.conj(&elt(y))));
                if t % n != 0 {
                    return consistency("scaled norm form on an ideal is not integral");
                }
                r.push(t / n);
            }
            gram.push(r);
        }
        Ok(theta_prefix(&GramForm::from_gram2(gram)?, depth))
    }

    /// The `l + 1` sub-ideals `J < I` with `Nm(J) = l Nm(I)`.
    pub fn neighbors(&self, ell: u64) -> Result<Vec<RightIdeal>> {
        let l = ell as i64;
        let rows = self.coords.rows();
        let mut out: Vec<RightIdeal> = Vec::new();
        let ell_i: Vec<OrderElt> = rows.iter().map(|r| [l * r[0], l * r[1], l * r[2], l * r[3]]).collect();
        for idx in 1..l.pow(4) {
            let mut c = [0i64; 4];
            let mut rem = idx;
            for ck in c.iter_mut() {
                *ck = rem % l;
                rem /= l;
            }
            let mut x = [0i64; 4];
            for (ck, r) in c.iter().zip(rows) {
                for k in 0..4 {
                    x[k] += ck * r[k];
                }
            }
            let nx = self.order.nrd(&x);
            if nx % self.norm != 0 || (nx / self.norm) % l != 0 {
                continue;
            }
            let mut gens = ell_i.clone();
            gens.push(x);
            let j = RightIdeal::generated_by(self.order.clone(), &gens)?;
            if j.norm != self.norm * l || out.contains(&j) {
                continue;
            }
            out.push(j);
        }
        if out.len() as u64 != ell + 1 {
            return consistency(format!("found {} sub-ideals of index {ell}^2 instead of {}", out.len(), ell + 1));
        }
        Ok(out)
    }
}

fn elt(v: &[i64]) -> OrderElt {
    [v[0], v[1], v[2], v[3]]
}

const IDEAL_THETA_DEPTH: i64 = 6;

/// Right ideal class representatives with their unit counts.
#[derive(Clone, Debug)]
pub struct IdealClassSet {
    pub p: u64,
    pub ideals: Vec<RightIdeal>,
    pub e: Vec<u64>,
}

impl IdealClassSet {
    pub fn h(&self) -> usize {
        self.ideals.len()
    }

    pub fn mass(&self) -> Rational {
        self.e
            .iter()
            .map(|&x| Rational::new(BigInt::from(1), BigInt::from(x)))
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// For each ideal, the index of the corresponding class of a `g = 1` hermitian class set.
    pub fn correspondence(&self, set: &PolarizedClassSet) -> Result<Vec<usize>> {
        if set.g() != 1 || set.p() != self.p {
            return Err(Error::InvalidParameter("class set must be the g = 1 set for the same p".into()));
        }
        let mut map = Vec::with_capacity(self.h());
        for i in &self.ideals {
            let lat = ClassLattice::ideal(set.order().clone(), i.coords.clone(), i.norm)?;
            let k = set.identify(&lat).ok_or_else(|| Error::Consistency("ideal matches no hermitian class".into()))?;
            if map.contains(&k) {
                return consistency("two ideal classes match the same hermitian class");
            }
            map.push(k);
        }
        Ok(map)
    }
}

/// Right ideal classes of the maximal order of discriminant `p`, by `l`-neighbor search from `O`.
pub fn ideal_classes(p: u64, ell: u64) -> Result<IdealClassSet> {
    let order = Arc::new(order_for_prime(p)?);
    let start = RightIdeal::unit(order);
    let mut ideals = vec![start.clone()];
    let mut thetas = vec![start.theta(IDEAL_THETA_DEPTH)?];
    let mut next = 0;
    while next < ideals.len() {
        let current = ideals[next].clone();
        next += 1;
        for j in current.neighbors(ell)? {
            let th = j.theta(IDEAL_THETA_DEPTH)?;
            let mut known = false;
            for (k, i) in ideals.iter().enumerate() {
                if thetas[k] == th && i.is_isomorphic(&j)? {
                    known = true;
                    break;
                }
            }
            if !known {
                ideals.push(j);
                thetas.push(th);
            }
        }
    }
    let e = ideals.iter().map(RightIdeal::unit_count).collect::<Result<Vec<_>>>()?;
    let set = IdealClassSet { p, ideals, e };
    if set.mass() != expected_mass(p, 1) {
        return Err(Error::MassMismatch { found: set.mass().to_string(), expected: expected_mass(p, 1).to_string() });
    }
    Ok(set)
}

/// `B(n)` for `g = 1` from right ideal classes (in ideal-class discovery order).
pub fn brandt_g1_classical(p: u64, n: u64) -> Result<BrandtMatrix> {
    let set = ideal_classes(p, default_auxiliary_prime(p))?;
    brandt_for_ideals(&set, n)
}

/// `B(n)` for a given list of ideal classes.
pub fn brandt_for_ideals(set: &IdealClassSet, n: u64) -> Result<BrandtMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let h = set.h();
    let mut entries = Vec::with_capacity(h);
    for i in 0..h {
        let mut row = Vec::with_capacity(h);
        for j in 0..h {
            let c = set.ideals[i].count_elements(&set.ideals[j], n)?;
            if c % set.e[j] != 0 {
                return consistency(format!("classical B({n}) entry ({i}, {j}) is not integral"));
            }
            row.push(rat((c / set.e[j]) as i64, 1));
        }
        entries.push(row);
    }
    let mut hasher = Sha256::new();
    for i in &set.ideals {
        hasher.update(format!("{:?};", i.coords.rows()));
    }
    Ok(BrandtMatrix {
        p: set.p,
        g: 1,
        n,
        entries,
        e: set.e.clone(),
        fingerprint: hex::encode(hasher.finalize()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_classes_small_primes() {
        for (p, h) in [(2, 1), (3, 1), (5, 1), (7, 1), (11, 2), (13, 1), (17, 2), (23, 3)] {
            let set = ideal_classes(p, default_auxiliary_prime(p)).unwrap();
            assert_eq!(set.h(), h, "p = {p}");
        }
    }

    #[test]
    fn unit_ideal_units() {
        let order = Arc::new(order_for_prime(5).unwrap());
        assert_eq!(RightIdeal::unit(order).unit_count().unwrap(), 6);
    }
}
