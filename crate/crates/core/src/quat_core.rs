//! Definite rational quaternion algebras ramified at a single prime, and an
//! explicit maximal order in each, with integral multiplication tables.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{hilbert_symbol, hilbert_symbol_real, is_prime, legendre, prime_divisors, rat, rat_int};
use crate::error::{Error, Result};
use crate::lattice::intlin::{det_i128, hnf_rows};
use crate::Rational;

/// Formats a rational as `"num/den"`.
pub fn rational_to_string(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `"num/den"` or `"num"`.
pub fn rational_from_str(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidParameter(format!("malformed rational {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

/// An element `x0 + x1 i + x2 j + x3 ij` of a quaternion algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quaternion(pub [Rational; 4]);

impl Quaternion {
    pub fn new(c: [Rational; 4]) -> Self {
        Quaternion(c)
    }

    pub fn from_ints(c: [i64; 4]) -> Self {
        Quaternion(c.map(rat_int))
    }

    pub fn zero() -> Self {
        Self::from_ints([0; 4])
    }

    pub fn one() -> Self {
        Self::from_ints([1, 0, 0, 0])
    }

    pub fn scalar(r: Rational) -> Self {
        Quaternion([r, Rational::zero(), Rational::zero(), Rational::zero()])
    }

    pub fn coeffs(&self) -> &[Rational; 4] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn conj(&self) -> Self {
        let [x0, x1, x2, x3] = &self.0;
        Quaternion([x0.clone(), -x1, -x2, -x3])
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Quaternion(self.0.clone().map(|x| x * r))
    }

    /// Reduced trace `x + conj(x)`.
    pub fn trace(&self) -> Rational {
        &self.0[0] * rat_int(2)
    }

    /// The scalar value if the element is rational.
    pub fn as_scalar(&self) -> Option<&Rational> {
        self.0[1..].iter().all(Zero::is_zero).then_some(&self.0[0])
    }

    pub fn to_strings(&self) -> [String; 4] {
        self.0.clone().map(|x| rational_to_string(&x))
    }

    pub fn from_strings(s: &[String]) -> Result<Self> {
        if s.len() != 4 {
            return Err(Error::InvalidParameter("quaternion needs 4 coordinates".into()));
        }
        Ok(Quaternion([
            rational_from_str(&s[0])?,
            rational_from_str(&s[1])?,
            rational_from_str(&s[2])?,
            rational_from_str(&s[3])?,
        ]))
    }
}

impl Add for &Quaternion {
    type Output = Quaternion;
    fn add(self, o: &Quaternion) -> Quaternion {
        Quaternion(std::array::from_fn(|k| &self.0[k] + &o.0[k]))
    }
}

impl Sub for &Quaternion {
    type Output = Quaternion;
    fn sub(self, o: &Quaternion) -> Quaternion {
        Quaternion(std::array::from_fn(|k| &self.0[k] - &o.0[k]))
    }
}

impl Neg for &Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion(std::array::from_fn(|k| -&self.0[k]))
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x0, x1, x2, x3] = &self.0;
        write!(f, "{x0} + {x1}*i + {x2}*j + {x3}*k")
    }
}

/// The algebra `(a, b)_Q` with `i^2 = a`, `j^2 = b`, `ij = -ji`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuaternionAlgebra {
    a: i64,
    b: i64,
    p: u64,
}

impl QuaternionAlgebra {
    /// Builds `(a, b)_Q` and checks that it is definite and ramified exactly at `p` and infinity.
    pub fn new(a: i64, b: i64, p: u64) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidParameter("a and b must be nonzero".into()));
        }
        let alg = QuaternionAlgebra { a, b, p };
        let ram = alg.ramified_primes();
        if !alg.is_definite() || ram != vec![p] {
            return Err(Error::Certification(format!(
                "({a},{b}) is ramified at {ram:?} (definite: {})",
                alg.is_definite()
            )));
        }
        Ok(alg)
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    /// The discriminant (the single ramified finite prime).
    pub fn discriminant(&self) -> u64 {
        self.p
    }

    pub fn is_definite(&self) -> bool {
        hilbert_symbol_real(self.a, self.b) == -1
    }

    /// Finite primes at which the Hilbert symbol `(a, b)_q` is `-1`.
    pub fn ramified_primes(&self) -> Vec<u64> {
        let mut cands = prime_divisors(2 * self.a * self.b);
        cands.extend(prime_divisors(self.p as i64));
        cands.sort_unstable();
        cands.dedup();
        cands
            .into_iter()
            .filter(|&q| hilbert_symbol(self.a, self.b, q) == -1)
            .collect()
    }

    pub fn mul(&self, x: &Quaternion, y: &Quaternion) -> Quaternion {
        let a = rat_int(self.a);
        let b = rat_int(self.b);
        let ab = &a * &b;
        let [x0, x1, x2, x3] = &x.0;
        let [y0, y1, y2, y3] = &y.0;
        let z0 = x0 * y0 + &a * x1 * y1 + &b * x2 * y2 - &ab * x3 * y3;
        let z1 = x0 * y1 + x1 * y0 - &b * x2 * y3 + &b * x3 * y2;
        let z2 = x0 * y2 + x2 * y0 + &a * x1 * y3 - &a * x3 * y1;
        let z3 = x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1;
        Quaternion([z0, z1, z2, z3])
    }

    /// Reduced norm `x conj(x)`.
    pub fn norm(&self, x: &Quaternion) -> Rational {
        let [x0, x1, x2, x3] = &x.0;
        let a = rat_int(self.a);
        let b = rat_int(self.b);
        x0 * x0 - &a * x1 * x1 - &b * x2 * x2 + &a * &b * x3 * x3
    }

    pub fn inverse(&self, x: &Quaternion) -> Option<Quaternion> {
        let n = self.norm(x);
        if n.is_zero() {
            return None;
        }
        Some(x.conj().scale(&n.recip()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "a": rational_to_string(&rat_int(self.a)),
            "b": rational_to_string(&rat_int(self.b)),
            "p": self.p,
        })
    }
}

/// Reduced norm in the given algebra.
pub fn reduced_norm(alg: &QuaternionAlgebra, x: &Quaternion) -> Rational {
    alg.norm(x)
}

/// Smallest prime `q = 3 mod 4` with `(p/q) = -1`, and `c` with `q | c^2 p + 1`.
fn auxiliary_prime(p: u64) -> (u64, i64) {
    let mut q = 3u64;
    loop {
        if is_prime(q) && q % 4 == 3 && legendre(p as i64, q as i64) == -1 {
            let c = (0..q as i64)
                .find(|c| (c * c * p as i64 + 1) % q as i64 == 0)
                .expect("-1/p is a square mod q");
            return (q, c);
        }
        q += 4;
    }
}

/// The algebra ramified exactly at `p` and infinity, from a fixed table by residue of `p`.
pub fn algebra_for_prime(p: u64) -> Result<QuaternionAlgebra> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let p64 = p as i64;
    let (a, b) = if p == 2 {
        (-1, -1)
    } else if p % 4 == 3 {
        (-1, -p64)
    } else if p % 8 == 5 {
        (-2, -p64)
    } else {
        let (q, _) = auxiliary_prime(p);
        (-p64, -(q as i64))
    };
    QuaternionAlgebra::new(a, b, p)
}

/// Integral coordinates of an element with respect to a maximal order basis.
pub type OrderElt = [i64; 4];

/// A maximal order with an integral basis `o_0 = 1, o_1, o_2, o_3`.
#[derive(Clone, Debug)]
pub struct MaximalOrder {
    alg: QuaternionAlgebra,
    basis: [Quaternion; 4],
    // to_std[k] = standard coordinates of o_k; from_std inverts it
    from_std: [[Rational; 4]; 4],
    mult: [[[i64; 4]; 4]; 4],
    conj: [[i64; 4]; 4],
    trace: [i64; 4],
    norm_gram2: [[i64; 4]; 4],
}

impl MaximalOrder {
    pub fn algebra(&self) -> &QuaternionAlgebra {
        &self.alg
    }

    pub fn basis(&self) -> &[Quaternion; 4] {
        &self.basis
    }

    pub fn discriminant(&self) -> u64 {
        self.alg.p
    }

    /// Structure constants: `o_a o_b = sum_c mult[a][b][c] o_c`.
    pub fn mult_table(&self) -> &[[[i64; 4]; 4]; 4] {
        &self.mult
    }

    /// `Trd(o_a conj(o_b))`, the doubled Gram matrix of the norm form.
    pub fn norm_gram2(&self) -> &[[i64; 4]; 4] {
        &self.norm_gram2
    }

    /// Determinant of the trace form; equals `p^2` exactly when the order is maximal.
    pub fn reduced_discriminant_check(&self) -> i128 {
        let m: Vec<Vec<i64>> = self.norm_gram2.iter().map(|r| r.to_vec()).collect();
        det_i128(&m)
    }

    pub fn one(&self) -> OrderElt {
        [1, 0, 0, 0]
    }

    #[inline]
    pub fn mul(&self, x: &OrderElt, y: &OrderElt) -> OrderElt {
        let mut z = [0i64; 4];
        for a in 0..4 {
            if x[a] == 0 {
                continue;
            }
            for b in 0..4 {
                if y[b] == 0 {
                    continue;
                }
                let f = x[a] * y[b];
                let t = &self.mult[a][b];
                for c in 0..4 {
                    z[c] += f * t[c];
                }
            }
        }
        z
    }

    #[inline]
    pub fn conj(&self, x: &OrderElt) -> OrderElt {
        let mut z = [0i64; 4];
        for a in 0..4 {
            if x[a] != 0 {
                for c in 0..4 {
                    z[c] += x[a] * self.conj[a][c];
                }
            }
        }
        z
    }

    pub fn trd(&self, x: &OrderElt) -> i64 {
        (0..4).map(|a| x[a] * self.trace[a]).sum()
    }

    pub fn nrd(&self, x: &OrderElt) -> i64 {
        let mut s = 0i64;
        for a in 0..4 {
            for b in 0..4 {
                s += x[a] * self.norm_gram2[a][b] * x[b];
            }
        }
        s / 2
    }

    pub fn to_quaternion(&self, x: &OrderElt) -> Quaternion {
        let mut out = Quaternion::zero();
        for k in 0..4 {
            if x[k] != 0 {
                out = &out + &self.basis[k].scale(&rat_int(x[k]));
            }
        }
        out
    }

    /// Rational coordinates of `q` in the order basis.
    pub fn rational_coords(&self, q: &Quaternion) -> [Rational; 4] {
        std::array::from_fn(|c| {
            let mut s = Rational::zero();
            for k in 0..4 {
                s += &q.0[k] * &self.from_std[k][c];
            }
            s
        })
    }

    /// Coordinates of `q` if it lies in the order.
    pub fn coords(&self, q: &Quaternion) -> Option<OrderElt> {
        let r = self.rational_coords(q);
        let mut out = [0i64; 4];
        for k in 0..4 {
            if !r[k].is_integer() {
                return None;
            }
            out[k] = r[k].to_integer().to_i64()?;
        }
        Some(out)
    }

    pub fn contains(&self, q: &Quaternion) -> bool {
        self.coords(q).is_some()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let basis: Vec<[String; 4]> = self.basis.iter().map(Quaternion::to_strings).collect();
        serde_json::json!({
            "a": rational_to_string(&rat_int(self.alg.a)),
            "b": rational_to_string(&rat_int(self.alg.b)),
            "p": self.alg.p,
            "basis": basis,
        })
    }

    /// Rebuilds and recertifies an order from [`MaximalOrder::to_json`] output.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize, Serialize)]
        struct Raw {
            a: String,
            b: String,
            p: u64,
            basis: Vec<Vec<String>>,
        }
        let raw: Raw = serde_json::from_value(v.clone())?;
        let int = |s: &str| -> Result<i64> {
            let r = rational_from_str(s)?;
            if !r.is_integer() {
                return Err(Error::InvalidParameter("a and b must be integers".into()));
            }
            r.to_integer()
                .to_i64()
                .ok_or_else(|| Error::InvalidParameter("a or b out of range".into()))
        };
        let alg = QuaternionAlgebra::new(int(&raw.a)?, int(&raw.b)?, raw.p)?;
        if raw.basis.len() != 4 {
            return Err(Error::InvalidParameter("order basis needs 4 elements".into()));
        }
        let gens: Vec<Quaternion> = raw
            .basis
            .iter()
            .map(|s| Quaternion::from_strings(s))
            .collect::<Result<_>>()?;
        order_from_generators(alg, &gens)
    }
}

impl PartialEq for MaximalOrder {
    fn eq(&self, other: &Self) -> bool {
        self.alg == other.alg && self.basis == other.basis
    }
}

/// Builds the order spanned by `gens` (put in Hermite normal form) and certifies maximality.
fn order_from_generators(alg: QuaternionAlgebra, gens: &[Quaternion]) -> Result<MaximalOrder> {
    let den = gens
        .iter()
        .flat_map(|q| q.0.iter())
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let den_r = Rational::from_integer(den.clone());
    let scaled: Vec<Vec<i128>> = gens
        .iter()
        .map(|q| {
            q.0.iter()
                .map(|x| (x * &den_r).to_integer().to_i128().expect("small generator"))
                .collect()
        })
        .collect();
    let rows = hnf_rows(&scaled, 4);
    if rows.len() != 4 {
        return Err(Error::Certification("generators do not span a lattice of rank 4".into()));
    }
    let basis: [Quaternion; 4] = std::array::from_fn(|k| {
        Quaternion(std::array::from_fn(|c| {
            Rational::new(BigInt::from(rows[k][c]), den.clone())
        }))
    });
    if basis[0] != Quaternion::one() {
        return Err(Error::Certification("1 is not the first basis element".into()));
    }
    let from_std = invert4(&basis);
    let mut order = MaximalOrder {
        alg,
        basis,
        from_std,
        mult: [[[0; 4]; 4]; 4],
        conj: [[0; 4]; 4],
        trace: [0; 4],
        norm_gram2: [[0; 4]; 4],
    };
    let not_closed = || Error::Certification("basis is not closed under multiplication".into());
    for a in 0..4 {
        for b in 0..4 {
            let prod = alg.mul(&order.basis[a], &order.basis[b]);
            order.mult[a][b] = order.coords(&prod).ok_or_else(not_closed)?;
        }
        order.conj[a] = order.coords(&order.basis[a].conj()).ok_or_else(not_closed)?;
        let t = order.basis[a].trace();
        if !t.is_integer() {
            return Err(not_closed());
        }
        order.trace[a] = t.to_integer().to_i64().ok_or_else(not_closed)?;
    }
    for a in 0..4 {
        for b in 0..4 {
            let x = alg.mul(&order.basis[a], &order.basis[b].conj()).trace();
            if !x.is_integer() {
                return Err(not_closed());
            }
            order.norm_gram2[a][b] = x.to_integer().to_i64().ok_or_else(not_closed)?;
        }
    }
    let p = alg.p as i128;
    let disc = order.reduced_discriminant_check();
    if disc != p * p {
        return Err(Error::Certification(format!(
            "trace form determinant {disc} != p^2 = {}",
            p * p
        )));
    }
    Ok(order)
}

fn invert4(basis: &[Quaternion; 4]) -> [[Rational; 4]; 4] {
    // rows of `m` are basis elements; solve m^{-1} by Gauss-Jordan
    let mut m: Vec<Vec<Rational>> = basis.iter().map(|q| q.0.to_vec()).collect();
    let mut inv: Vec<Vec<Rational>> = (0..4)
        .map(|i| (0..4).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    for c in 0..4 {
        let p = (c..4).find(|&r| !m[r][c].is_zero()).expect("basis is invertible");
        m.swap(p, c);
        inv.swap(p, c);
        let piv = m[c][c].recip();
        for j in 0..4 {
            m[c][j] *= &piv;
            inv[c][j] *= &piv;
        }
        for r in 0..4 {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for j in 0..4 {
                    let a = &f * &m[c][j];
                    m[r][j] -= a;
                    let b = &f * &inv[c][j];
                    inv[r][j] -= b;
                }
            }
        }
    }
    // x = sum_k c_k o_k = c M  =>  c = x M^{-1}
    std::array::from_fn(|k| std::array::from_fn(|c| inv[k][c].clone()))
}

/// An explicit maximal order of `alg`, which must come from [`algebra_for_prime`].
pub fn maximal_order(alg: &QuaternionAlgebra) -> Result<MaximalOrder> {
    let p = alg.p;
    let p64 = p as i64;
    let q = |c: [(i64, i64); 4]| Quaternion(c.map(|(n, d)| rat(n, d)));
    let gens = if p == 2 && (alg.a, alg.b) == (-1, -1) {
        vec![
            q([(1, 2), (1, 2), (1, 2), (1, 2)]),
            q([(0, 1), (1, 1), (0, 1), (0, 1)]),
            q([(0, 1), (0, 1), (1, 1), (0, 1)]),
            q([(0, 1), (0, 1), (0, 1), (1, 1)]),
        ]
    } else if p % 4 == 3 && (alg.a, alg.b) == (-1, -p64) {
        vec![
            q([(1, 2), (0, 1), (1, 2), (0, 1)]),
            q([(0, 1), (1, 2), (0, 1), (1, 2)]),
            q([(0, 1), (0, 1), (1, 1), (0, 1)]),
            q([(0, 1), (0, 1), (0, 1), (1, 1)]),
        ]
    } else if p % 8 == 5 && (alg.a, alg.b) == (-2, -p64) {
        vec![
            q([(1, 2), (0, 1), (1, 2), (1, 2)]),
            q([(0, 1), (1, 4), (2, 4), (1, 4)]),
            q([(0, 1), (0, 1), (1, 1), (0, 1)]),
            q([(0, 1), (0, 1), (0, 1), (1, 1)]),
        ]
    } else if p % 8 == 1 && alg.a == -p64 {
        let (aux, c) = auxiliary_prime(p);
        if alg.b != -(aux as i64) {
            return Err(Error::UnsupportedDiscriminant(p));
        }
        let qq = aux as i64;
        vec![
            q([(1, 2), (0, 1), (1, 2), (0, 1)]),
            q([(0, 1), (1, 2), (0, 1), (1, 2)]),
            q([(0, 1), (0, 1), (1, qq), (c, qq)]),
            q([(0, 1), (0, 1), (0, 1), (1, 1)]),
        ]
    } else {
        return Err(Error::UnsupportedDiscriminant(p));
    };
    order_from_generators(*alg, &gens)
}

/// The algebra and maximal order for a prime `p`.
pub fn order_for_prime(p: u64) -> Result<MaximalOrder> {
    maximal_order(&algebra_for_prime(p)?)
}

impl Mul<&Rational> for &Quaternion {
    type Output = Quaternion;
    fn mul(self, r: &Rational) -> Quaternion {
        self.scale(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 41, 73];

    #[test]
    fn algebras_are_certified() {
        for p in PRIMES {
            let alg = algebra_for_prime(p).unwrap();
            assert!(alg.is_definite());
            assert_eq!(alg.ramified_primes(), vec![p]);
        }
        assert!(matches!(algebra_for_prime(4), Err(Error::NotPrime(4))));
        assert!(matches!(algebra_for_prime(1), Err(Error::NotPrime(1))));
    }

    #[test]
    fn orders_are_maximal() {
        for p in PRIMES {
            let o = order_for_prime(p).unwrap();
            assert_eq!(o.reduced_discriminant_check(), (p * p) as i128);
            assert_eq!(o.basis()[0], Quaternion::one());
        }
    }

    #[test]
    fn p5_norms() {
        let alg = algebra_for_prime(5).unwrap();
        assert_eq!((alg.a(), alg.b()), (-2, -5));
        let i = Quaternion::from_ints([0, 1, 0, 0]);
        assert_eq!(reduced_norm(&alg, &i), rat_int(2));
        assert_eq!(reduced_norm(&alg, &Quaternion::one()), rat_int(1));
    }

    #[test]
    fn integral_ops_match_rational_ops() {
        let o = order_for_prime(13).unwrap();
        let x = [1, -2, 3, 1];
        let y = [0, 4, -1, 2];
        let prod = o.algebra().mul(&o.to_quaternion(&x), &o.to_quaternion(&y));
        assert_eq!(o.to_quaternion(&o.mul(&x, &y)), prod);
        assert_eq!(o.to_quaternion(&o.conj(&x)), o.to_quaternion(&x).conj());
        assert_eq!(rat_int(o.nrd(&x)), o.algebra().norm(&o.to_quaternion(&x)));
        assert_eq!(rat_int(o.trd(&x)), o.to_quaternion(&x).trace());
    }

    #[test]
    fn json_round_trip() {
        let o = order_for_prime(17).unwrap();
        let v = o.to_json();
        let back = MaximalOrder::from_json(&v).unwrap();
        assert_eq!(back, o);
        assert_eq!(rational_from_str("-3/6").unwrap(), rat(-1, 2));
        assert!(rational_from_str("1/0").is_err());
    }
}
