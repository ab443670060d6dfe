//! Matrices over a quaternion algebra, with the reduced norm computed through
//! the split representation over the quadratic subfield `K = Q(i)`.

use num_traits::{One, Zero};

use crate::arith::rat_int;
use crate::quat_core::{MaximalOrder, Quaternion, QuaternionAlgebra};
use crate::Rational;

/// `r + s sqrt(a)` in `K = Q(sqrt(a))`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct KElt {
    r: Rational,
    s: Rational,
}

impl KElt {
    fn zero() -> Self {
        KElt { r: Rational::zero(), s: Rational::zero() }
    }

    fn one() -> Self {
        KElt { r: Rational::one(), s: Rational::zero() }
    }

    fn is_zero(&self) -> bool {
        self.r.is_zero() && self.s.is_zero()
    }

    fn sub(&self, o: &KElt) -> KElt {
        KElt { r: &self.r - &o.r, s: &self.s - &o.s }
    }

    fn mul(&self, o: &KElt, a: &Rational) -> KElt {
        KElt {
            r: &self.r * &o.r + a * &self.s * &o.s,
            s: &self.r * &o.s + &self.s * &o.r,
        }
    }

    fn scale(&self, x: &Rational) -> KElt {
        KElt { r: &self.r * x, s: &self.s * x }
    }

    fn conj(&self) -> KElt {
        KElt { r: self.r.clone(), s: -&self.s }
    }

    fn inv(&self, a: &Rational) -> KElt {
        let n = &self.r * &self.r - a * &self.s * &self.s;
        self.conj().scale(&n.recip())
    }
}

/// `x = alpha + beta j` maps to `[[alpha, b beta], [conj(beta), conj(alpha)]]`.
fn split(x: &Quaternion, b: &Rational) -> [[KElt; 2]; 2] {
    let [x0, x1, x2, x3] = x.coeffs();
    let alpha = KElt { r: x0.clone(), s: x1.clone() };
    let beta = KElt { r: x2.clone(), s: x3.clone() };
    [
        [alpha.clone(), beta.scale(b)],
        [beta.conj(), alpha.conj()],
    ]
}

fn unsplit(m: [[&KElt; 2]; 2], b: &Rational) -> Option<Quaternion> {
    let alpha = m[0][0];
    let beta = m[1][0].conj();
    if &beta.scale(b) != m[0][1] || &alpha.conj() != m[1][1] {
        return None;
    }
    Some(Quaternion::new([
        alpha.r.clone(),
        alpha.s.clone(),
        beta.r.clone(),
        beta.s.clone(),
    ]))
}

/// A `rows x cols` matrix with rational quaternion entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Quaternion>,
}

impl QuatMatrix {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Quaternion>) -> Self {
        assert_eq!(entries.len(), rows * cols);
        QuatMatrix { rows, cols, entries }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Quaternion) -> Self {
        let entries = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        QuatMatrix { rows, cols, entries }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Quaternion::zero())
    }

    pub fn identity(g: usize) -> Self {
        Self::from_fn(g, g, |r, c| if r == c { Quaternion::one() } else { Quaternion::zero() })
    }

    pub fn diagonal(d: &[Quaternion]) -> Self {
        let g = d.len();
        Self::from_fn(g, g, |r, c| if r == c { d[r].clone() } else { Quaternion::zero() })
    }

    pub fn scalar(g: usize, x: &Rational) -> Self {
        Self::from_fn(g, g, |r, c| {
            if r == c {
                Quaternion::scalar(x.clone())
            } else {
                Quaternion::zero()
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Quaternion {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: Quaternion) {
        self.entries[r * self.cols + c] = x;
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.entries
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> QuatMatrix {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn mul(&self, alg: &QuaternionAlgebra, o: &QuatMatrix) -> QuatMatrix {
        assert_eq!(self.cols, o.rows, "dimension mismatch");
        Self::from_fn(self.rows, o.cols, |r, c| {
            let mut s = Quaternion::zero();
            for k in 0..self.cols {
                s = &s + &alg.mul(self.get(r, k), o.get(k, c));
            }
            s
        })
    }

    pub fn add(&self, o: &QuatMatrix) -> QuatMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Self::from_fn(self.rows, self.cols, |r, c| self.get(r, c) + o.get(r, c))
    }

    pub fn scale(&self, x: &Rational) -> QuatMatrix {
        Self::from_fn(self.rows, self.cols, |r, c| self.get(r, c).scale(x))
    }

    /// Whether every entry lies in the order.
    pub fn is_integral(&self, order: &MaximalOrder) -> bool {
        self.entries.iter().all(|x| order.contains(x))
    }

    fn split_matrix(&self, alg: &QuaternionAlgebra) -> Vec<Vec<KElt>> {
        let b = rat_int(alg.b());
        let n = self.rows;
        let mut m = vec![vec![KElt::zero(); 2 * self.cols]; 2 * n];
        for r in 0..n {
            for c in 0..self.cols {
                let blk = split(self.get(r, c), &b);
                for (u, row) in blk.iter().enumerate() {
                    for (v, x) in row.iter().enumerate() {
                        m[2 * r + u][2 * c + v] = x.clone();
                    }
                }
            }
        }
        m
    }

    /// Reduced norm: the determinant of the `2g x 2g` split matrix over `K`.
    pub fn reduced_norm(&self, alg: &QuaternionAlgebra) -> Rational {
        assert!(self.is_square());
        let a = rat_int(alg.a());
        let mut m = self.split_matrix(alg);
        let n = m.len();
        let mut det = KElt::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
                return Rational::zero();
            };
            if p != c {
                m.swap(p, c);
                det = KElt::zero().sub(&det);
            }
            det = det.mul(&m[c][c], &a);
            let inv = m[c][c].inv(&a);
            for r in c + 1..n {
                if m[r][c].is_zero() {
                    continue;
                }
                let f = m[r][c].mul(&inv, &a);
                for j in c..n {
                    let t = f.mul(&m[c][j], &a);
                    m[r][j] = m[r][j].sub(&t);
                }
            }
        }
        assert!(det.s.is_zero(), "reduced norm must be rational");
        det.r
    }

    /// Two-sided inverse, if the matrix is invertible.
    pub fn inverse(&self, alg: &QuaternionAlgebra) -> Option<QuatMatrix> {
        assert!(self.is_square());
        let a = rat_int(alg.a());
        let b = rat_int(alg.b());
        let mut m = self.split_matrix(alg);
        let n = m.len();
        let mut inv: Vec<Vec<KElt>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { KElt::one() } else { KElt::zero() }).collect())
            .collect();
        for c in 0..n {
            let p = (c..n).find(|&r| !m[r][c].is_zero())?;
            m.swap(p, c);
            inv.swap(p, c);
            let piv = m[c][c].inv(&a);
            for j in 0..n {
                m[c][j] = m[c][j].mul(&piv, &a);
                inv[c][j] = inv[c][j].mul(&piv, &a);
            }
            for r in 0..n {
                if r == c || m[r][c].is_zero() {
                    continue;
                }
                let f = m[r][c].clone();
                for j in 0..n {
                    let t = f.mul(&m[c][j], &a);
                    m[r][j] = m[r][j].sub(&t);
                    let t = f.mul(&inv[c][j], &a);
                    inv[r][j] = inv[r][j].sub(&t);
                }
            }
        }
        let g = self.rows;
        let mut out = QuatMatrix::zero(g, g);
        for r in 0..g {
            for c in 0..g {
                let blk = [
                    [&inv[2 * r][2 * c], &inv[2 * r][2 * c + 1]],
                    [&inv[2 * r + 1][2 * c], &inv[2 * r + 1][2 * c + 1]],
                ];
                out.set(r, c, unsplit(blk, &b).expect("inverse of a split matrix is split"));
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat_core::order_for_prime;

    fn q(c: [i64; 4]) -> Quaternion {
        Quaternion::from_ints(c)
    }

    #[test]
    fn split_round_trip() {
        let o = order_for_prime(5).unwrap();
        let b = rat_int(o.algebra().b());
        let x = q([1, -2, 3, 5]);
        let s = split(&x, &b);
        let back = unsplit([[&s[0][0], &s[0][1]], [&s[1][0], &s[1][1]]], &b).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn norm_of_scalar_matrix() {
        let o = order_for_prime(7).unwrap();
        let alg = o.algebra();
        let m = QuatMatrix::diagonal(&[q([1, 1, 0, 0]), q([0, 0, 1, 1])]);
        let expect = alg.norm(&q([1, 1, 0, 0])) * alg.norm(&q([0, 0, 1, 1]));
        assert_eq!(m.reduced_norm(alg), expect);
        assert_eq!(QuatMatrix::identity(3).reduced_norm(alg), Rational::one());
    }

    #[test]
    fn inverse_is_two_sided() {
        let o = order_for_prime(5).unwrap();
        let alg = o.algebra();
        let m = QuatMatrix::from_entries(2, 2, vec![q([1, 2, 0, 1]), q([0, 1, 1, 0]), q([3, 0, 0, -1]), q([1, 0, 2, 0])]);
        let inv = m.inverse(alg).unwrap();
        assert_eq!(m.mul(alg, &inv), QuatMatrix::identity(2));
        assert_eq!(inv.mul(alg, &m), QuatMatrix::identity(2));
        let sing = QuatMatrix::from_entries(2, 2, vec![q([1, 0, 0, 0]), q([0, 1, 0, 0]), q([1, 0, 0, 0]), q([0, 1, 0, 0])]);
        assert!(sing.inverse(alg).is_none());
        assert!(sing.reduced_norm(alg).is_zero());
    }
}
