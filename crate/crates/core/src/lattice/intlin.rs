//! Exact integer linear algebra on small dense matrices: Hermite normal
//! forms, column echelon forms with unimodular transforms, affine solving
//! over `Z`, and row reduction over `F_l`.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::mod_inv;

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    // returns (g, x, y) with a*x + b*y = g >= 0
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Hermite normal form of the row lattice spanned by `gens`, with rows
/// sorted by pivot column. Row `k` of the result has its last nonzero entry
/// (the pivot, positive) in a column strictly greater than that of row `k-1`,
/// and entries left of a pivot column are reduced modulo that pivot.
pub fn hnf_rows(gens: &[Vec<i128>], n: usize) -> Vec<Vec<i128>> {
    let mut pool: Vec<Vec<i128>> = gens
        .iter()
        .filter(|r| r.iter().any(|&x| x != 0))
        .cloned()
        .collect();
    let mut basis: Vec<(usize, Vec<i128>)> = Vec::new();
    for col in (0..n).rev() {
        // gcd-eliminate column `col` among rows in the pool (all of which vanish beyond col)
        let mut pivot: Option<Vec<i128>> = None;
        let mut rest = Vec::with_capacity(pool.len());
        for row in pool.drain(..) {
            if row[col] == 0 {
                rest.push(row);
                continue;
            }
            match pivot.take() {
                None => pivot = Some(row),
                Some(pv) => {
                    let (g, x, y) = ext_gcd(pv[col], row[col]);
                    let a = pv[col] / g;
                    let b = row[col] / g;
                    let new_pv: Vec<i128> = (0..n).map(|k| x * pv[k] + y * row[k]).collect();
                    let other: Vec<i128> = (0..n).map(|k| b * pv[k] - a * row[k]).collect();
                    debug_assert_eq!(other[col], 0);
                    if other.iter().any(|&v| v != 0) {
                        rest.push(other);
                    }
                    pivot = Some(new_pv);
                }
            }
        }
        pool = rest;
        if let Some(mut pv) = pivot {
            if pv[col] < 0 {
                pv.iter_mut().for_each(|v| *v = -*v);
            }
            basis.push((col, pv));
        }
    }
    basis.sort_by_key(|(c, _)| *c);
    // reduce entries left of each pivot by earlier pivot rows
    for k in 0..basis.len() {
        for m in (0..k).rev() {
            let (c, ref piv) = basis[m];
            let piv = piv.clone();
            let row = &mut basis[k].1;
            let q = row[c].div_euclid(piv[c]);
            if q != 0 {
                for t in 0..n {
                    row[t] -= q * piv[t];
                }
            }
        }
    }
    basis.into_iter().map(|(_, r)| r).collect()
}

/// A full-rank lattice in `Z^n` stored by its lower-triangular Hermite basis
/// (row `k` is supported on coordinates `0..=k`), which makes coordinate
/// extraction a triangular back-substitution.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HnfBasis {
    rows: Vec<Vec<i64>>,
}

impl HnfBasis {
    pub fn from_generators(gens: &[Vec<i64>], n: usize) -> Option<Self> {
        let g128: Vec<Vec<i128>> = gens
            .iter()
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect();
        let h = hnf_rows(&g128, n);
        if h.len() != n {
            return None;
        }
        let rows = h
            .into_iter()
            .map(|r| r.into_iter().map(|x| i64::try_from(x).expect("HNF entry overflow")).collect())
            .collect();
        Some(HnfBasis { rows })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        HnfBasis { rows }
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Lattice index in `Z^n` (product of the pivots).
    pub fn index(&self) -> i128 {
        (0..self.dim()).map(|k| self.rows[k][k] as i128).product()
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim()).all(|k| self.rows[k][k] == 1)
    }

    /// Integer coordinates of `v` in this basis, or `None` if `v` is not in the lattice.
    pub fn coords(&self, v: &[i64]) -> Option<Vec<i64>> {
        let n = self.dim();
        let mut rem: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        let mut z = vec![0i64; n];
        for k in (0..n).rev() {
            let piv = self.rows[k][k] as i128;
            if rem[k] % piv != 0 {
                return None;
            }
            let q = rem[k] / piv;
            z[k] = q as i64;
            if q != 0 {
                for t in 0..=k {
                    rem[t] -= q * self.rows[k][t] as i128;
                }
            }
        }
        Some(z)
    }

    /// Same as [`HnfBasis::coords`] for a vector scaled by `1/den`.
    pub fn coords_scaled(&self, v: &[i64], den: i64) -> Option<Vec<i64>> {
        if den == 1 {
            return self.coords(v);
        }
        let n = self.dim();
        let den = den as i128;
        let mut rem: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        let mut z = vec![0i64; n];
        for k in (0..n).rev() {
            let piv = self.rows[k][k] as i128 * den;
            if rem[k] % piv != 0 {
                return None;
            }
            let q = rem[k] / piv;
            z[k] = q as i64;
            if q != 0 {
                for t in 0..=k {
                    rem[t] -= q * self.rows[k][t] as i128 * den;
                }
            }
        }
        Some(z)
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.coords(v).is_some()
    }

    /// The vector with coordinates `z`.
    pub fn combine(&self, z: &[i64]) -> Vec<i64> {
        let n = self.dim();
        let mut out = vec![0i64; n];
        for (k, &c) in z.iter().enumerate() {
            if c != 0 {
                for t in 0..=k {
                    out[t] += c * self.rows[k][t];
                }
            }
        }
        out
    }
}

/// Column echelon form `A U = [E | 0]` with `U` unimodular.
/// Returns `(E_full, U, rank, pivot_rows)` where `E_full = A U` and the
/// first `rank` columns carry the pivots at rows `pivot_rows`.
pub struct ColumnEchelon {
    pub e: Vec<Vec<i128>>,
    pub u: Vec<Vec<i128>>,
    pub rank: usize,
    pub pivot_rows: Vec<usize>,
}

pub fn column_echelon(a: &[Vec<i128>], n: usize) -> ColumnEchelon {
    let m = a.len();
    let mut e: Vec<Vec<i128>> = a.to_vec();
    let mut u: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut col = 0usize;
    let mut pivot_rows = Vec::new();
    for row in 0..m {
        if col >= n {
            break;
        }
        // Euclid on columns col..n (smallest entry as pivot) until only one is nonzero in this row
        loop {
            let Some(piv) = (col..n).filter(|&k| e[row][k] != 0).min_by_key(|&k| e[row][k].abs()) else {
                break;
            };
            let mut done = true;
            for k in col..n {
                if k == piv || e[row][k] == 0 {
                    continue;
                }
                let q = round_div(e[row][k], e[row][piv]);
                add_col(&mut e, &mut u, k, piv, -q);
                if e[row][k] != 0 {
                    done = false;
                }
            }
            if done {
                if piv != col {
                    swap_cols(&mut e, &mut u, col, piv);
                }
                break;
            }
        }
        if e[row][col] != 0 {
            pivot_rows.push(row);
            col += 1;
        }
    }
    ColumnEchelon { e, u, rank: col, pivot_rows }
}

fn round_div(a: i128, b: i128) -> i128 {
    let q = a.div_euclid(b);
    let r = a - q * b;
    if 2 * r.abs() > b.abs() {
        q + b.signum()
    } else {
        q
    }
}

/// column `k` += `q` * column `j`
fn add_col(e: &mut [Vec<i128>], u: &mut [Vec<i128>], k: usize, j: usize, q: i128) {
    for r in e.iter_mut() {
        r[k] += q * r[j];
    }
    for r in u.iter_mut() {
        r[k] += q * r[j];
    }
}

fn swap_cols(e: &mut [Vec<i128>], u: &mut [Vec<i128>], i: usize, j: usize) {
    for r in e.iter_mut() {
        r.swap(i, j);
    }
    for r in u.iter_mut() {
        r.swap(i, j);
    }
}

/// Integer solutions of `A z = rhs`: a particular solution and a basis of
/// the integer kernel, or `None` if there is no integer solution.
pub fn solve_affine(a: &[Vec<i128>], rhs: &[i128], n: usize) -> Option<(Vec<i128>, Vec<Vec<i128>>)> {
    let ce = column_echelon(a, n);
    let m = a.len();
    let r = ce.rank;
    let mut w = vec![0i128; n];
    let mut next_pivot = 0usize;
    for row in 0..m {
        let known: i128 = (0..next_pivot).map(|k| ce.e[row][k] * w[k]).sum();
        if next_pivot < r && ce.pivot_rows[next_pivot] == row {
            let piv = ce.e[row][next_pivot];
            let diff = rhs[row] - known;
            if diff % piv != 0 {
                return None;
            }
            w[next_pivot] = diff / piv;
            next_pivot += 1;
        } else if known != rhs[row] {
            return None;
        }
    }
    let z0: Vec<i128> = (0..n).map(|i| (0..r).map(|k| ce.u[i][k] * w[k]).sum()).collect();
    let kernel: Vec<Vec<i128>> = (r..n).map(|k| (0..n).map(|i| ce.u[i][k]).collect()).collect();
    Some((z0, kernel))
}

/// Whether the rows of `rows` (linearly independent) span a saturated
/// sublattice of `Z^n`, i.e. extend to a basis of `Z^n`.
pub fn is_saturated(rows: &[Vec<i128>], n: usize) -> bool {
    let ce = column_echelon(rows, n);
    if ce.rank != rows.len() {
        return false;
    }
    let det: i128 = (0..ce.rank).map(|k| ce.e[ce.pivot_rows[k]][k]).product();
    det.abs() == 1
}

/// Determinant of a square integer matrix (fraction-free Bareiss).
pub fn det_big(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

/// [`det_big`] for matrices whose determinant is known to fit in `i128`.
pub fn det_i128(m: &[Vec<i64>]) -> i128 {
    det_big(m).to_i128().expect("determinant exceeds i128")
}

/// Reduced row echelon form over `F_l` of the given rows; zero rows dropped.
pub fn rref_mod(rows: &[Vec<i64>], ell: i64) -> Vec<Vec<i64>> {
    let mut a: Vec<Vec<i64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x.rem_euclid(ell)).collect())
        .collect();
    let ncols = a.first().map_or(0, |r| r.len());
    let mut rank = 0usize;
    for col in 0..ncols {
        let Some(p) = (rank..a.len()).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(rank, p);
        let inv = mod_inv(a[rank][col], ell).expect("l must be prime");
        for x in a[rank].iter_mut() {
            *x = *x * inv % ell;
        }
        for i in 0..a.len() {
            if i != rank && a[i][col] != 0 {
                let f = a[i][col];
                for j in 0..ncols {
                    a[i][j] = (a[i][j] - f * a[rank][j]).rem_euclid(ell);
                }
            }
        }
        rank += 1;
        if rank == a.len() {
            break;
        }
    }
    a.truncate(rank);
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hnf_of_simple_lattice() {
        let gens = vec![vec![2i128, 0], vec![1, 2], vec![0, 4]];
        let h = hnf_rows(&gens, 2);
        assert_eq!(h, vec![vec![2, 0], vec![1, 2]]);
    }

    #[test]
    fn coords_round_trip() {
        let b = HnfBasis::from_generators(&[vec![2, 0, 0], vec![1, 3, 0], vec![0, 1, 5]], 3).unwrap();
        let z = vec![3, -2, 7];
        let v = b.combine(&z);
        assert_eq!(b.coords(&v), Some(z));
        assert_eq!(b.coords(&[1, 0, 0]), None);
        assert_eq!(b.index(), 30);
    }

    #[test]
    fn affine_solve_and_kernel() {
        // x + 2y + 3z = 7 over Z^3
        let a = vec![vec![1i128, 2, 3]];
        let (z0, ker) = solve_affine(&a, &[7], 3).unwrap();
        assert_eq!(z0[0] + 2 * z0[1] + 3 * z0[2], 7);
        assert_eq!(ker.len(), 2);
        for k in &ker {
            assert_eq!(k[0] + 2 * k[1] + 3 * k[2], 0);
        }
        // 2x + 4y = 3 has no integer solution
        assert!(solve_affine(&[vec![2, 4]], &[3], 2).is_none());
    }

    #[test]
    fn saturation() {
        assert!(is_saturated(&[vec![1, 2, 3]], 3));
        assert!(!is_saturated(&[vec![2, 4, 6]], 3));
        assert!(!is_saturated(&[vec![1, 0, 0], vec![0, 2, 0]], 3));
        assert!(is_saturated(&[vec![1, 0, 0], vec![0, 3, 1]], 3));
    }

    #[test]
    fn determinant() {
        let m = vec![vec![2i64, 1, 0], vec![1, 3, 1], vec![0, 1, 4]];
        assert_eq!(det_i128(&m), 2 * 11 - 4);
        // a zero pivot, and a result beyond i128
        let big = vec![vec![0, 1 << 40, 0], vec![1 << 40, 0, 0], vec![0, 0, 1 << 62]];
        assert_eq!(det_big(&big), -(BigInt::from(1) << 142u32));
    }

    #[test]
    fn rref_over_field() {
        let r = rref_mod(&[vec![2, 4, 1], vec![1, 2, 1], vec![3, 6, 2]], 5);
        assert_eq!(r.len(), 2);
        assert_eq!(r[0], vec![1, 2, 0]);
        assert_eq!(r[1], vec![0, 0, 1]);
    }
}
